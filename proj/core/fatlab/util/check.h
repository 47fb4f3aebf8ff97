// fatlab/util/check.h

// Copyright 2026  FATLab Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef FATLAB_UTIL_CHECK_H_
#define FATLAB_UTIL_CHECK_H_

#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace fatlab {

// Error raised by FATLAB_ERR / failed FATLAB_CHECK. Carries the formatted
// message including file:line of the throw site.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string &msg) : std::runtime_error(msg) {}
};

namespace util {

class ErrStream {
 public:
  ErrStream(const char *file, int line) {
    os_ << "ERROR (" << file << ":" << line << ") ";
  }
  [[noreturn]] ~ErrStream() noexcept(false) { throw Error(os_.str()); }
  template <typename T>
  ErrStream &operator<<(const T &v) {
    os_ << v;
    return *this;
  }

 private:
  std::ostringstream os_;
};

class WarnStream {
 public:
  WarnStream(const char *file, int line) {
    os_ << "WARNING (" << file << ":" << line << ") ";
  }
  ~WarnStream() { std::cerr << os_.str() << std::endl; }
  template <typename T>
  WarnStream &operator<<(const T &v) {
    os_ << v;
    return *this;
  }

 private:
  std::ostringstream os_;
};

class LogStream {
 public:
  LogStream() { os_ << "LOG "; }
  ~LogStream() { std::cerr << os_.str() << std::endl; }
  template <typename T>
  LogStream &operator<<(const T &v) {
    os_ << v;
    return *this;
  }

 private:
  std::ostringstream os_;
};

}  // namespace util
}  // namespace fatlab

#define FATLAB_ERR ::fatlab::util::ErrStream(__FILE__, __LINE__)
#define FATLAB_WARN ::fatlab::util::WarnStream(__FILE__, __LINE__)
#define FATLAB_LOG ::fatlab::util::LogStream()

#define FATLAB_CHECK(cond)                                      \
  if (!(cond))                                                  \
  ::fatlab::util::ErrStream(__FILE__, __LINE__)                 \
      << "check failed: " << #cond << " "

#endif  // FATLAB_UTIL_CHECK_H_
