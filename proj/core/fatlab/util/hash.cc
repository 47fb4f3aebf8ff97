// fatlab/util/hash.cc

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

#include "fatlab/util/hash.h"

#include <cstdio>
#include <fstream>
#include <vector>

#include "fatlab/util/check.h"

namespace fatlab {
namespace util {

uint64_t Fnv1a64(const void *data, size_t len, uint64_t seed) {
  const uint64_t prime = 0x100000001b3ULL;
  uint64_t h = seed;
  const unsigned char *p = static_cast<const unsigned char *>(data);
  for (size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= prime;
  }
  return h;
}

uint64_t HashFile(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) FATLAB_ERR << "cannot open file for hashing: " << path;
  uint64_t h = 0xcbf29ce484222325ULL;
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), buf.size());
    std::streamsize got = in.gcount();
    if (got > 0) h = Fnv1a64(buf.data(), static_cast<size_t>(got), h);
  }
  return h;
}

std::string HashToHex(uint64_t h) {
  char out[17];
  std::snprintf(out, sizeof(out), "%016llx", static_cast<unsigned long long>(h));
  return std::string(out);
}

}  // namespace util
}  // namespace fatlab
