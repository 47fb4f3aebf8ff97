// fatlab/util/hash.h

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

#ifndef FATLAB_UTIL_HASH_H_
#define FATLAB_UTIL_HASH_H_

#include <cstdint>
#include <string>

namespace fatlab {
namespace util {

// FNV-1a over a byte buffer. Used for content fingerprints in run manifests;
// not cryptographic.
uint64_t Fnv1a64(const void *data, size_t len, uint64_t seed = 0xcbf29ce484222325ULL);

inline uint64_t Fnv1a64(const std::string &s) { return Fnv1a64(s.data(), s.size()); }

// Fingerprint of a file's contents. Throws if the file cannot be read.
uint64_t HashFile(const std::string &path);

// Lower-case hex rendering, 16 chars.
std::string HashToHex(uint64_t h);

}  // namespace util
}  // namespace fatlab

#endif  // FATLAB_UTIL_HASH_H_
