// fatlab/numerics/rng.cc

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

#include "fatlab/numerics/rng.h"

#include <cmath>

#include "fatlab/util/check.h"

namespace fatlab {
namespace numerics {

uint64_t Mix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

Rng Rng::Derive(uint64_t seed, Stream stream, uint64_t a, uint64_t b) {
  uint64_t s = Mix64(seed);
  s = Mix64(s ^ static_cast<uint64_t>(stream));
  s = Mix64(s ^ a);
  s = Mix64(s ^ b);
  return Rng(s);
}

uint64_t Rng::NextU64() {
  state_ += 0x9e3779b97f4a7c15ULL;
  uint64_t z = state_;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double Rng::Uniform() {
  return static_cast<double>(NextU64() >> 11) * 0x1.0p-53;
}

double Rng::Uniform(double lo, double hi) {
  FATLAB_CHECK(lo <= hi) << "(uniform bounds " << lo << ", " << hi << ")";
  return lo + (hi - lo) * Uniform();
}

int64_t Rng::UniformInt(int64_t n) {
  FATLAB_CHECK(n > 0) << "(UniformInt needs positive n)";
  return static_cast<int64_t>(NextU64() % static_cast<uint64_t>(n));
}

double Rng::Gaussian() {
  // Box-Muller; u1 is kept away from zero so log() stays finite.
  double u1 = Uniform();
  double u2 = Uniform();
  if (u1 < 0x1.0p-53) u1 = 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

double Rng::TruncatedNormal(double sigma, double clip_sigmas) {
  for (;;) {
    double x = Gaussian() * sigma;
    if (std::fabs(x) <= clip_sigmas * sigma) return x;
  }
}

}  // namespace numerics
}  // namespace fatlab
