// fatlab/numerics/rng.h

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

#ifndef FATLAB_NUMERICS_RNG_H_
#define FATLAB_NUMERICS_RNG_H_

#include <cstdint>
#include <initializer_list>

namespace fatlab {
namespace numerics {

// splitmix64 sequence generator. All randomness in the repo flows through
// this type: std:: distributions are implementation-defined and would break
// bit-reproducibility of training runs.
//
// Streams are derived, not shared. Rng::Derive(seed, purpose, a, b) gives an
// independent stream for one purpose at one point of the run (e.g. the span
// mask of utterance b at step a), so code paths that consume extra draws for
// their own purposes cannot shift anyone else's stream.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  // One purpose id per call site family. Values are stable identifiers that
  // end up mixed into derived seeds; never renumber.
  enum Stream : uint64_t {
    kInit = 1,       // parameter initialization
    kSynth = 2,      // corpus synthesis
    kDataset = 3,    // dataset simulation (snr, noise pick, offset)
    kBatch = 4,      // batch composition per step
    kNoise = 5,      // on-the-fly noise pick + offset
    kSnr = 6,        // on-the-fly snr draw
    kPool = 7,       // front-end pool sampling
    kImstCoin = 8,   // per-segment style coin
    kImstPool = 9,   // per-segment front-end resampling
    kSpanMask = 10,  // span masking
    kKmeans = 11,    // k-means seeding
    kTest = 12,      // test-only generators
  };

  static Rng Derive(uint64_t seed, Stream stream, uint64_t a = 0, uint64_t b = 0);

  uint64_t NextU64();

  // Uniform in [0, 1) with 53 random bits.
  double Uniform();
  double Uniform(double lo, double hi);

  // Uniform integer in [0, n). Single NextU64 draw (modulo; bias is ~2^-60
  // for the pool sizes used here).
  int64_t UniformInt(int64_t n);

  // Standard normal via Box-Muller. Two draws per call, no cached spare.
  double Gaussian();

  // Normal(0, sigma) re-drawn until |x| <= clip_sigmas * sigma.
  double TruncatedNormal(double sigma, double clip_sigmas = 2.0);

 private:
  uint64_t state_;
};

// splitmix64 finalizer; also the mixing primitive for derived seeds.
uint64_t Mix64(uint64_t x);

}  // namespace numerics
}  // namespace fatlab

#endif  // FATLAB_NUMERICS_RNG_H_
