// fatlab/ssl/mask.h

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

#ifndef FATLAB_SSL_MASK_H_
#define FATLAB_SSL_MASK_H_

#include <cstdint>
#include <vector>

#include "fatlab/numerics/rng.h"
#include "fatlab/ssl/config.h"

namespace fatlab {
namespace ssl {

// Span masking: every frame draws as a span start with probability
// mask_prob, a start at t covers frames [t, min(t + span_length, frames)),
// and the union is returned sorted. One frame draws one Uniform() whether or
// not it is already covered, so RNG consumption depends only on `frames`.
// If nothing fires and min_masks > 0, one extra (UniformInt) draw places a
// forced span. The degenerate frames=1 case masks at most frame 0.
std::vector<int64_t> SpanMask(int64_t frames, const MaskingConfig &cfg,
                              numerics::Rng *rng);

}  // namespace ssl
}  // namespace fatlab

#endif  // FATLAB_SSL_MASK_H_
