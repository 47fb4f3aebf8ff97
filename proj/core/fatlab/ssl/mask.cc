// fatlab/ssl/mask.cc

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

#include "fatlab/ssl/mask.h"

#include <algorithm>

#include "fatlab/util/check.h"

namespace fatlab {
namespace ssl {

std::vector<int64_t> SpanMask(int64_t frames, const MaskingConfig &cfg,
                              numerics::Rng *rng) {
  FATLAB_CHECK(frames >= 1) << "(span mask over " << frames << " frames)";
  FATLAB_CHECK(cfg.mask_prob >= 0.0 && cfg.mask_prob <= 1.0)
      << "(mask_prob " << cfg.mask_prob << " outside [0, 1])";
  FATLAB_CHECK(cfg.span_length >= 1)
      << "(span_length " << cfg.span_length << " below 1)";
  FATLAB_CHECK(cfg.min_masks >= 0) << "(negative min_masks)";
  FATLAB_CHECK(rng != nullptr) << "(span mask needs an rng)";

  std::vector<char> covered(static_cast<size_t>(frames), 0);
  auto mark = [&](int64_t start) {
    int64_t end = std::min(start + cfg.span_length, frames);
    for (int64_t t = start; t < end; ++t) covered[static_cast<size_t>(t)] = 1;
  };
  for (int64_t t = 0; t < frames; ++t) {
    if (rng->Uniform() < cfg.mask_prob) mark(t);
  }

  bool any = std::find(covered.begin(), covered.end(), 1) != covered.end();
  if (!any && cfg.min_masks > 0) mark(rng->UniformInt(frames));

  std::vector<int64_t> out;
  for (int64_t t = 0; t < frames; ++t) {
    if (covered[static_cast<size_t>(t)]) out.push_back(t);
  }
  return out;
}

}  // namespace ssl
}  // namespace fatlab
