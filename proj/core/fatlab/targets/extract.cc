// fatlab/targets/extract.cc

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

#include "fatlab/targets/extract.h"

#include "fatlab/numerics/autograd.h"
#include "fatlab/util/check.h"

namespace fatlab {
namespace targets {

FeatureSequence ExtractLayerFeatures(const ssl::SslEncoder &model,
                                     const audio::Waveform &w, int64_t layer_index) {
  int64_t blocks = model.encoder_config().num_blocks;
  FATLAB_CHECK(layer_index >= 0 && layer_index < blocks)
      << "(layer " << layer_index << " outside the " << blocks << "-block encoder)";
  numerics::NoGradGuard no_grad;
  ssl::ForwardResult r = model.ForwardTwoBranch(w, w, nullptr);
  FeatureSequence out;
  out.feats = r.layers[static_cast<size_t>(layer_index)]->value;
  out.frame_rate_hz = 50.0;
  return out;
}

}  // namespace targets
}  // namespace fatlab
