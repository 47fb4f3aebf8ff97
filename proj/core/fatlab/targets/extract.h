// fatlab/targets/extract.h

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

#ifndef FATLAB_TARGETS_EXTRACT_H_
#define FATLAB_TARGETS_EXTRACT_H_

#include <cstdint>

#include "fatlab/audio/wav.h"
#include "fatlab/ssl/model.h"
#include "fatlab/targets/mfcc.h"

namespace fatlab {
namespace targets {

// Hidden states from one transformer block of a pretrained encoder, for
// refit rounds where cluster targets come from the model instead of mfcc.
// The waveform is fed to both branches unmasked, so the fused path sees the
// same conditions as pretraining minus the enhancement. No gradients are
// recorded. layer_index counts blocks from 0.
FeatureSequence ExtractLayerFeatures(const ssl::SslEncoder &model,
                                     const audio::Waveform &w, int64_t layer_index);

}  // namespace targets
}  // namespace fatlab

#endif  // FATLAB_TARGETS_EXTRACT_H_
