// fatlab/fat/config.h

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

#ifndef FATLAB_FAT_CONFIG_H_
#define FATLAB_FAT_CONFIG_H_

#include <cstdint>
#include <string>

namespace fatlab {
namespace fat {

// Front-end adaptive training: each utterance is mixed with noise and then
// cleaned by a front-end sampled from the pool, so the encoder sees many
// enhancement styles during pretraining.
struct FatConfig {
  std::string pool_path;  // pool description file; resolved by the caller
  double snr_low_db = 5.0;
  double snr_high_db = 10.0;
  // True samples a front-end per utterance; false shares one pick across the
  // whole batch of a step.
  bool per_utterance = true;
  // Appends a pass-through entry named "identity" to the sampled set.
  bool include_identity_frontend = false;
};

// Intra-utterance multi-style training: consecutive segments of the noisy
// branch input independently keep their noisy rendering or switch to an
// enhanced one.
struct ImstConfig {
  double segment_length_s = 1.0;
  double p_enh = 0.5;
  // True samples a front-end per enhanced segment; false samples once per
  // utterance and reuses it.
  bool resample_per_segment = true;
};

struct PretrainConfig {
  int64_t steps = 2000;
  int64_t batch_size = 4;
  double lr = 1e-4;
  // Linear warmup step count; negative means 8% of steps.
  int64_t warmup_steps = -1;
  uint64_t seed = 1;
  // Checkpoint cadence in steps; 0 writes only the final checkpoint.
  int64_t checkpoint_every = 500;
  // When false the fusion parameters are excluded from the optimizer, which
  // pins additive fusion at its pass-through initialization.
  bool train_fusion = true;
};

}  // namespace fat
}  // namespace fatlab

#endif  // FATLAB_FAT_CONFIG_H_
