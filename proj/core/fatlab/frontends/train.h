// fatlab/frontends/train.h

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

#ifndef FATLAB_FRONTENDS_TRAIN_H_
#define FATLAB_FRONTENDS_TRAIN_H_

#include <cstdint>
#include <string>
#include <vector>

#include "fatlab/frontends/config.h"

namespace fatlab {
namespace frontends {

// A training split: two manifests joined on utterance id. The noisy manifest
// is the simulated one, so each row carries the rescale factor applied during
// mixing; references are the clean waveforms scaled by that factor, which is
// the clean component actually present in the mixture.
struct PairedManifests {
  std::string noisy;
  std::string clean;
};

struct TrainFrontendConfig {
  int64_t epochs = 5;
  uint64_t seed = 1;
  double lr = 1e-3;
  // Random crop length per training step; 0 trains on full utterances.
  // Validation always scores full utterances.
  int64_t crop_samples = 8000;
  int64_t log_every = 50;
};

struct TrainFrontendResult {
  std::string checkpoint;
  int64_t steps = 0;
  int64_t skipped_steps = 0;
  // True when a non-finite loss aborted training; the checkpoint then holds
  // the best state seen before the blow-up.
  bool aborted = false;
  int64_t best_epoch = 0;  // 0 means the initialization was never beaten
  double best_val_si_snr_db = 0.0;
  double noisy_val_si_snr_db = 0.0;
  std::vector<std::string> log;
};

// Trains one front-end on (noisy, clean) pairs, keeping the checkpoint with
// the best validation SI-SNR (the initialization competes too, so zero epochs
// simply writes the init). The log is returned and also written next to the
// checkpoint as <out_checkpoint>.log.
TrainFrontendResult TrainFrontend(const FrontendSpec &spec, const PairedManifests &train,
                                  const PairedManifests &val, const std::string &out_checkpoint,
                                  const TrainFrontendConfig &cfg);

}  // namespace frontends
}  // namespace fatlab

#endif  // FATLAB_FRONTENDS_TRAIN_H_
