// fatlab/fat/pretrain.h

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

#ifndef FATLAB_FAT_PRETRAIN_H_
#define FATLAB_FAT_PRETRAIN_H_

#include <cstdint>
#include <string>
#include <vector>

#include "fatlab/fat/config.h"
#include "fatlab/fat/prepare.h"
#include "fatlab/ssl/config.h"
#include "fatlab/ssl/model.h"

namespace fatlab {
namespace fat {

struct PretrainResult {
  int64_t steps_done = 0;
  // True when a non-finite batch loss stopped the run; the diagnostic dump
  // holds the offending batch's provenance and no final checkpoint exists.
  bool halted_nonfinite = false;
  std::string final_checkpoint;
  std::string loss_csv;
  std::string provenance_jsonl;
  std::string halt_dump;
  // Per-step batch losses, in order, for quick inspection.
  std::vector<double> losses;
};

// Continual pretraining with front-end adaptive preparation. Per step: a
// batch is drawn with replacement, every utterance runs through FatPrepare
// (and the noisy branch through ImstApply when imst is non-null), both
// renderings feed the two-branch forward under a fresh span mask, and the
// mean masked-prediction loss drives Adam under linear warmup. Every draw
// derives from (seed, purpose stream, step, slot), so any step can be
// reproduced in isolation. Emits loss.csv (step,loss,masked_frames,lr),
// provenance.jsonl (one line per step), periodic checkpoints, and final.bin
// under out_dir.
PretrainResult Pretrain(ssl::SslEncoder *model, const std::string &manifest,
                        const std::string &targets_dir, const ActivePool &pool,
                        const NoiseSource &noise, const FatConfig &fat, const ImstConfig *imst,
                        const ssl::MaskingConfig &masking, const PretrainConfig &cfg,
                        const std::string &out_dir);

// The plain single-branch loop on the manifest audio as given: no pool, no
// mixing, no style switching, same batch and mask streams, same logs. The
// reference trajectory the identity-pool reduction reproduces.
PretrainResult BaselinePretrain(ssl::SslEncoder *model, const std::string &manifest,
                                const std::string &targets_dir,
                                const ssl::MaskingConfig &masking, const PretrainConfig &cfg,
                                const std::string &out_dir);

}  // namespace fat
}  // namespace fatlab

#endif  // FATLAB_FAT_PRETRAIN_H_
