// fatlab/frontends/config.h

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

#ifndef FATLAB_FRONTENDS_CONFIG_H_
#define FATLAB_FRONTENDS_CONFIG_H_

#include <cstdint>
#include <string>
#include <vector>

namespace fatlab {
namespace frontends {

enum class FrontendFamily {
  kTimeDomain,  // learned filterbank, dilated conv mask net, transposed-conv synthesis
  kTfDomain,    // magnitude-mask estimator on STFT frames
};

std::string ToString(FrontendFamily family);
FrontendFamily FamilyFromString(const std::string &name);

// Time-domain enhancer sizes. The analysis filterbank is a strided 1-D conv
// with `filters` kernels of length `kernel`; the mask network is a stack of
// dilated residual conv blocks of width `block_channels`; synthesis is the
// matching transposed conv.
struct TimeDomainArch {
  int64_t filters = 64;
  int64_t kernel = 16;
  int64_t stride = 8;
  int64_t block_channels = 32;
  std::vector<int64_t> dilations = {1, 2, 4, 8};
};

// TF-domain enhancer sizes. Log magnitudes of an STFT with `frame_length` /
// `hop` are projected to `hidden` units, passed through one GRU layer (or a
// feed-forward layer when `recurrent` is false) and mapped back to a per-bin
// sigmoid mask.
struct TfDomainArch {
  int64_t frame_length = 512;
  int64_t hop = 128;
  int64_t hidden = 64;
  bool recurrent = true;
};

struct FrontendSpec {
  std::string id;
  FrontendFamily family = FrontendFamily::kTimeDomain;
  TimeDomainArch td;
  TfDomainArch tf;
  uint64_t init_seed = 1;
  int sample_rate = 16000;
  // Mixture SNR range this front-end is trained on, recorded in checkpoints.
  double snr_low_db = 0.0;
  double snr_high_db = 5.0;
  // Whether the front-end is a member of the augmentation pool. Instances
  // trained only for held-out evaluation set this to false.
  bool seen_in_training = true;
};

}  // namespace frontends
}  // namespace fatlab

#endif  // FATLAB_FRONTENDS_CONFIG_H_
