// fatlab/audio/mix.h

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

#ifndef FATLAB_AUDIO_MIX_H_
#define FATLAB_AUDIO_MIX_H_

#include <cstdint>

#include "fatlab/audio/wav.h"

namespace fatlab {
namespace audio {

struct MixResult {
  Waveform noisy;
  double gain = 0.0;     // scale applied to the noise before adding
  double rescale = 1.0;  // whole-mixture factor applied when |peak| > 1
};

// noisy = rescale * (clean + gain * noise_loop), where noise_loop is the
// noise repeated circularly from noise_offset to cover the clean signal and
// gain = sqrt(P_clean / (P_noise * 10^(snr/10))) over the overlapped region.
// The clean signal itself is never renormalized (rescale stays 1) unless the
// mixture peaks above 1, in which case the whole mixture is scaled by
// 0.99/peak and that factor is reported for the manifest.
MixResult MixAtSnr(const Waveform &clean, const Waveform &noise, double snr_db,
                   int64_t noise_offset = 0);

}  // namespace audio
}  // namespace fatlab

#endif  // FATLAB_AUDIO_MIX_H_
