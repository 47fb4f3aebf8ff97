// fatlab/targets/mfcc.h

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

#ifndef FATLAB_TARGETS_MFCC_H_
#define FATLAB_TARGETS_MFCC_H_

#include "fatlab/audio/wav.h"
#include "fatlab/numerics/tensor.h"

namespace fatlab {
namespace targets {

struct FeatureSequence {
  numerics::Tensor feats;  // frames x dim
  double frame_rate_hz = 50.0;
};

struct MfccOptions {
  int n_mels = 24;
  int n_coeffs = 13;
  // Per-utterance mean-variance normalization. Off exposes the raw DCT
  // coefficients (the flat-spectrum identities only hold there).
  bool normalize = true;
};

// Frame 400, hop 320 at 16 kHz gives 50 Hz features aligned to a 320x
// encoder downsample; frame count is ceil(len/320), with the tail frame
// reflected around the final sample. The frame transform is a
// rectangular-window exact DFT: a constant frame then puts all its energy in
// bin 0, where every mel triangle has zero weight, so the log-mel vector is
// flat and DCT coefficients 1..n-1 vanish. Zero padding or a padded
// power-of-two FFT would smear that and break the identity.
FeatureSequence Mfcc(const audio::Waveform &w, const MfccOptions &opts = {});

constexpr int64_t kMfccFrame = 400;
constexpr int64_t kMfccHop = 320;

}  // namespace targets
}  // namespace fatlab

#endif  // FATLAB_TARGETS_MFCC_H_
