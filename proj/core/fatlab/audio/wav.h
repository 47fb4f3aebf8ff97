// fatlab/audio/wav.h

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

#ifndef FATLAB_AUDIO_WAV_H_
#define FATLAB_AUDIO_WAV_H_

#include <string>
#include <vector>

namespace fatlab {
namespace audio {

struct Waveform {
  std::vector<double> samples;
  int sample_rate = 16000;

  int64_t size() const { return static_cast<int64_t>(samples.size()); }
  double duration_s() const { return static_cast<double>(samples.size()) / sample_rate; }
};

// PCM16 mono RIFF/WAVE only. Samples are scaled by 1/32768 so the int16 range
// maps into [-1, 1). Anything else (float wav, stereo, truncated chunks)
// raises fatlab::Error with the offending detail.
Waveform LoadWav(const std::string &path);

// Round-to-nearest inverse of LoadWav; values are clamped to int16 range.
void SaveWav(const std::string &path, const Waveform &w);

double MeanSquare(const Waveform &w);
double PeakAbs(const Waveform &w);

}  // namespace audio
}  // namespace fatlab

#endif  // FATLAB_AUDIO_WAV_H_
