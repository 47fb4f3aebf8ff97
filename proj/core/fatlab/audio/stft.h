// fatlab/audio/stft.h

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

#ifndef FATLAB_AUDIO_STFT_H_
#define FATLAB_AUDIO_STFT_H_

#include <complex>
#include <cstdint>
#include <vector>

#include "fatlab/audio/wav.h"

namespace fatlab {
namespace audio {

enum class Window { kHann, kRect };

struct Spectrogram {
  int64_t frames = 0;
  int64_t bins = 0;  // frame_length / 2 + 1
  std::vector<std::complex<double>> data;  // row-major frames x bins
  int64_t frame_length = 0;
  int64_t hop = 0;
  Window window = Window::kHann;
  bool centered = true;
  int64_t num_samples = 0;  // original waveform length, for exact inversion
  int sample_rate = 16000;

  std::complex<double> &at(int64_t f, int64_t b) {
    return data[static_cast<size_t>(f * bins + b)];
  }
  const std::complex<double> &at(int64_t f, int64_t b) const {
    return data[static_cast<size_t>(f * bins + b)];
  }
};

// In-place radix-2 FFT (and inverse). Length must be a power of two.
void Fft(std::vector<std::complex<double>> *x, bool inverse);

// Centered analysis pads frame_length/2 zeros on both sides, giving
// ceil(len/hop) frames whose m-th frame is centered on sample m*hop.
// Uncentered analysis tiles [m*hop, m*hop + frame) over the signal and is
// what the full-frame energy identities in the tests use.
Spectrogram Stft(const Waveform &w, int64_t frame_length, int64_t hop, Window window,
                 bool center = true);

// Weighted overlap-add inverse with window-square normalization (denominator
// floored at 1e-10). Exact to fp rounding wherever analysis windows overlap
// enough, e.g. hann with hop = frame/2.
Waveform Istft(const Spectrogram &spec);

std::vector<double> MakeWindow(Window window, int64_t frame_length);

}  // namespace audio
}  // namespace fatlab

#endif  // FATLAB_AUDIO_STFT_H_
