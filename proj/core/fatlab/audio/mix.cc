// fatlab/audio/mix.cc

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

#include "fatlab/audio/mix.h"

#include <cmath>

#include "fatlab/util/check.h"

namespace fatlab {
namespace audio {

MixResult MixAtSnr(const Waveform &clean, const Waveform &noise, double snr_db,
                   int64_t noise_offset) {
  FATLAB_CHECK(!clean.samples.empty() && !noise.samples.empty()) << "(mix of empty waveform)";
  if (clean.sample_rate != noise.sample_rate) {
    FATLAB_ERR << "mix: sample rate mismatch: clean " << clean.sample_rate << " vs noise "
               << noise.sample_rate;
  }
  int64_t n = clean.size();
  int64_t noise_len = noise.size();
  FATLAB_CHECK(noise_offset >= 0) << "(mix noise offset " << noise_offset << ")";

  double p_clean = MeanSquare(clean);
  if (p_clean <= 0.0) {
    FATLAB_ERR << "mix: clean signal is silent";
  }
  double p_noise = 0.0;
  for (int64_t i = 0; i < n; ++i) {
    double v = noise.samples[static_cast<size_t>((noise_offset + i) % noise_len)];
    p_noise += v * v;
  }
  p_noise /= static_cast<double>(n);
  if (p_noise <= 0.0) {
    FATLAB_ERR << "mix: noise is silent over the overlapped region";
  }

  MixResult res;
  res.gain = std::sqrt(p_clean / (p_noise * std::pow(10.0, snr_db / 10.0)));
  res.noisy.sample_rate = clean.sample_rate;
  res.noisy.samples.resize(static_cast<size_t>(n));
  double peak = 0.0;
  for (int64_t i = 0; i < n; ++i) {
    double v = clean.samples[static_cast<size_t>(i)] +
               res.gain * noise.samples[static_cast<size_t>((noise_offset + i) % noise_len)];
    res.noisy.samples[static_cast<size_t>(i)] = v;
    peak = std::max(peak, std::fabs(v));
  }
  if (peak > 1.0) {
    res.rescale = 0.99 / peak;
    for (double &v : res.noisy.samples) v *= res.rescale;
  }
  return res;
}

}  // namespace audio
}  // namespace fatlab
