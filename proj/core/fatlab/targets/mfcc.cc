// fatlab/targets/mfcc.cc

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

#include "fatlab/targets/mfcc.h"

#include <cmath>
#include <numbers>
#include <vector>

#include "fatlab/util/check.h"

namespace fatlab {
namespace targets {

namespace {

double HzToMel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
double MelToHz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

// Triangular mel bank over DFT bins 0..frame/2, bin k at k*sr/frame Hz.
// Filter edges span [0, nyquist]; the bin-0 (DC) weight of every triangle is
// zero because the first edge sits at 0 Hz.
std::vector<std::vector<double>> MelBank(int n_mels, int64_t frame, int sample_rate) {
  int64_t bins = frame / 2 + 1;
  double nyquist = sample_rate / 2.0;
  double mel_max = HzToMel(nyquist);
  std::vector<double> edges(static_cast<size_t>(n_mels) + 2);
  for (size_t i = 0; i < edges.size(); ++i) {
    edges[i] = MelToHz(mel_max * static_cast<double>(i) / static_cast<double>(n_mels + 1));
  }
  std::vector<std::vector<double>> bank(static_cast<size_t>(n_mels),
                                        std::vector<double>(static_cast<size_t>(bins), 0.0));
  for (int m = 0; m < n_mels; ++m) {
    double lo = edges[static_cast<size_t>(m)];
    double mid = edges[static_cast<size_t>(m) + 1];
    double hi = edges[static_cast<size_t>(m) + 2];
    for (int64_t b = 0; b < bins; ++b) {
      double hz = static_cast<double>(b) * sample_rate / static_cast<double>(frame);
      double w = 0.0;
      if (hz > lo && hz < mid) {
        w = (hz - lo) / (mid - lo);
      } else if (hz >= mid && hz < hi) {
        w = (hi - hz) / (hi - mid);
      }
      bank[static_cast<size_t>(m)][static_cast<size_t>(b)] = w;
    }
  }
  return bank;
}

}  // namespace

FeatureSequence Mfcc(const audio::Waveform &w, const MfccOptions &opts) {
  FATLAB_CHECK(w.sample_rate == 16000) << "(mfcc expects 16 kHz, got " << w.sample_rate << ")";
  FATLAB_CHECK(opts.n_coeffs >= 1 && opts.n_coeffs <= opts.n_mels)
      << "(mfcc n_coeffs " << opts.n_coeffs << " vs n_mels " << opts.n_mels << ")";
  int64_t len = w.size();
  if (len < kMfccFrame) {
    FATLAB_ERR << "mfcc: utterance of " << len << " samples is shorter than one frame ("
               << kMfccFrame << ")";
  }
  int64_t frames = (len + kMfccHop - 1) / kMfccHop;
  int64_t bins = kMfccFrame / 2 + 1;

  const std::vector<std::vector<double>> bank = MelBank(opts.n_mels, kMfccFrame, 16000);

  // Exact DFT twiddles for the 400-sample frame, shared across calls.
  struct Twiddles {
    std::vector<double> cos_tab, sin_tab;
    Twiddles() {
      int64_t bins = kMfccFrame / 2 + 1;
      cos_tab.resize(static_cast<size_t>(bins * kMfccFrame));
      sin_tab.resize(static_cast<size_t>(bins * kMfccFrame));
      for (int64_t k = 0; k < bins; ++k) {
        for (int64_t t = 0; t < kMfccFrame; ++t) {
          double ang = -2.0 * std::numbers::pi * static_cast<double>(k * t) /
                       static_cast<double>(kMfccFrame);
          cos_tab[static_cast<size_t>(k * kMfccFrame + t)] = std::cos(ang);
          sin_tab[static_cast<size_t>(k * kMfccFrame + t)] = std::sin(ang);
        }
      }
    }
  };
  static const Twiddles tw;
  const std::vector<double> &cos_tab = tw.cos_tab;
  const std::vector<double> &sin_tab = tw.sin_tab;

  numerics::Tensor out({frames, static_cast<int64_t>(opts.n_coeffs)});
  std::vector<double> frame_buf(static_cast<size_t>(kMfccFrame));
  std::vector<double> power(static_cast<size_t>(bins));
  std::vector<double> logmel(static_cast<size_t>(opts.n_mels));
  double dct0 = std::sqrt(1.0 / opts.n_mels);
  double dctk = std::sqrt(2.0 / opts.n_mels);
  for (int64_t m = 0; m < frames; ++m) {
    int64_t start = m * kMfccHop;
    // The hop is shorter than the frame, so the last frame always overruns
    // the end of the signal. Reflect around the final sample instead of
    // zero-padding: zeros would put a step edge into the tail frame and a
    // constant signal would stop producing a flat spectrum there.
    for (int64_t t = 0; t < kMfccFrame; ++t) {
      int64_t idx = start + t;
      if (idx >= len) idx = 2 * len - 1 - idx;
      frame_buf[static_cast<size_t>(t)] = w.samples[static_cast<size_t>(idx)];
    }
    for (int64_t k = 0; k < bins; ++k) {
      double re = 0.0, im = 0.0;
      const double *ct = cos_tab.data() + k * kMfccFrame;
      const double *st = sin_tab.data() + k * kMfccFrame;
      for (int64_t t = 0; t < kMfccFrame; ++t) {
        re += frame_buf[static_cast<size_t>(t)] * ct[t];
        im += frame_buf[static_cast<size_t>(t)] * st[t];
      }
      power[static_cast<size_t>(k)] = re * re + im * im;
    }
    for (int mel = 0; mel < opts.n_mels; ++mel) {
      double acc = 0.0;
      const auto &filt = bank[static_cast<size_t>(mel)];
      for (int64_t k = 0; k < bins; ++k) acc += filt[static_cast<size_t>(k)] * power[static_cast<size_t>(k)];
      logmel[static_cast<size_t>(mel)] = std::log(std::max(acc, 1e-10));
    }
    for (int c = 0; c < opts.n_coeffs; ++c) {
      double acc = 0.0;
      for (int mel = 0; mel < opts.n_mels; ++mel) {
        acc += logmel[static_cast<size_t>(mel)] *
               std::cos(std::numbers::pi * c * (2.0 * mel + 1.0) / (2.0 * opts.n_mels));
      }
      out.at2(m, c) = (c == 0 ? dct0 : dctk) * acc;
    }
  }

  if (opts.normalize) {
    for (int c = 0; c < opts.n_coeffs; ++c) {
      double mean = 0.0;
      for (int64_t m = 0; m < frames; ++m) mean += out.at2(m, c);
      mean /= static_cast<double>(frames);
      double var = 0.0;
      for (int64_t m = 0; m < frames; ++m) {
        double d = out.at2(m, c) - mean;
        var += d * d;
      }
      var /= static_cast<double>(frames);
      double inv = 1.0 / std::max(std::sqrt(var), 1e-10);
      for (int64_t m = 0; m < frames; ++m) out.at2(m, c) = (out.at2(m, c) - mean) * inv;
    }
  }

  FeatureSequence seq;
  seq.feats = std::move(out);
  seq.frame_rate_hz = 16000.0 / static_cast<double>(kMfccHop);
  return seq;
}

}  // namespace targets
}  // namespace fatlab
