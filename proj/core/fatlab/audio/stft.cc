// fatlab/audio/stft.cc

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

#include "fatlab/audio/stft.h"

#include <cmath>
#include <numbers>

#include "fatlab/util/check.h"

namespace fatlab {
namespace audio {

namespace {

bool IsPowerOfTwo(int64_t n) { return n > 0 && (n & (n - 1)) == 0; }

}  // namespace

void Fft(std::vector<std::complex<double>> *x, bool inverse) {
  auto &a = *x;
  int64_t n = static_cast<int64_t>(a.size());
  FATLAB_CHECK(IsPowerOfTwo(n)) << "(fft length " << n << " is not a power of two)";
  // Bit-reversal permutation.
  for (int64_t i = 1, j = 0; i < n; ++i) {
    int64_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[static_cast<size_t>(i)], a[static_cast<size_t>(j)]);
  }
  for (int64_t len = 2; len <= n; len <<= 1) {
    double ang = 2.0 * std::numbers::pi / static_cast<double>(len) * (inverse ? 1.0 : -1.0);
    std::complex<double> wlen(std::cos(ang), std::sin(ang));
    for (int64_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (int64_t j = 0; j < len / 2; ++j) {
        std::complex<double> u = a[static_cast<size_t>(i + j)];
        std::complex<double> v = a[static_cast<size_t>(i + j + len / 2)] * w;
        a[static_cast<size_t>(i + j)] = u + v;
        a[static_cast<size_t>(i + j + len / 2)] = u - v;
        w *= wlen;
      }
    }
  }
  if (inverse) {
    double inv = 1.0 / static_cast<double>(n);
    for (auto &v : a) v *= inv;
  }
}

std::vector<double> MakeWindow(Window window, int64_t frame_length) {
  std::vector<double> w(static_cast<size_t>(frame_length), 1.0);
  if (window == Window::kHann) {
    for (int64_t i = 0; i < frame_length; ++i) {
      w[static_cast<size_t>(i)] =
          0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                static_cast<double>(frame_length)));
    }
  }
  return w;
}

Spectrogram Stft(const Waveform &w, int64_t frame_length, int64_t hop, Window window,
                 bool center) {
  FATLAB_CHECK(!w.samples.empty()) << "(stft of empty waveform)";
  FATLAB_CHECK(IsPowerOfTwo(frame_length))
      << "(stft frame length " << frame_length << " must be a power of two)";
  if (hop > frame_length || hop < 1) {
    FATLAB_ERR << "stft: hop " << hop << " must be in [1, frame=" << frame_length << "]";
  }
  int64_t len = w.size();
  int64_t frames;
  if (center) {
    frames = (len + hop - 1) / hop;
  } else {
    FATLAB_CHECK(len >= frame_length)
        << "(stft uncentered needs len >= frame, got " << len << " < " << frame_length << ")";
    frames = (len - frame_length) / hop + 1;
  }

  Spectrogram spec;
  spec.frames = frames;
  spec.bins = frame_length / 2 + 1;
  spec.frame_length = frame_length;
  spec.hop = hop;
  spec.window = window;
  spec.centered = center;
  spec.num_samples = len;
  spec.sample_rate = w.sample_rate;
  spec.data.assign(static_cast<size_t>(frames * spec.bins), {0.0, 0.0});

  std::vector<double> win = MakeWindow(window, frame_length);
  std::vector<std::complex<double>> buf(static_cast<size_t>(frame_length));
  int64_t shift = center ? frame_length / 2 : 0;
  for (int64_t m = 0; m < frames; ++m) {
    int64_t start = m * hop - shift;
    for (int64_t i = 0; i < frame_length; ++i) {
      int64_t t = start + i;
      double s = (t >= 0 && t < len) ? w.samples[static_cast<size_t>(t)] : 0.0;
      buf[static_cast<size_t>(i)] = {s * win[static_cast<size_t>(i)], 0.0};
    }
    Fft(&buf, false);
    for (int64_t b = 0; b < spec.bins; ++b) spec.at(m, b) = buf[static_cast<size_t>(b)];
  }
  return spec;
}

Waveform Istft(const Spectrogram &spec) {
  FATLAB_CHECK(spec.frames > 0 && spec.bins == spec.frame_length / 2 + 1)
      << "(istft of malformed spectrogram: " << spec.frames << "x" << spec.bins << ")";
  int64_t frame = spec.frame_length;
  int64_t hop = spec.hop;
  int64_t shift = spec.centered ? frame / 2 : 0;
  int64_t buf_len = (spec.frames - 1) * hop + frame;

  std::vector<double> acc(static_cast<size_t>(buf_len), 0.0);
  std::vector<double> norm(static_cast<size_t>(buf_len), 0.0);
  std::vector<double> win = MakeWindow(spec.window, frame);
  std::vector<std::complex<double>> buf(static_cast<size_t>(frame));

  for (int64_t m = 0; m < spec.frames; ++m) {
    for (int64_t b = 0; b < spec.bins; ++b) buf[static_cast<size_t>(b)] = spec.at(m, b);
    for (int64_t b = spec.bins; b < frame; ++b) {
      buf[static_cast<size_t>(b)] = std::conj(spec.at(m, frame - b));
    }
    Fft(&buf, true);
    int64_t base = m * hop;
    for (int64_t i = 0; i < frame; ++i) {
      double wv = win[static_cast<size_t>(i)];
      acc[static_cast<size_t>(base + i)] += wv * buf[static_cast<size_t>(i)].real();
      norm[static_cast<size_t>(base + i)] += wv * wv;
    }
  }

  Waveform out;
  out.sample_rate = spec.sample_rate;
  out.samples.resize(static_cast<size_t>(spec.num_samples));
  for (int64_t t = 0; t < spec.num_samples; ++t) {
    int64_t i = t + shift;
    double d = i < buf_len ? norm[static_cast<size_t>(i)] : 0.0;
    double v = i < buf_len ? acc[static_cast<size_t>(i)] : 0.0;
    out.samples[static_cast<size_t>(t)] = v / std::max(d, 1e-10);
  }
  return out;
}

}  // namespace audio
}  // namespace fatlab
