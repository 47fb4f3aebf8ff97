// fatlab/tests/test_audio_core.cc

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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <complex>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "fatlab/audio/manifest.h"
#include "fatlab/audio/mix.h"
#include "fatlab/audio/stft.h"
#include "fatlab/audio/synth.h"
#include "fatlab/audio/wav.h"
#include "fatlab/numerics/rng.h"
#include "fatlab/util/check.h"

using namespace fatlab::audio;
using fatlab::numerics::Rng;

namespace {

namespace fs = std::filesystem;

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string &tag) {
    path = fs::temp_directory_path() / ("fatlab_" + tag);
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string str() const { return path.string(); }
};

Waveform RandomWave(Rng *rng, int64_t n, double amp = 0.4) {
  Waveform w;
  w.samples.resize(static_cast<size_t>(n));
  for (auto &s : w.samples) s = amp * (2.0 * rng->Uniform() - 1.0);
  return w;
}

std::string ReadFileBytes(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

// Naive DFT used as the spectral oracle; no shared code with the FFT.
std::vector<std::complex<double>> NaiveDft(const std::vector<double> &x) {
  size_t n = x.size();
  std::vector<std::complex<double>> out(n);
  for (size_t k = 0; k < n; ++k) {
    std::complex<double> acc(0.0, 0.0);
    for (size_t t = 0; t < n; ++t) {
      double ang = -2.0 * std::numbers::pi * static_cast<double>(k * t) / static_cast<double>(n);
      acc += x[t] * std::complex<double>(std::cos(ang), std::sin(ang));
    }
    out[k] = acc;
  }
  return out;
}

}  // namespace

TEST_CASE("wav scaling matches the int16 convention") {
  TempDir dir("wav_scale");
  std::string path = (dir.path / "a.wav").string();
  Waveform w;
  w.samples = {0.5, -1.0, 0.25, 0.0};
  SaveWav(path, w);
  Waveform r = LoadWav(path);
  REQUIRE(r.size() == 4);
  CHECK(r.samples[0] == 16384.0 / 32768.0);
  CHECK(r.samples[1] == -1.0);
  CHECK(r.samples[2] == 8192.0 / 32768.0);
  CHECK(r.samples[3] == 0.0);
  CHECK(r.sample_rate == 16000);
}

TEST_CASE("wav round trip is byte identical") {
  TempDir dir("wav_rt");
  Rng rng = Rng::Derive(3, Rng::kTest, 20);
  Waveform w = RandomWave(&rng, 4321);
  std::string p1 = (dir.path / "one.wav").string();
  std::string p2 = (dir.path / "two.wav").string();
  SaveWav(p1, w);
  Waveform r = LoadWav(p1);
  SaveWav(p2, r);
  CHECK(ReadFileBytes(p1) == ReadFileBytes(p2));
}

TEST_CASE("wav rejects malformed input") {
  TempDir dir("wav_bad");
  std::string path = (dir.path / "bad.wav").string();

  {
    std::ofstream out(path, std::ios::binary);
    out << "RIFFxxxxWAVE";
  }
  CHECK_THROWS_AS(LoadWav(path), fatlab::Error);

  // A stereo header: patch the channel count of a valid file.
  std::string good = (dir.path / "good.wav").string();
  Waveform w;
  w.samples = {0.1, 0.2, 0.3, 0.4};
  SaveWav(good, w);
  std::string bytes = ReadFileBytes(good);
  bytes[22] = 2;
  {
    std::ofstream out(path, std::ios::binary);
    out << bytes;
  }
  CHECK_THROWS_AS(LoadWav(path), fatlab::Error);

  // Float format tag.
  bytes = ReadFileBytes(good);
  bytes[20] = 3;
  {
    std::ofstream out(path, std::ios::binary);
    out << bytes;
  }
  CHECK_THROWS_AS(LoadWav(path), fatlab::Error);

  // Truncated data chunk.
  bytes = ReadFileBytes(good);
  bytes.resize(bytes.size() - 3);
  {
    std::ofstream out(path, std::ios::binary);
    out << bytes;
  }
  CHECK_THROWS_AS(LoadWav(path), fatlab::Error);

  CHECK_THROWS_AS(LoadWav((dir.path / "missing.wav").string()), fatlab::Error);
}

TEST_CASE("fft agrees with the naive dft") {
  Rng rng = Rng::Derive(3, Rng::kTest, 21);
  for (int64_t n : {8, 64, 512}) {
    std::vector<double> x(static_cast<size_t>(n));
    for (auto &v : x) v = rng.Gaussian();
    std::vector<std::complex<double>> buf(x.size());
    for (size_t i = 0; i < x.size(); ++i) buf[i] = {x[i], 0.0};
    Fft(&buf, false);
    auto want = NaiveDft(x);
    for (size_t k = 0; k < x.size(); ++k) {
      CHECK(std::abs(buf[k] - want[k]) < 1e-8);
    }
    Fft(&buf, true);
    for (size_t i = 0; i < x.size(); ++i) {
      CHECK(std::fabs(buf[i].real() - x[i]) < 1e-10);
      CHECK(std::fabs(buf[i].imag()) < 1e-10);
    }
  }
}

TEST_CASE("stft of a constant signal concentrates in bin zero") {
  Waveform w;
  w.samples.assign(512, 0.7);
  Spectrogram s = Stft(w, 512, 512, Window::kRect, /*center=*/false);
  REQUIRE(s.frames == 1);
  REQUIRE(s.bins == 257);
  CHECK(std::abs(s.at(0, 0)) == doctest::Approx(0.7 * 512).epsilon(1e-12));
  for (int64_t b = 1; b < s.bins; ++b) {
    CHECK(std::abs(s.at(0, b)) < 1e-9);
  }
}

TEST_CASE("stft frame count and hop validation") {
  Waveform w;
  w.samples.assign(1000, 0.1);
  Spectrogram s = Stft(w, 512, 128, Window::kHann);
  CHECK(s.frames == (1000 + 127) / 128);
  CHECK(s.num_samples == 1000);
  CHECK_THROWS_AS(Stft(w, 512, 513, Window::kHann), fatlab::Error);
  CHECK_THROWS_AS(Stft(w, 500, 100, Window::kHann), fatlab::Error);
}

TEST_CASE("istft inverts stft below 1e-9") {
  Rng rng = Rng::Derive(3, Rng::kTest, 22);
  for (int64_t len : {5000, 8192, 12345}) {
    Waveform w = RandomWave(&rng, len);
    for (int64_t hop : {256, 128}) {
      Spectrogram s = Stft(w, 512, hop, Window::kHann);
      Waveform r = Istft(s);
      REQUIRE(r.size() == w.size());
      double max_err = 0.0;
      for (int64_t i = 0; i < len; ++i) {
        max_err = std::max(max_err, std::fabs(r.samples[static_cast<size_t>(i)] -
                                              w.samples[static_cast<size_t>(i)]));
      }
      CHECK(max_err < 1e-9);
    }
  }
}

TEST_CASE("sinusoid at an exact bin concentrates its energy there") {
  const int64_t frame = 512;
  const int64_t k = 37;
  Waveform w;
  w.sample_rate = 16000;
  w.samples.resize(2048);
  for (size_t i = 0; i < w.samples.size(); ++i) {
    w.samples[i] = 0.5 * std::sin(2.0 * std::numbers::pi * static_cast<double>(k) *
                                  static_cast<double>(i) / static_cast<double>(frame));
  }
  Spectrogram s = Stft(w, frame, frame, Window::kRect, /*center=*/false);
  for (int64_t m = 0; m < s.frames; ++m) {
    double total = 0.0;
    for (int64_t b = 0; b < s.bins; ++b) {
      double mag2 = std::norm(s.at(m, b));
      double weight = (b == 0 || b == frame / 2) ? 1.0 : 2.0;
      total += weight * mag2;
    }
    double at_k = 2.0 * std::norm(s.at(m, k));
    CHECK(at_k / total >= 0.99);
  }
}

TEST_CASE("stft is linear") {
  Rng rng = Rng::Derive(3, Rng::kTest, 23);
  Waveform x = RandomWave(&rng, 3000);
  Waveform y = RandomWave(&rng, 3000);
  double a = 1.7, b = -0.6;
  Waveform z;
  z.samples.resize(x.samples.size());
  for (size_t i = 0; i < z.samples.size(); ++i) {
    z.samples[i] = a * x.samples[i] + b * y.samples[i];
  }
  Spectrogram sx = Stft(x, 256, 64, Window::kHann);
  Spectrogram sy = Stft(y, 256, 64, Window::kHann);
  Spectrogram sz = Stft(z, 256, 64, Window::kHann);
  for (size_t i = 0; i < sz.data.size(); ++i) {
    CHECK(std::abs(sz.data[i] - (a * sx.data[i] + b * sy.data[i])) < 1e-10);
  }
}

TEST_CASE("parseval holds per rect full frame") {
  Rng rng = Rng::Derive(3, Rng::kTest, 24);
  const int64_t frame = 256;
  Waveform w = RandomWave(&rng, frame * 4);
  Spectrogram s = Stft(w, frame, frame, Window::kRect, /*center=*/false);
  REQUIRE(s.frames == 4);
  for (int64_t m = 0; m < 4; ++m) {
    double time_energy = 0.0;
    for (int64_t i = 0; i < frame; ++i) {
      double v = w.samples[static_cast<size_t>(m * frame + i)];
      time_energy += v * v;
    }
    double spec_energy = 0.0;
    for (int64_t b = 0; b < s.bins; ++b) {
      double weight = (b == 0 || b == frame / 2) ? 1.0 : 2.0;
      spec_energy += weight * std::norm(s.at(m, b));
    }
    CHECK(std::fabs(time_energy - spec_energy / static_cast<double>(frame)) < 1e-8);
  }
}

TEST_CASE("mix gains match closed forms at equal power") {
  // Constant-magnitude signals have exactly equal power.
  Waveform clean, noise;
  clean.samples.assign(1000, 0.3);
  noise.samples.assign(1000, 0.0);
  for (size_t i = 0; i < noise.samples.size(); ++i) {
    noise.samples[i] = (i % 2 == 0) ? 0.3 : -0.3;
  }
  MixResult at0 = MixAtSnr(clean, noise, 0.0);
  CHECK(at0.gain == doctest::Approx(1.0).epsilon(1e-12));
  MixResult at10 = MixAtSnr(clean, noise, 10.0);
  CHECK(at10.gain == doctest::Approx(std::pow(10.0, -0.5)).epsilon(1e-12));
}

TEST_CASE("mix achieves requested snr within 0.01 dB") {
  Rng rng = Rng::Derive(3, Rng::kTest, 25);
  for (int trial = 0; trial < 1000; ++trial) {
    int64_t clean_len = 500 + rng.UniformInt(1500);
    int64_t noise_len = 300 + rng.UniformInt(2000);
    Waveform clean = RandomWave(&rng, clean_len, 0.25);
    Waveform noise = RandomWave(&rng, noise_len, 0.25);
    double snr = rng.Uniform(-10.0, 20.0);
    int64_t offset = rng.UniformInt(noise_len);
    MixResult res = MixAtSnr(clean, noise, snr, offset);

    // Measure from the two addends directly.
    double p_clean = 0.0, p_noise = 0.0;
    for (int64_t i = 0; i < clean_len; ++i) {
      double c = clean.samples[static_cast<size_t>(i)];
      double v = res.gain * noise.samples[static_cast<size_t>((offset + i) % noise_len)];
      p_clean += c * c;
      p_noise += v * v;
    }
    double measured = 10.0 * std::log10(p_clean / p_noise);
    CHECK(std::fabs(measured - snr) < 0.01);
    // Rescaling never breaks the ratio, and output stays in range.
    CHECK(PeakAbs(res.noisy) <= 1.0);
  }
}

TEST_CASE("mix rejects silent inputs and mismatched rates") {
  Waveform clean, noise;
  clean.samples.assign(100, 0.0);
  noise.samples.assign(100, 0.1);
  CHECK_THROWS_AS(MixAtSnr(clean, noise, 5.0), fatlab::Error);
  clean.samples.assign(100, 0.1);
  noise.samples.assign(100, 0.0);
  CHECK_THROWS_AS(MixAtSnr(clean, noise, 5.0), fatlab::Error);
  noise.samples.assign(100, 0.1);
  noise.sample_rate = 8000;
  CHECK_THROWS_AS(MixAtSnr(clean, noise, 5.0), fatlab::Error);
}

TEST_CASE("mix clipping rescales the whole mixture and reports the factor") {
  Waveform clean, noise;
  clean.samples.assign(800, 0.0);
  noise.samples.assign(800, 0.0);
  for (size_t i = 0; i < 800; ++i) {
    clean.samples[i] = 0.9 * std::sin(0.01 * static_cast<double>(i));
    noise.samples[i] = (i % 2 == 0) ? 0.9 : -0.9;
  }
  MixResult res = MixAtSnr(clean, noise, -5.0);
  CHECK(res.rescale < 1.0);
  CHECK(PeakAbs(res.noisy) == doctest::Approx(0.99).epsilon(1e-9));
}

TEST_CASE("manifest io round trips entries") {
  TempDir dir("manifest");
  std::string path = (dir.path / "m.jsonl").string();
  std::vector<ManifestEntry> entries(2);
  entries[0].id = "u0";
  entries[0].audio = "wav/u0.wav";
  entries[0].transcript = "s1 s2";
  entries[1].id = "u1";
  entries[1].audio = "wav/u1.wav";
  entries[1].snr_db = 7.25;
  entries[1].noise_id = "white_train_0";
  entries[1].rescale = 0.75;
  WriteManifest(path, entries);
  auto got = ReadManifest(path);
  REQUIRE(got.size() == 2);
  CHECK(got[0].id == "u0");
  CHECK(got[0].transcript == "s1 s2");
  CHECK(!got[0].has_snr());
  CHECK(got[0].rescale == 1.0);
  CHECK(got[1].snr_db == 7.25);
  CHECK(got[1].noise_id == "white_train_0");
  CHECK(got[1].rescale == 0.75);
  CHECK(ResolveAudioPath(path, got[0].audio) == (dir.path / "wav/u0.wav").string());

  std::ofstream bad(path, std::ios::app);
  bad << "{not json}\n";
  bad.close();
  CHECK_THROWS_AS(ReadManifest(path), fatlab::Error);
}

TEST_CASE("corpus synthesis is deterministic and well formed") {
  SynthConfig cfg;
  cfg.seed = 11;
  cfg.train_utts = 4;
  cfg.test_utts = 2;
  cfg.noises_per_type_train = 1;
  cfg.noises_per_type_test = 1;
  TempDir d1("corpus_a"), d2("corpus_b");
  CorpusPaths p1 = SynthesizeCorpus(d1.str(), cfg);
  CorpusPaths p2 = SynthesizeCorpus(d2.str(), cfg);

  CHECK(ReadFileBytes(p1.train_clean) == ReadFileBytes(p2.train_clean));
  CHECK(ReadFileBytes(p1.noise_train) == ReadFileBytes(p2.noise_train));
  auto train = ReadManifest(p1.train_clean);
  REQUIRE(train.size() == 4);
  for (const auto &e : train) {
    std::string wav_a = ResolveAudioPath(p1.train_clean, e.audio);
    std::string wav_b = ResolveAudioPath(p2.train_clean, e.audio);
    CHECK(ReadFileBytes(wav_a) == ReadFileBytes(wav_b));
    Waveform w = LoadWav(wav_a);
    CHECK(w.size() % 320 == 0);
    CHECK(!e.transcript.empty());
    // Token count in the configured range.
    int tokens = 1;
    for (char c : e.transcript) tokens += c == ' ' ? 1 : 0;
    CHECK(tokens >= cfg.min_symbols);
    CHECK(tokens <= cfg.max_symbols);
  }
  auto noise = ReadManifest(p1.noise_train);
  REQUIRE(noise.size() == 3);
  for (const auto &e : noise) {
    Waveform w = LoadWav(ResolveAudioPath(p1.noise_train, e.audio));
    CHECK(w.size() == cfg.noise_samples);
    CHECK(MeanSquare(w) > 0.0);
  }
}

TEST_CASE("different symbols have disjoint spectra") {
  SynthConfig cfg;
  Waveform a = MakeSymbol(0, cfg);
  Waveform b = MakeSymbol(9, cfg);
  // Fundamental bins at 180 Hz vs 540 Hz with frame 512 at 16 kHz.
  Spectrogram sa = Stft(a, 512, 512, Window::kHann, false);
  Spectrogram sb = Stft(b, 512, 512, Window::kHann, false);
  int64_t peak_a = 0, peak_b = 0;
  for (int64_t bin = 1; bin < sa.bins; ++bin) {
    if (std::norm(sa.at(1, bin)) > std::norm(sa.at(1, peak_a))) peak_a = bin;
    if (std::norm(sb.at(1, bin)) > std::norm(sb.at(1, peak_b))) peak_b = bin;
  }
  CHECK(peak_a != peak_b);
}

TEST_CASE("dataset simulation draws in range and reproduces bitwise") {
  SynthConfig cfg;
  cfg.seed = 5;
  cfg.train_utts = 6;
  cfg.test_utts = 2;
  cfg.min_symbols = 2;
  cfg.max_symbols = 3;
  cfg.noises_per_type_train = 1;
  cfg.noises_per_type_test = 1;
  TempDir dir("simulate");
  CorpusPaths paths = SynthesizeCorpus(dir.str(), cfg);

  SimulateConfig sim;
  sim.snr_low_db = 5.0;
  sim.snr_high_db = 10.0;
  sim.seed = 21;
  std::string out_a = (dir.path / "noisy_a").string();
  std::string out_b = (dir.path / "noisy_b").string();
  std::string man_a = (dir.path / "noisy_a.jsonl").string();
  std::string man_b = (dir.path / "noisy_b.jsonl").string();
  SimulateSummary sum = SimulateDataset(paths.train_clean, paths.noise_train, out_a, man_a, sim);
  CHECK(sum.written == 6);
  CHECK(sum.skipped == 0);
  SimulateDataset(paths.train_clean, paths.noise_train, out_b, man_b, sim);

  auto ents_a = ReadManifest(man_a);
  auto ents_b = ReadManifest(man_b);
  REQUIRE(ents_a.size() == 6);
  for (size_t i = 0; i < ents_a.size(); ++i) {
    CHECK(ents_a[i].snr_db >= 5.0);
    CHECK(ents_a[i].snr_db <= 10.0);
    CHECK(!ents_a[i].noise_id.empty());
    CHECK(ReadFileBytes(ResolveAudioPath(man_a, ents_a[i].audio)) ==
          ReadFileBytes(ResolveAudioPath(man_b, ents_b[i].audio)));
  }

  // A missing clean file is skipped with a warning, not fatal.
  fs::remove(ResolveAudioPath(paths.train_clean, ReadManifest(paths.train_clean)[2].audio));
  std::string out_c = (dir.path / "noisy_c").string();
  std::string man_c = (dir.path / "noisy_c.jsonl").string();
  SimulateSummary sum_c =
      SimulateDataset(paths.train_clean, paths.noise_train, out_c, man_c, sim);
  CHECK(sum_c.written == 5);
  CHECK(sum_c.skipped == 1);
  CHECK(ReadManifest(man_c).size() == 5);
}

TEST_CASE("simulated snr draws have the uniform mean") {
  SynthConfig cfg;
  cfg.seed = 6;
  cfg.train_utts = 1000;
  cfg.test_utts = 1;
  cfg.min_symbols = 1;
  cfg.max_symbols = 1;
  cfg.noises_per_type_train = 1;
  cfg.noises_per_type_test = 1;
  cfg.noise_samples = 8000;
  TempDir dir("simulate_mc");
  CorpusPaths paths = SynthesizeCorpus(dir.str(), cfg);
  SimulateConfig sim;
  sim.snr_low_db = 0.0;
  sim.snr_high_db = 5.0;
  sim.seed = 99;
  std::string out = (dir.path / "noisy").string();
  std::string man = (dir.path / "noisy.jsonl").string();
  SimulateDataset(paths.train_clean, paths.noise_train, out, man, sim);
  auto entries = ReadManifest(man);
  REQUIRE(entries.size() == 1000);
  double mean = 0.0;
  for (const auto &e : entries) mean += e.snr_db;
  mean /= static_cast<double>(entries.size());
  CHECK(std::fabs(mean - 2.5) < 5.0 * 0.05);
}
