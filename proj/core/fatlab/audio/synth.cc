// fatlab/audio/synth.cc

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

#include "fatlab/audio/synth.h"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numbers>

#include "fatlab/audio/manifest.h"
#include "fatlab/audio/mix.h"
#include "fatlab/numerics/rng.h"
#include "fatlab/util/check.h"
#include "fatlab/util/thread_pool.h"

namespace fatlab {
namespace audio {

namespace {

namespace fs = std::filesystem;
using numerics::Rng;

constexpr double kDitherAmp = 0.0031622776601683794;  // -50 dB
constexpr double kHarmonicAmps[3] = {1.0, 0.5, 0.25};
constexpr double kSymbolScale = 0.17;
constexpr int64_t kRampSamples = 160;

std::string UttId(int split, int64_t index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s_%04lld", split == 0 ? "train" : "test",
                static_cast<long long>(index));
  return buf;
}

}  // namespace

const char *const kNoiseTypeNames[3] = {"white", "lowpass", "pulsed"};

Waveform MakeSymbol(int symbol, const SynthConfig &cfg) {
  FATLAB_CHECK(symbol >= 0 && symbol < cfg.num_symbols)
      << "(symbol " << symbol << " of " << cfg.num_symbols << ")";
  Waveform w;
  w.sample_rate = cfg.sample_rate;
  w.samples.resize(static_cast<size_t>(cfg.symbol_samples));
  double f0 = 180.0 + 40.0 * symbol;
  for (int64_t i = 0; i < cfg.symbol_samples; ++i) {
    double t = static_cast<double>(i) / cfg.sample_rate;
    double v = 0.0;
    for (int h = 0; h < 3; ++h) {
      v += kHarmonicAmps[h] * std::sin(2.0 * std::numbers::pi * f0 * (h + 1) * t);
    }
    double env = 1.0;
    if (i < kRampSamples) {
      env = 0.5 * (1.0 - std::cos(std::numbers::pi * static_cast<double>(i) / kRampSamples));
    } else if (i >= cfg.symbol_samples - kRampSamples) {
      int64_t j = cfg.symbol_samples - 1 - i;
      env = 0.5 * (1.0 - std::cos(std::numbers::pi * static_cast<double>(j) / kRampSamples));
    }
    w.samples[static_cast<size_t>(i)] = kSymbolScale * env * v;
  }
  return w;
}

Waveform MakeUtterance(const SynthConfig &cfg, int split, int64_t index,
                       std::string *transcript) {
  FATLAB_CHECK(cfg.min_symbols >= 1 && cfg.min_symbols <= cfg.max_symbols)
      << "(utterance symbol count range " << cfg.min_symbols << ".." << cfg.max_symbols << ")";
  Rng rng = Rng::Derive(cfg.seed, Rng::kSynth, static_cast<uint64_t>(index),
                        static_cast<uint64_t>(split));
  int n_symbols =
      cfg.min_symbols + static_cast<int>(rng.UniformInt(cfg.max_symbols - cfg.min_symbols + 1));

  Waveform w;
  w.sample_rate = cfg.sample_rate;
  w.samples.assign(static_cast<size_t>(cfg.lead_silence), 0.0);
  transcript->clear();
  for (int k = 0; k < n_symbols; ++k) {
    int symbol = static_cast<int>(rng.UniformInt(cfg.num_symbols));
    Waveform unit = MakeSymbol(symbol, cfg);
    w.samples.insert(w.samples.end(), unit.samples.begin(), unit.samples.end());
    if (k > 0) transcript->push_back(' ');
    transcript->append("s");
    transcript->append(std::to_string(symbol));
  }
  w.samples.insert(w.samples.end(), static_cast<size_t>(cfg.lead_silence), 0.0);
  for (double &s : w.samples) {
    s += kDitherAmp * (2.0 * rng.Uniform() - 1.0);
  }
  return w;
}

Waveform MakeNoise(const SynthConfig &cfg, int type, int split, int64_t index) {
  FATLAB_CHECK(type >= 0 && type < 3) << "(noise type " << type << ")";
  Rng rng = Rng::Derive(cfg.seed, Rng::kSynth,
                        1000000ull + static_cast<uint64_t>(type) * 10000ull +
                            static_cast<uint64_t>(index),
                        static_cast<uint64_t>(split));
  Waveform w;
  w.sample_rate = cfg.sample_rate;
  w.samples.resize(static_cast<size_t>(cfg.noise_samples));
  switch (type) {
    case 0: {
      for (double &s : w.samples) s = 0.2 * rng.Gaussian();
      break;
    }
    case 1: {
      // One-pole lowpass over white noise, then RMS-normalized. The heavy
      // pole concentrates energy below ~300 Hz, overlapping the tone f0s.
      double y = 0.0;
      double acc = 0.0;
      for (double &s : w.samples) {
        y = 0.97 * y + 0.03 * rng.Gaussian();
        s = y;
        acc += y * y;
      }
      double rms = std::sqrt(acc / static_cast<double>(cfg.noise_samples));
      double k = 0.2 / std::max(rms, 1e-12);
      for (double &s : w.samples) s *= k;
      break;
    }
    case 2: {
      // Gated bursts with a quiet floor so no region is exactly silent.
      const int64_t period = 4000, on = 1000;
      for (int64_t i = 0; i < cfg.noise_samples; ++i) {
        double g = (i % period) < on ? 1.0 : 0.05;
        w.samples[static_cast<size_t>(i)] = 0.25 * g * rng.Gaussian();
      }
      break;
    }
    default:
      break;
  }
  for (double &s : w.samples) {
    if (s > 0.95) s = 0.95;
    if (s < -0.95) s = -0.95;
  }
  return w;
}

CorpusPaths SynthesizeCorpus(const std::string &out_dir, const SynthConfig &cfg) {
  FATLAB_CHECK(cfg.train_utts > 0 && cfg.test_utts > 0)
      << "(corpus sizes " << cfg.train_utts << "/" << cfg.test_utts << ")";
  fs::create_directories(fs::path(out_dir) / "wav");

  CorpusPaths paths;
  paths.train_clean = (fs::path(out_dir) / "train_clean.jsonl").string();
  paths.test_clean = (fs::path(out_dir) / "test_clean.jsonl").string();
  paths.noise_train = (fs::path(out_dir) / "noise_train.jsonl").string();
  paths.noise_test = (fs::path(out_dir) / "noise_test.jsonl").string();

  for (int split = 0; split < 2; ++split) {
    int64_t count = split == 0 ? cfg.train_utts : cfg.test_utts;
    std::vector<ManifestEntry> entries(static_cast<size_t>(count));
    util::ParallelFor(count, [&](int64_t i) {
      std::string transcript;
      Waveform w = MakeUtterance(cfg, split, i, &transcript);
      std::string id = UttId(split, i);
      std::string rel = "wav/" + id + ".wav";
      SaveWav((fs::path(out_dir) / rel).string(), w);
      ManifestEntry &e = entries[static_cast<size_t>(i)];
      e.id = id;
      e.audio = rel;
      e.transcript = transcript;
    });
    WriteManifest(split == 0 ? paths.train_clean : paths.test_clean, entries);
  }

  for (int split = 0; split < 2; ++split) {
    int per_type = split == 0 ? cfg.noises_per_type_train : cfg.noises_per_type_test;
    std::vector<ManifestEntry> entries;
    for (int type = 0; type < 3; ++type) {
      for (int64_t i = 0; i < per_type; ++i) {
        Waveform w = MakeNoise(cfg, type, split, i);
        std::string id = std::string(kNoiseTypeNames[type]) + (split == 0 ? "_train_" : "_test_") +
                         std::to_string(i);
        std::string rel = "wav/noise_" + id + ".wav";
        SaveWav((fs::path(out_dir) / rel).string(), w);
        ManifestEntry e;
        e.id = id;
        e.audio = rel;
        entries.push_back(std::move(e));
      }
    }
    WriteManifest(split == 0 ? paths.noise_train : paths.noise_test, entries);
  }
  return paths;
}

SimulateSummary SimulateDataset(const std::string &clean_manifest,
                                const std::string &noise_manifest, const std::string &out_dir,
                                const std::string &out_manifest, const SimulateConfig &cfg) {
  FATLAB_CHECK(cfg.snr_low_db <= cfg.snr_high_db)
      << "(snr range " << cfg.snr_low_db << ".." << cfg.snr_high_db << " dB)";
  std::vector<ManifestEntry> clean = ReadManifest(clean_manifest);
  std::vector<ManifestEntry> noise_entries = ReadManifest(noise_manifest);
  FATLAB_CHECK(!clean.empty()) << "(empty clean manifest " << clean_manifest << ")";
  FATLAB_CHECK(!noise_entries.empty()) << "(empty noise manifest " << noise_manifest << ")";
  fs::create_directories(out_dir);
  if (fs::path(out_manifest).has_parent_path()) {
    fs::create_directories(fs::path(out_manifest).parent_path());
  }

  // The noise corpus is small; load it once up front.
  std::vector<Waveform> noises(noise_entries.size());
  for (size_t i = 0; i < noise_entries.size(); ++i) {
    noises[i] = LoadWav(ResolveAudioPath(noise_manifest, noise_entries[i].audio));
  }

  int64_t n = static_cast<int64_t>(clean.size());
  std::vector<ManifestEntry> out(static_cast<size_t>(n));
  std::vector<char> ok(static_cast<size_t>(n), 0);
  util::ParallelFor(n, [&](int64_t i) {
    const ManifestEntry &src = clean[static_cast<size_t>(i)];
    Rng rng = Rng::Derive(cfg.seed, Rng::kDataset, static_cast<uint64_t>(i));
    int64_t pick = rng.UniformInt(static_cast<int64_t>(noises.size()));
    const Waveform &noise = noises[static_cast<size_t>(pick)];
    int64_t offset = rng.UniformInt(noise.size());
    double snr = rng.Uniform(cfg.snr_low_db, cfg.snr_high_db);

    Waveform clean_wav;
    try {
      clean_wav = LoadWav(ResolveAudioPath(clean_manifest, src.audio));
    } catch (const fatlab::Error &e) {
      FATLAB_WARN << "simulate: skipping " << src.id << ": " << e.what();
      return;
    }
    MixResult mixed = MixAtSnr(clean_wav, noise, snr, offset);
    fs::path wav_abs = fs::absolute(fs::path(out_dir) / (src.id + "_noisy.wav"));
    SaveWav(wav_abs.string(), mixed.noisy);

    // The audio field is relative to the manifest, which may live outside
    // out_dir.
    fs::path man_dir = fs::absolute(fs::path(out_manifest)).parent_path();
    fs::path rel = wav_abs.lexically_relative(man_dir);
    ManifestEntry &e = out[static_cast<size_t>(i)];
    e.id = src.id;
    e.audio = rel.empty() ? wav_abs.string() : rel.string();
    e.transcript = src.transcript;
    e.snr_db = snr;
    e.noise_id = noise_entries[static_cast<size_t>(pick)].id;
    e.rescale = mixed.rescale;
    ok[static_cast<size_t>(i)] = 1;
  });

  SimulateSummary summary;
  std::vector<ManifestEntry> kept;
  kept.reserve(out.size());
  for (int64_t i = 0; i < n; ++i) {
    if (ok[static_cast<size_t>(i)]) {
      kept.push_back(std::move(out[static_cast<size_t>(i)]));
      ++summary.written;
    } else {
      ++summary.skipped;
    }
  }
  WriteManifest(out_manifest, kept);
  if (summary.skipped > 0) {
    FATLAB_WARN << "simulate: skipped " << summary.skipped << " of " << n << " utterances";
  }
  return summary;
}

}  // namespace audio
}  // namespace fatlab
