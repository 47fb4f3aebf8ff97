// fatlab/audio/synth.h

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

#ifndef FATLAB_AUDIO_SYNTH_H_
#define FATLAB_AUDIO_SYNTH_H_

#include <cstdint>
#include <string>
#include <vector>

#include "fatlab/audio/wav.h"

namespace fatlab {
namespace audio {

// Bundled synthetic corpus: utterances are concatenations of per-symbol tone
// complexes with known transcripts, so recognition trends are testable
// without shipping real speech. Symbol s is a three-harmonic complex at
// f0 = 180 + 40*s Hz lasting symbol_samples; every piece of an utterance is a
// multiple of 320 samples so downstream frame bookkeeping stays exact.
struct SynthConfig {
  uint64_t seed = 1;
  int num_symbols = 10;
  int train_utts = 200;
  int test_utts = 40;
  int min_symbols = 6;
  int max_symbols = 10;
  int sample_rate = 16000;
  int64_t symbol_samples = 1600;
  int64_t lead_silence = 320;
  int noises_per_type_train = 3;
  int noises_per_type_test = 2;
  int64_t noise_samples = 32000;
};

struct CorpusPaths {
  std::string train_clean;
  std::string test_clean;
  std::string noise_train;
  std::string noise_test;
};

// Deterministic single-symbol unit (no RNG involved).
Waveform MakeSymbol(int symbol, const SynthConfig &cfg);

// One utterance as a pure function of (cfg.seed, split, index); the returned
// transcript is space-separated symbol tokens like "s3 s7 s1".
Waveform MakeUtterance(const SynthConfig &cfg, int split, int64_t index,
                       std::string *transcript);

// One noise instance: type 0 white, 1 lowpass, 2 pulsed.
Waveform MakeNoise(const SynthConfig &cfg, int type, int split, int64_t index);
extern const char *const kNoiseTypeNames[3];

// Writes wav/ plus four JSON-lines manifests under out_dir and returns their
// paths. Byte-identical output for equal (cfg, out_dir contents).
CorpusPaths SynthesizeCorpus(const std::string &out_dir, const SynthConfig &cfg);

// Offline mixing stage: every clean manifest row is mixed with a noise drawn
// from the noise manifest at an SNR uniform in [snr_low, snr_high]. Draw
// order per utterance is noise pick, then offset, then SNR; never reorder,
// manifests are byte-stable across releases.
struct SimulateConfig {
  double snr_low_db = 5.0;
  double snr_high_db = 10.0;
  uint64_t seed = 1;
};

struct SimulateSummary {
  int64_t written = 0;
  int64_t skipped = 0;  // missing audio files, already warned about
};

SimulateSummary SimulateDataset(const std::string &clean_manifest,
                                const std::string &noise_manifest, const std::string &out_dir,
                                const std::string &out_manifest, const SimulateConfig &cfg);

}  // namespace audio
}  // namespace fatlab

#endif  // FATLAB_AUDIO_SYNTH_H_
