// fatlab/fat/prepare.h

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

#ifndef FATLAB_FAT_PREPARE_H_
#define FATLAB_FAT_PREPARE_H_

#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "fatlab/audio/wav.h"
#include "fatlab/fat/config.h"
#include "fatlab/frontends/enhancer.h"
#include "fatlab/numerics/rng.h"

namespace fatlab {
namespace fat {

// A pool with its front-ends materialized in entry order. A null front-end is
// the identity entry: it enhances to a copy of its input.
struct ActiveEntry {
  std::string id;
  std::unique_ptr<frontends::Frontend> frontend;
};

struct ActivePool {
  std::vector<ActiveEntry> entries;

  int64_t size() const { return static_cast<int64_t>(entries.size()); }

  // Uniform pick consuming exactly one draw.
  int64_t SampleIndex(numerics::Rng *rng) const;

  audio::Waveform Enhance(int64_t index, const audio::Waveform &w) const;
};

// Loads every checkpoint referenced by the pool file, appending the identity
// entry when asked. The result is immutable and safe to share across calls.
ActivePool LoadActivePool(const std::string &pool_path, bool include_identity);

// A pool holding only the identity entry.
ActivePool IdentityPool();

// On-the-fly mixing corpus. An empty source means no mixing: the noisy
// rendering is the clean waveform itself and no draws are consumed.
struct NoiseSource {
  std::vector<std::string> ids;
  std::vector<audio::Waveform> waves;

  static NoiseSource FromManifest(const std::string &manifest);
  static NoiseSource None() { return NoiseSource{}; }
  bool empty() const { return waves.empty(); }
};

// What happened to one utterance during preparation, written to the
// provenance log and echoed in halt dumps.
struct FatProvenance {
  std::string utt_id;
  std::string frontend_id;
  std::string noise_id;  // empty when no noise was mixed
  double snr_db = std::numeric_limits<double>::quiet_NaN();
  // Per IMST segment: 0 kept the noisy rendering, 1 switched to an enhanced
  // one; imst_frontends holds the per-segment front-end id ("" for style 0).
  std::vector<int> imst_styles;
  std::vector<std::string> imst_frontends;
};

// Independent draw streams for one preparation. Keeping the purposes apart
// means a change in one kind of draw never shifts the others, so any step is
// reconstructible from (seed, step, slot) derivations alone.
struct FatDraws {
  numerics::Rng *noise = nullptr;
  numerics::Rng *snr = nullptr;
  numerics::Rng *pool = nullptr;
};

struct FatPrepared {
  audio::Waveform enhanced;
  audio::Waveform noisy;
  FatProvenance provenance;
};

// Mixes the clean utterance with sampled noise at a uniform SNR from the
// configured range, then cleans it with a pool-sampled front-end. Draw order:
// noise pick and offset from draws.noise, SNR from draws.snr, front-end from
// draws.pool; an empty noise source skips the first two.
FatPrepared FatPrepare(const audio::Waveform &clean, const NoiseSource &noise,
                       const ActivePool &pool, const FatConfig &cfg, const FatDraws &draws);

// Splits the utterance into segments of segment_length_s (remainder kept) and
// independently switches each to an enhanced rendering with probability
// p_enh. Enhancement always runs on the full utterance and is sliced, so
// segment boundaries carry no edge artifacts. One coin draw per segment is
// consumed unconditionally; front-end draws come from pool_rng as configured.
audio::Waveform ImstApply(const audio::Waveform &noisy, const ActivePool &pool,
                          const ImstConfig &cfg, numerics::Rng *coin_rng,
                          numerics::Rng *pool_rng, FatProvenance *prov = nullptr);

}  // namespace fat
}  // namespace fatlab

#endif  // FATLAB_FAT_PREPARE_H_
