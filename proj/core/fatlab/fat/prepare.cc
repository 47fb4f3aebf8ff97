// fatlab/fat/prepare.cc

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

#include "fatlab/fat/prepare.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <utility>

#include "fatlab/audio/manifest.h"
#include "fatlab/audio/mix.h"
#include "fatlab/frontends/pool.h"
#include "fatlab/util/check.h"

namespace fatlab {
namespace fat {

int64_t ActivePool::SampleIndex(numerics::Rng *rng) const {
  FATLAB_CHECK(rng != nullptr) << "(pool sample: null rng)";
  FATLAB_CHECK(!entries.empty()) << "(front-end pool is empty)";
  return rng->UniformInt(static_cast<int64_t>(entries.size()));
}

audio::Waveform ActivePool::Enhance(int64_t index, const audio::Waveform &w) const {
  FATLAB_CHECK(index >= 0 && index < size()) << "(pool index " << index << " of " << size() << ")";
  const ActiveEntry &e = entries[static_cast<size_t>(index)];
  if (e.frontend == nullptr) return w;
  return e.frontend->Enhance(w);
}

ActivePool LoadActivePool(const std::string &pool_path, bool include_identity) {
  ActivePool active;
  if (!pool_path.empty()) {
    frontends::FrontendPool pool = frontends::LoadPool(pool_path);
    for (const frontends::PoolEntry &e : pool.entries) {
      ActiveEntry entry;
      entry.id = e.id;
      entry.frontend =
          frontends::LoadFrontend(frontends::ResolvePoolPath(pool_path, e.checkpoint));
      active.entries.push_back(std::move(entry));
    }
  }
  if (include_identity) {
    ActiveEntry identity;
    identity.id = "identity";
    active.entries.push_back(std::move(identity));
  }
  FATLAB_CHECK(!active.entries.empty())
      << "(pool " << pool_path << " is empty and the identity entry is off)";
  return active;
}

ActivePool IdentityPool() {
  ActivePool active;
  ActiveEntry identity;
  identity.id = "identity";
  active.entries.push_back(std::move(identity));
  return active;
}

NoiseSource NoiseSource::FromManifest(const std::string &manifest) {
  NoiseSource src;
  std::vector<audio::ManifestEntry> entries = audio::ReadManifest(manifest);
  FATLAB_CHECK(!entries.empty()) << "(empty noise manifest " << manifest << ")";
  for (const audio::ManifestEntry &e : entries) {
    src.ids.push_back(e.id);
    src.waves.push_back(audio::LoadWav(audio::ResolveAudioPath(manifest, e.audio)));
  }
  return src;
}

FatPrepared FatPrepare(const audio::Waveform &clean, const NoiseSource &noise,
                       const ActivePool &pool, const FatConfig &cfg, const FatDraws &draws) {
  FATLAB_CHECK(cfg.snr_low_db <= cfg.snr_high_db)
      << "(snr range " << cfg.snr_low_db << ".." << cfg.snr_high_db << " dB)";
  FATLAB_CHECK(!pool.entries.empty()) << "(front-end pool is empty)";
  FATLAB_CHECK(draws.pool != nullptr) << "(fat_prepare: null pool rng)";

  FatPrepared out;
  if (noise.empty()) {
    out.noisy = clean;
  } else {
    FATLAB_CHECK(draws.noise != nullptr && draws.snr != nullptr)
        << "(fat_prepare: null noise/snr rng with a non-empty noise source)";
    int64_t pick = draws.noise->UniformInt(static_cast<int64_t>(noise.waves.size()));
    const audio::Waveform &nw = noise.waves[static_cast<size_t>(pick)];
    int64_t offset = draws.noise->UniformInt(nw.size());
    double snr = draws.snr->Uniform(cfg.snr_low_db, cfg.snr_high_db);
    audio::MixResult mixed = audio::MixAtSnr(clean, nw, snr, offset);
    out.noisy = std::move(mixed.noisy);
    out.provenance.noise_id = noise.ids[static_cast<size_t>(pick)];
    out.provenance.snr_db = snr;
  }

  int64_t idx = pool.SampleIndex(draws.pool);
  out.provenance.frontend_id = pool.entries[static_cast<size_t>(idx)].id;
  out.enhanced = pool.Enhance(idx, out.noisy);
  return out;
}

audio::Waveform ImstApply(const audio::Waveform &noisy, const ActivePool &pool,
                          const ImstConfig &cfg, numerics::Rng *coin_rng,
                          numerics::Rng *pool_rng, FatProvenance *prov) {
  FATLAB_CHECK(cfg.segment_length_s > 0.0) << "(segment length " << cfg.segment_length_s << " s)";
  FATLAB_CHECK(cfg.p_enh >= 0.0 && cfg.p_enh <= 1.0) << "(p_enh " << cfg.p_enh << ")";
  FATLAB_CHECK(coin_rng != nullptr && pool_rng != nullptr) << "(imst_apply: null rng)";
  FATLAB_CHECK(!pool.entries.empty()) << "(front-end pool is empty)";
  FATLAB_CHECK(noisy.size() > 0) << "(imst_apply: empty waveform)";

  int64_t n = noisy.size();
  int64_t seg = std::max<int64_t>(
      1, std::llround(cfg.segment_length_s * static_cast<double>(noisy.sample_rate)));

  audio::Waveform out = noisy;
  // Full-utterance enhanced renderings, computed once per distinct front-end.
  std::map<int64_t, audio::Waveform> rendered;
  int64_t shared_pick = -1;

  for (int64_t start = 0; start < n; start += seg) {
    int64_t stop = std::min(n, start + seg);
    // One coin per segment, consumed no matter the outcome, so the draw count
    // depends only on the utterance length.
    bool enhance = coin_rng->Uniform(0.0, 1.0) < cfg.p_enh;
    std::string seg_frontend;
    if (enhance) {
      int64_t pick;
      if (cfg.resample_per_segment) {
        pick = pool.SampleIndex(pool_rng);
      } else {
        if (shared_pick < 0) shared_pick = pool.SampleIndex(pool_rng);
        pick = shared_pick;
      }
      auto it = rendered.find(pick);
      if (it == rendered.end()) {
        it = rendered.emplace(pick, pool.Enhance(pick, noisy)).first;
        FATLAB_CHECK(it->second.size() == n)
            << "(front-end " << pool.entries[static_cast<size_t>(pick)].id
            << " changed the length: " << it->second.size() << " vs " << n << ")";
      }
      std::copy(it->second.samples.begin() + start, it->second.samples.begin() + stop,
                out.samples.begin() + start);
      seg_frontend = pool.entries[static_cast<size_t>(pick)].id;
    }
    if (prov != nullptr) {
      prov->imst_styles.push_back(enhance ? 1 : 0);
      prov->imst_frontends.push_back(seg_frontend);
    }
  }
  return out;
}

}  // namespace fat
}  // namespace fatlab
