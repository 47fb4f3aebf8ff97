// fatlab/tests/test_fat.cc

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
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "fatlab/audio/manifest.h"
#include "fatlab/audio/wav.h"
#include "fatlab/fat/config.h"
#include "fatlab/fat/prepare.h"
#include "fatlab/fat/pretrain.h"
#include "fatlab/frontends/config.h"
#include "fatlab/frontends/enhancer.h"
#include "fatlab/frontends/pool.h"
#include "fatlab/numerics/rng.h"
#include "fatlab/ssl/config.h"
#include "fatlab/ssl/model.h"
#include "fatlab/targets/store.h"

using fatlab::audio::ManifestEntry;
using fatlab::audio::Waveform;
using fatlab::fat::ActiveEntry;
using fatlab::fat::ActivePool;
using fatlab::fat::BaselinePretrain;
using fatlab::fat::FatConfig;
using fatlab::fat::FatDraws;
using fatlab::fat::FatPrepare;
using fatlab::fat::FatPrepared;
using fatlab::fat::FatProvenance;
using fatlab::fat::IdentityPool;
using fatlab::fat::ImstApply;
using fatlab::fat::ImstConfig;
using fatlab::fat::LoadActivePool;
using fatlab::fat::NoiseSource;
using fatlab::fat::Pretrain;
using fatlab::fat::PretrainConfig;
using fatlab::fat::PretrainResult;
using fatlab::numerics::Rng;
using fatlab::ssl::EncoderConfig;
using fatlab::ssl::FusionConfig;
using fatlab::ssl::MaskingConfig;
using fatlab::ssl::SslEncoder;

namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path dir;
  explicit TempDir(const std::string &tag) {
    dir = fs::temp_directory_path() / ("fatlab_" + tag);
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~TempDir() { fs::remove_all(dir); }
  std::string Path(const std::string &name) const { return (dir / name).string(); }
};

Waveform NoiseWave(uint64_t salt, int64_t n, double amp = 0.25) {
  Rng rng = Rng::Derive(salt, Rng::kTest, 117);
  Waveform w;
  w.samples.resize(static_cast<size_t>(n));
  for (auto &s : w.samples) s = amp * rng.Gaussian();
  return w;
}

Waveform ToneWave(double freq, int64_t n, double amp = 0.3) {
  Waveform w;
  w.samples.resize(static_cast<size_t>(n));
  for (int64_t i = 0; i < n; ++i) {
    double t = static_cast<double>(i) / static_cast<double>(w.sample_rate);
    w.samples[static_cast<size_t>(i)] =
        amp * (std::sin(2.0 * M_PI * freq * t) + 0.4 * std::sin(2.0 * M_PI * 2.3 * freq * t));
  }
  return w;
}

bool SameSamples(const Waveform &a, const Waveform &b) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.samples.size(); ++i) {
    if (std::memcmp(&a.samples[i], &b.samples[i], sizeof(double)) != 0) return false;
  }
  return true;
}

std::string ReadFile(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool SameBytes(const std::string &a, const std::string &b) { return ReadFile(a) == ReadFile(b); }

// Pool of null front-ends with the given ids. A null entry enhances to a
// copy, so multi-entry pools are cheap where only the draw pattern matters.
ActivePool NamedIdentityPool(const std::vector<std::string> &ids) {
  ActivePool pool;
  for (const std::string &id : ids) {
    ActiveEntry e;
    e.id = id;
    pool.entries.push_back(std::move(e));
  }
  return pool;
}

fatlab::frontends::FrontendSpec TinyTdSpec(uint64_t seed, const std::string &id) {
  fatlab::frontends::FrontendSpec spec;
  spec.id = id;
  spec.family = fatlab::frontends::FrontendFamily::kTimeDomain;
  spec.td.filters = 8;
  spec.td.kernel = 16;
  spec.td.stride = 8;
  spec.td.block_channels = 4;
  spec.td.dilations = {1, 2};
  spec.init_seed = seed;
  return spec;
}

NoiseSource TwoNoises(int64_t n) {
  NoiseSource src;
  src.ids = {"hum", "babble"};
  src.waves = {NoiseWave(31, n), NoiseWave(32, n)};
  return src;
}

// Same kernels and strides as the full stack (so the usual 625-sample
// receptive field and 320x downsampling), shrunk everywhere else.
EncoderConfig TinyEncoder() {
  EncoderConfig c;
  c.conv = {{4, 10, 5}, {4, 8, 4}, {8, 4, 2}, {8, 4, 2}, {8, 4, 2}, {8, 2, 2}};
  c.num_blocks = 2;
  c.model_dim = 8;
  c.num_heads = 2;
  c.ffn_dim = 16;
  c.num_classes = 4;
  c.max_frames = 16;
  return c;
}

// Writes `count` utterances (wav + target ids) plus a manifest; returns the
// manifest path. Target ids land in [0, num_classes).
std::string WriteCorpus(const TempDir &tmp, int count, int64_t samples, int64_t num_classes,
                        const std::string &tag) {
  std::vector<ManifestEntry> entries;
  fs::create_directories(tmp.dir / tag);
  Rng rng = Rng::Derive(99, Rng::kTest, 7);
  for (int i = 0; i < count; ++i) {
    std::string id = tag + "_utt" + std::to_string(i);
    Waveform w = ToneWave(180.0 + 60.0 * i, samples);
    std::string wav = tag + "/" + id + ".wav";
    fatlab::audio::SaveWav((tmp.dir / wav).string(), w);
    std::vector<int64_t> ids;
    for (int64_t f = 0; f < 16; ++f) ids.push_back(rng.UniformInt(num_classes));
    fatlab::targets::SaveTargetIds(fatlab::targets::TargetPath((tmp.dir / tag).string(), id), ids);
    ManifestEntry e;
    e.id = id;
    e.audio = wav;
    entries.push_back(e);
  }
  std::string manifest = tmp.Path(tag + ".jsonl");
  fatlab::audio::WriteManifest(manifest, entries);
  return manifest;
}

std::vector<std::string> CsvLines(const std::string &path) {
  std::istringstream in(ReadFile(path));
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

std::vector<nlohmann::json> JsonLines(const std::string &path) {
  std::istringstream in(ReadFile(path));
  std::vector<nlohmann::json> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(nlohmann::json::parse(line));
  return lines;
}

}  // namespace

TEST_CASE("preparation with the identity pool and no noise is a double pass-through") {
  Waveform clean = ToneWave(220.0, 2000);
  ActivePool pool = IdentityPool();
  Rng pool_rng = Rng::Derive(5, Rng::kPool, 0, 0);
  FatDraws draws;
  draws.pool = &pool_rng;
  FatPrepared prep = FatPrepare(clean, NoiseSource::None(), pool, FatConfig{}, draws);
  CHECK(SameSamples(prep.noisy, clean));
  CHECK(SameSamples(prep.enhanced, clean));
  CHECK(prep.provenance.frontend_id == "identity");
  CHECK(prep.provenance.noise_id.empty());
  CHECK(!std::isfinite(prep.provenance.snr_db));
}

TEST_CASE("preparation draws noise, offset, snr, front-end in a fixed order") {
  Waveform clean = ToneWave(220.0, 2000);
  NoiseSource noise = TwoNoises(3000);
  ActivePool pool = NamedIdentityPool({"a", "b", "c"});
  FatConfig cfg;
  cfg.snr_low_db = -3.0;
  cfg.snr_high_db = 9.0;

  Rng noise_rng = Rng::Derive(11, Rng::kNoise, 4, 2);
  Rng snr_rng = Rng::Derive(11, Rng::kSnr, 4, 2);
  Rng pool_rng = Rng::Derive(11, Rng::kPool, 4, 2);
  FatDraws draws;
  draws.noise = &noise_rng;
  draws.snr = &snr_rng;
  draws.pool = &pool_rng;
  FatPrepared prep = FatPrepare(clean, noise, pool, cfg, draws);

  // Replay the documented draw order with twin streams.
  Rng tw_noise = Rng::Derive(11, Rng::kNoise, 4, 2);
  Rng tw_snr = Rng::Derive(11, Rng::kSnr, 4, 2);
  Rng tw_pool = Rng::Derive(11, Rng::kPool, 4, 2);
  int64_t pick = tw_noise.UniformInt(2);
  tw_noise.UniformInt(noise.waves[static_cast<size_t>(pick)].size());
  double snr = tw_snr.Uniform(cfg.snr_low_db, cfg.snr_high_db);
  int64_t fe = tw_pool.UniformInt(3);
  CHECK(prep.provenance.noise_id == noise.ids[static_cast<size_t>(pick)]);
  CHECK(prep.provenance.snr_db == doctest::Approx(snr).epsilon(0.0));
  CHECK(prep.provenance.frontend_id == pool.entries[static_cast<size_t>(fe)].id);
  CHECK(prep.provenance.snr_db >= cfg.snr_low_db);
  CHECK(prep.provenance.snr_db <= cfg.snr_high_db);
  // Each stream was consumed exactly as replayed: the next draws agree.
  CHECK(noise_rng.NextU64() == tw_noise.NextU64());
  CHECK(snr_rng.NextU64() == tw_snr.NextU64());
  CHECK(pool_rng.NextU64() == tw_pool.NextU64());
}

TEST_CASE("preparation is reproducible from its derivation coordinates") {
  Waveform clean = ToneWave(330.0, 2500);
  NoiseSource noise = TwoNoises(4000);
  TempDir tmp("fat_repro_pool");
  auto fe_a = fatlab::frontends::CreateFrontend(TinyTdSpec(21, "fe_a"));
  auto fe_b = fatlab::frontends::CreateFrontend(TinyTdSpec(22, "fe_b"));
  fatlab::frontends::SaveFrontend(*fe_a, tmp.Path("fe_a.bin"));
  fatlab::frontends::SaveFrontend(*fe_b, tmp.Path("fe_b.bin"));
  fatlab::frontends::FrontendPool file_pool;
  file_pool.entries = {{"fe_a", "fe_a.bin"}, {"fe_b", "fe_b.bin"}};
  fatlab::frontends::SavePool(file_pool, tmp.Path("pool.json"));
  ActivePool pool = LoadActivePool(tmp.Path("pool.json"), false);
  REQUIRE(pool.size() == 2);

  FatConfig cfg;
  auto prepare_at = [&](uint64_t step, uint64_t slot) {
    Rng noise_rng = Rng::Derive(7, Rng::kNoise, step, slot);
    Rng snr_rng = Rng::Derive(7, Rng::kSnr, step, slot);
    Rng pool_rng = Rng::Derive(7, Rng::kPool, step, slot);
    FatDraws draws;
    draws.noise = &noise_rng;
    draws.snr = &snr_rng;
    draws.pool = &pool_rng;
    return FatPrepare(clean, noise, pool, cfg, draws);
  };
  FatPrepared first = prepare_at(3, 1);
  FatPrepared again = prepare_at(3, 1);
  CHECK(SameSamples(first.noisy, again.noisy));
  CHECK(SameSamples(first.enhanced, again.enhanced));
  CHECK(first.provenance.frontend_id == again.provenance.frontend_id);
  CHECK(first.provenance.noise_id == again.provenance.noise_id);
  CHECK(first.provenance.snr_db == again.provenance.snr_db);

  FatPrepared other = prepare_at(3, 2);
  CHECK(first.provenance.snr_db != other.provenance.snr_db);
  CHECK_FALSE(SameSamples(first.noisy, other.noisy));
}

TEST_CASE("pool picks over a thousand preparations stay near uniform") {
  Waveform clean = ToneWave(150.0, 400);
  ActivePool pool = NamedIdentityPool({"p0", "p1", "p2", "p3"});
  std::map<std::string, int> counts;
  for (int i = 0; i < 1000; ++i) {
    Rng pool_rng = Rng::Derive(13, Rng::kPool, static_cast<uint64_t>(i), 0);
    FatDraws draws;
    draws.pool = &pool_rng;
    FatPrepared prep = FatPrepare(clean, NoiseSource::None(), pool, FatConfig{}, draws);
    counts[prep.provenance.frontend_id]++;
  }
  REQUIRE(counts.size() == 4);
  for (const auto &kv : counts) {
    CHECK(kv.second > 200);
    CHECK(kv.second < 300);
  }
}

TEST_CASE("preparation rejects a bad snr range and an empty pool") {
  Waveform clean = ToneWave(220.0, 800);
  NoiseSource noise = TwoNoises(1000);
  Rng pool_rng = Rng::Derive(1, Rng::kPool, 0, 0);
  Rng noise_rng = Rng::Derive(1, Rng::kNoise, 0, 0);
  Rng snr_rng = Rng::Derive(1, Rng::kSnr, 0, 0);
  FatDraws draws;
  draws.noise = &noise_rng;
  draws.snr = &snr_rng;
  draws.pool = &pool_rng;
  FatConfig bad;
  bad.snr_low_db = 10.0;
  bad.snr_high_db = 0.0;
  CHECK_THROWS(FatPrepare(clean, noise, IdentityPool(), bad, draws));
  ActivePool empty;
  CHECK_THROWS(FatPrepare(clean, noise, empty, FatConfig{}, draws));
  FatDraws no_pool;
  CHECK_THROWS(FatPrepare(clean, noise, IdentityPool(), FatConfig{}, no_pool));
}

TEST_CASE("style switching at zero probability keeps the input bitwise") {
  Waveform noisy = NoiseWave(41, 5000);
  ActivePool pool = IdentityPool();
  ImstConfig cfg;
  cfg.segment_length_s = 0.05;  // 800 samples, 7 segments
  cfg.p_enh = 0.0;
  Rng coin = Rng::Derive(3, Rng::kImstCoin, 0, 0);
  Rng pick = Rng::Derive(3, Rng::kImstPool, 0, 0);
  FatProvenance prov;
  Waveform out = ImstApply(noisy, pool, cfg, &coin, &pick, &prov);
  CHECK(SameSamples(out, noisy));
  REQUIRE(prov.imst_styles.size() == 7);
  for (int s : prov.imst_styles) CHECK(s == 0);
  for (const std::string &f : prov.imst_frontends) CHECK(f.empty());
}

TEST_CASE("style switching at probability one equals full enhancement") {
  Waveform noisy = NoiseWave(42, 4096);
  TempDir tmp("fat_zero_steps");
  auto fe = fatlab::frontends::CreateFrontend(TinyTdSpec(23, "fe_x"));
  Waveform full = fe->Enhance(noisy);
  ActivePool pool;
  ActiveEntry e;
  e.id = "fe_x";
  e.frontend = std::move(fe);
  pool.entries.push_back(std::move(e));

  ImstConfig cfg;
  cfg.segment_length_s = 0.04;  // 640 samples
  cfg.p_enh = 1.0;
  Rng coin = Rng::Derive(3, Rng::kImstCoin, 1, 0);
  Rng pick = Rng::Derive(3, Rng::kImstPool, 1, 0);
  FatProvenance prov;
  Waveform out = ImstApply(noisy, pool, cfg, &coin, &pick, &prov);
  CHECK(out.size() == noisy.size());
  CHECK(SameSamples(out, full));
  REQUIRE(!prov.imst_styles.empty());
  for (int s : prov.imst_styles) CHECK(s == 1);
  for (const std::string &f : prov.imst_frontends) CHECK(f == "fe_x");
}

TEST_CASE("style switching consumes one coin per segment and picks per enhanced segment") {
  Waveform noisy = NoiseWave(43, 500);
  noisy.sample_rate = 16000;
  ActivePool pool = NamedIdentityPool({"u", "v", "w"});
  ImstConfig cfg;
  cfg.segment_length_s = 0.01;  // 160 samples: segments 160,160,160,20
  cfg.p_enh = 0.5;
  Rng coin = Rng::Derive(9, Rng::kImstCoin, 2, 1);
  Rng pick = Rng::Derive(9, Rng::kImstPool, 2, 1);
  FatProvenance prov;
  Waveform out = ImstApply(noisy, pool, cfg, &coin, &pick, &prov);
  CHECK(out.size() == noisy.size());
  REQUIRE(prov.imst_styles.size() == 4);

  // Twin replay: four coins no matter the outcomes, one pool draw per
  // enhanced segment.
  Rng tw_coin = Rng::Derive(9, Rng::kImstCoin, 2, 1);
  Rng tw_pick = Rng::Derive(9, Rng::kImstPool, 2, 1);
  int enhanced = 0;
  for (int s = 0; s < 4; ++s) {
    bool on = tw_coin.Uniform(0.0, 1.0) < cfg.p_enh;
    CHECK(prov.imst_styles[static_cast<size_t>(s)] == (on ? 1 : 0));
    if (on) {
      int64_t idx = tw_pick.UniformInt(3);
      CHECK(prov.imst_frontends[static_cast<size_t>(s)] ==
            pool.entries[static_cast<size_t>(idx)].id);
      ++enhanced;
    }
  }
  REQUIRE(enhanced > 0);  // the chosen seed exercises both styles
  REQUIRE(enhanced < 4);
  CHECK(coin.NextU64() == tw_coin.NextU64());
  CHECK(pick.NextU64() == tw_pick.NextU64());
}

TEST_CASE("a shared style draw reuses one front-end across segments") {
  Waveform noisy = NoiseWave(44, 64000);  // 4 one-second segments
  ActivePool pool = NamedIdentityPool({"u", "v", "w", "x", "y"});
  ImstConfig cfg;
  cfg.p_enh = 1.0;
  cfg.resample_per_segment = false;
  Rng coin = Rng::Derive(10, Rng::kImstCoin, 0, 0);
  Rng pick = Rng::Derive(10, Rng::kImstPool, 0, 0);
  FatProvenance prov;
  ImstApply(noisy, pool, cfg, &coin, &pick, &prov);
  REQUIRE(prov.imst_frontends.size() == 4);
  std::set<std::string> distinct(prov.imst_frontends.begin(), prov.imst_frontends.end());
  CHECK(distinct.size() == 1);

  // Exactly one pool draw happened.
  Rng tw_pick = Rng::Derive(10, Rng::kImstPool, 0, 0);
  tw_pick.UniformInt(5);
  CHECK(pick.NextU64() == tw_pick.NextU64());
}

TEST_CASE("pretraining for zero steps writes the initial model") {
  TempDir tmp("fat_rep_runs");
  std::string manifest = WriteCorpus(tmp, 2, 3000, 4, "zs");
  SslEncoder model(TinyEncoder(), FusionConfig{}, 77);
  std::string init_path = tmp.Path("init.bin");
  model.Save(init_path, MaskingConfig{});

  PretrainConfig cfg;
  cfg.steps = 0;
  PretrainResult res =
      BaselinePretrain(&model, manifest, tmp.Path("zs"), MaskingConfig{}, cfg, tmp.Path("out"));
  CHECK(res.steps_done == 0);
  CHECK_FALSE(res.halted_nonfinite);
  REQUIRE(!res.final_checkpoint.empty());
  CHECK(SameBytes(res.final_checkpoint, init_path));
  auto lines = CsvLines(res.loss_csv);
  REQUIRE(lines.size() == 1);
  CHECK(lines[0] == "step,loss,masked_frames,lr");
}

TEST_CASE("pretraining is reproducible and seed-sensitive") {
  TempDir tmp("fat_reduction");
  std::string manifest = WriteCorpus(tmp, 3, 3000, 4, "rep");
  NoiseSource noise = TwoNoises(5000);
  ActivePool pool = NamedIdentityPool({"a", "b"});
  FatConfig fat;
  ImstConfig imst;
  imst.segment_length_s = 0.05;
  PretrainConfig cfg;
  cfg.steps = 3;
  cfg.batch_size = 2;
  cfg.seed = 5;

  auto run = [&](const std::string &out, uint64_t seed) {
    PretrainConfig c = cfg;
    c.seed = seed;
    SslEncoder model(TinyEncoder(), FusionConfig{}, 77);
    return Pretrain(&model, manifest, tmp.Path("rep"), pool, noise, fat, &imst, MaskingConfig{},
                    c, tmp.Path(out));
  };
  PretrainResult r1 = run("o1", 5);
  PretrainResult r2 = run("o2", 5);
  PretrainResult r3 = run("o3", 6);
  CHECK(SameBytes(r1.loss_csv, r2.loss_csv));
  CHECK(SameBytes(r1.provenance_jsonl, r2.provenance_jsonl));
  CHECK(SameBytes(r1.final_checkpoint, r2.final_checkpoint));
  CHECK_FALSE(ReadFile(r1.loss_csv) == ReadFile(r3.loss_csv));
}

TEST_CASE("the adapted loop with an identity pool and no noise reproduces the plain loop") {
  TempDir tmp("fat_warmup");
  std::string manifest = WriteCorpus(tmp, 3, 3000, 4, "red");
  PretrainConfig base_cfg;
  base_cfg.steps = 6;
  base_cfg.batch_size = 2;
  base_cfg.seed = 17;
  base_cfg.lr = 3e-3;

  SslEncoder base_model(TinyEncoder(), FusionConfig{}, 91);
  PretrainResult base = BaselinePretrain(&base_model, manifest, tmp.Path("red"), MaskingConfig{},
                                         base_cfg, tmp.Path("base"));

  // Same loop with the whole adaptive apparatus switched to its neutral
  // point: identity pool, no mixing, style switching over identity
  // renderings, fusion frozen at its pass-through init.
  PretrainConfig fat_cfg = base_cfg;
  fat_cfg.train_fusion = false;
  FatConfig fat;
  ImstConfig imst;
  imst.segment_length_s = 0.03;
  imst.p_enh = 0.5;
  SslEncoder fat_model(TinyEncoder(), FusionConfig{}, 91);
  PretrainResult adapted = Pretrain(&fat_model, manifest, tmp.Path("red"), IdentityPool(),
                                    NoiseSource::None(), fat, &imst, MaskingConfig{}, fat_cfg,
                                    tmp.Path("fat"));

  CHECK_FALSE(base.halted_nonfinite);
  CHECK_FALSE(adapted.halted_nonfinite);
  CHECK(SameBytes(base.loss_csv, adapted.loss_csv));
  CHECK(SameBytes(base.final_checkpoint, adapted.final_checkpoint));
}

TEST_CASE("warmup ramps the learning rate linearly before holding it") {
  TempDir tmp("fat_halt");
  std::string manifest = WriteCorpus(tmp, 2, 3000, 4, "wu");
  SslEncoder model(TinyEncoder(), FusionConfig{}, 7);
  PretrainConfig cfg;
  cfg.steps = 6;
  cfg.batch_size = 1;
  cfg.lr = 8e-4;
  cfg.warmup_steps = 4;
  PretrainResult res =
      BaselinePretrain(&model, manifest, tmp.Path("wu"), MaskingConfig{}, cfg, tmp.Path("out"));
  auto lines = CsvLines(res.loss_csv);
  REQUIRE(lines.size() == 7);
  std::vector<double> want = {8e-4 * 0.25, 8e-4 * 0.5, 8e-4 * 0.75, 8e-4, 8e-4, 8e-4};
  for (int i = 0; i < 6; ++i) {
    std::string line = lines[static_cast<size_t>(i + 1)];
    double lr = std::stod(line.substr(line.rfind(',') + 1));
    CHECK(lr == doctest::Approx(want[static_cast<size_t>(i)]).epsilon(1e-12));
  }
}

TEST_CASE("a non-finite loss halts the run with a diagnostic dump") {
  TempDir tmp("fat_ckpt");
  std::string manifest = WriteCorpus(tmp, 2, 3000, 4, "halt");
  SslEncoder model(TinyEncoder(), FusionConfig{}, 7);
  // Poison one weight; the very first forward pass must go non-finite.
  model.registry().entries().front().second->value.vec()[0] =
      std::numeric_limits<double>::quiet_NaN();
  PretrainConfig cfg;
  cfg.steps = 5;
  cfg.batch_size = 2;
  PretrainResult res =
      BaselinePretrain(&model, manifest, tmp.Path("halt"), MaskingConfig{}, cfg, tmp.Path("out"));
  CHECK(res.halted_nonfinite);
  CHECK(res.steps_done == 0);
  CHECK(res.final_checkpoint.empty());
  CHECK_FALSE(fs::exists(tmp.Path("out") + "/final.bin"));
  REQUIRE(!res.halt_dump.empty());
  nlohmann::json dump = nlohmann::json::parse(ReadFile(res.halt_dump));
  CHECK(dump["step"] == 0);
  REQUIRE(dump["utts"].is_array());
  REQUIRE(dump["utts"].size() == 2);
  CHECK(dump["utts"][0].contains("id"));
  auto lines = CsvLines(res.loss_csv);
  REQUIRE(lines.size() == 2);  // header plus the offending step
  CHECK(lines[1].find("nan") != std::string::npos);
}

TEST_CASE("periodic checkpoints land on the configured cadence") {
  TempDir tmp("fat_granularity");
  std::string manifest = WriteCorpus(tmp, 2, 3000, 4, "ck");
  SslEncoder model(TinyEncoder(), FusionConfig{}, 7);
  PretrainConfig cfg;
  cfg.steps = 4;
  cfg.batch_size = 1;
  cfg.checkpoint_every = 2;
  PretrainResult res =
      BaselinePretrain(&model, manifest, tmp.Path("ck"), MaskingConfig{}, cfg, tmp.Path("out"));
  CHECK(fs::exists(tmp.Path("out") + "/ckpt_2.bin"));
  CHECK_FALSE(fs::exists(tmp.Path("out") + "/ckpt_4.bin"));  // folded into final.bin
  REQUIRE(fs::exists(res.final_checkpoint));
  std::string prov;
  MaskingConfig masking;
  SslEncoder loaded = SslEncoder::Load(tmp.Path("out") + "/ckpt_2.bin", &masking, &prov);
  nlohmann::json j = nlohmann::json::parse(prov);
  CHECK(j["steps"] == 2);
  CHECK(j["phase"] == "baseline_pretrain");
}

TEST_CASE("per-batch granularity reuses one front-end draw across the batch") {
  TempDir tmp("fat_fit");
  std::string manifest = WriteCorpus(tmp, 3, 3000, 4, "gran");
  ActivePool pool = NamedIdentityPool({"a", "b", "c", "d"});
  FatConfig fat;
  fat.per_utterance = false;
  PretrainConfig cfg;
  cfg.steps = 4;
  cfg.batch_size = 4;
  cfg.seed = 23;
  SslEncoder model(TinyEncoder(), FusionConfig{}, 7);
  PretrainResult res = Pretrain(&model, manifest, tmp.Path("gran"), pool, NoiseSource::None(),
                                fat, nullptr, MaskingConfig{}, cfg, tmp.Path("out"));
  auto lines = JsonLines(res.provenance_jsonl);
  REQUIRE(lines.size() == 4);
  std::set<std::string> per_step;
  for (const auto &line : lines) {
    std::set<std::string> in_batch;
    for (const auto &u : line["utts"]) in_batch.insert(u["frontend"].get<std::string>());
    CHECK(in_batch.size() == 1);
    per_step.insert(*in_batch.begin());
  }
  CHECK(per_step.size() > 1);  // the draw still varies across steps

  // Per-utterance granularity with the same seed varies within a batch.
  FatConfig per_utt;
  SslEncoder model2(TinyEncoder(), FusionConfig{}, 7);
  PretrainResult res2 = Pretrain(&model2, manifest, tmp.Path("gran"), pool, NoiseSource::None(),
                                 per_utt, nullptr, MaskingConfig{}, cfg, tmp.Path("out2"));
  bool any_mixed_batch = false;
  for (const auto &line : JsonLines(res2.provenance_jsonl)) {
    std::set<std::string> in_batch;
    for (const auto &u : line["utts"]) in_batch.insert(u["frontend"].get<std::string>());
    if (in_batch.size() > 1) any_mixed_batch = true;
  }
  CHECK(any_mixed_batch);
}

TEST_CASE("the masked prediction loss comes down on a fixed tiny task") {
  TempDir tmp("fat_prov");
  std::string manifest = WriteCorpus(tmp, 2, 3000, 4, "fit");
  SslEncoder model(TinyEncoder(), FusionConfig{}, 7);
  PretrainConfig cfg;
  cfg.steps = 30;
  cfg.batch_size = 2;
  cfg.lr = 5e-3;
  cfg.warmup_steps = 0;
  PretrainResult res =
      BaselinePretrain(&model, manifest, tmp.Path("fit"), MaskingConfig{}, cfg, tmp.Path("out"));
  REQUIRE(res.losses.size() == 30);
  double head = 0.0, tail = 0.0;
  for (int i = 0; i < 5; ++i) {
    head += res.losses[static_cast<size_t>(i)];
    tail += res.losses[res.losses.size() - 1 - static_cast<size_t>(i)];
  }
  CHECK(tail / 5.0 < head / 5.0);
}

TEST_CASE("provenance lines carry the per-utterance draw record") {
  TempDir tmp("fat_imst_one");
  std::string manifest = WriteCorpus(tmp, 2, 3000, 4, "prov");
  NoiseSource noise = TwoNoises(5000);
  ActivePool pool = NamedIdentityPool({"a", "b"});
  FatConfig fat;
  fat.snr_low_db = 2.0;
  fat.snr_high_db = 4.0;
  ImstConfig imst;
  imst.segment_length_s = 0.05;
  PretrainConfig cfg;
  cfg.steps = 2;
  cfg.batch_size = 2;
  SslEncoder model(TinyEncoder(), FusionConfig{}, 7);
  PretrainResult res = Pretrain(&model, manifest, tmp.Path("prov"), pool, noise, fat, &imst,
                                MaskingConfig{}, cfg, tmp.Path("out"));
  auto lines = JsonLines(res.provenance_jsonl);
  REQUIRE(lines.size() == 2);
  for (size_t step = 0; step < lines.size(); ++step) {
    CHECK(lines[step]["step"] == static_cast<int64_t>(step));
    REQUIRE(lines[step]["utts"].size() == 2);
    for (const auto &u : lines[step]["utts"]) {
      CHECK(u.contains("id"));
      CHECK((u["frontend"] == "a" || u["frontend"] == "b"));
      CHECK((u["noise"] == "hum" || u["noise"] == "babble"));
      double snr = u["snr_db"].get<double>();
      CHECK(snr >= 2.0);
      CHECK(snr <= 4.0);
      CHECK(u["imst_styles"].is_array());
      CHECK(u["imst_styles"].size() == u["imst_frontends"].size());
    }
  }
}
