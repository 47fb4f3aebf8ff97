// fatlab/fat/pretrain.cc

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

#include "fatlab/fat/pretrain.h"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "fatlab/audio/manifest.h"
#include "fatlab/audio/wav.h"
#include "fatlab/numerics/autograd.h"
#include "fatlab/numerics/ops.h"
#include "fatlab/numerics/optim.h"
#include "fatlab/numerics/rng.h"
#include "fatlab/ssl/mask.h"
#include "fatlab/targets/store.h"
#include "fatlab/util/check.h"

namespace fatlab {
namespace fat {

namespace {

using numerics::Rng;
using numerics::Var;

struct Utt {
  std::string id;
  audio::Waveform wave;
  std::vector<int64_t> targets;
};

std::vector<Utt> LoadCorpus(const std::string &manifest, const std::string &targets_dir) {
  std::vector<audio::ManifestEntry> entries = audio::ReadManifest(manifest);
  FATLAB_CHECK(!entries.empty()) << "(empty manifest " << manifest << ")";
  std::vector<Utt> corpus;
  corpus.reserve(entries.size());
  for (const audio::ManifestEntry &e : entries) {
    Utt u;
    u.id = e.id;
    u.wave = audio::LoadWav(audio::ResolveAudioPath(manifest, e.audio));
    u.targets = targets::LoadTargetIds(targets::TargetPath(targets_dir, e.id));
    FATLAB_CHECK(!u.targets.empty()) << "(no target ids for utterance " << e.id << ")";
    corpus.push_back(std::move(u));
  }
  return corpus;
}

std::string FmtG17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

nlohmann::json ProvenanceJson(const FatProvenance &p) {
  nlohmann::json j;
  j["id"] = p.utt_id;
  j["frontend"] = p.frontend_id;
  if (!p.noise_id.empty()) j["noise"] = p.noise_id;
  if (std::isfinite(p.snr_db)) j["snr_db"] = p.snr_db;
  if (!p.imst_styles.empty()) {
    j["imst_styles"] = p.imst_styles;
    j["imst_frontends"] = p.imst_frontends;
  }
  return j;
}

// One batch slot: build the loss graph for an utterance under the given span
// mask and report this slot's provenance object. Shared driver below handles
// everything that must be byte-identical between the adapted and the plain
// loops (batch draws, masks, warmup, logging, halting, checkpoints).
using SlotFn = std::function<Var(int64_t step, int64_t slot, const Utt &utt,
                                 const std::vector<int64_t> &mask, nlohmann::json *prov)>;

PretrainResult RunLoop(ssl::SslEncoder *model, const std::vector<Utt> &corpus,
                       const ssl::MaskingConfig &masking, const PretrainConfig &cfg,
                       const std::string &out_dir, const std::string &phase,
                       const SlotFn &slot_fn) {
  FATLAB_CHECK(model != nullptr) << "(null model)";
  FATLAB_CHECK(cfg.steps >= 0) << "(steps " << cfg.steps << ")";
  FATLAB_CHECK(cfg.batch_size > 0) << "(batch size " << cfg.batch_size << ")";
  FATLAB_CHECK(std::isfinite(cfg.lr) && cfg.lr > 0.0) << "(lr " << cfg.lr << ")";

  std::filesystem::create_directories(out_dir);
  PretrainResult result;
  result.loss_csv = out_dir + "/loss.csv";
  result.provenance_jsonl = out_dir + "/provenance.jsonl";

  std::ofstream csv(result.loss_csv);
  FATLAB_CHECK(csv.good()) << "(cannot write " << result.loss_csv << ")";
  csv << "step,loss,masked_frames,lr\n";
  std::ofstream prov_out(result.provenance_jsonl);
  FATLAB_CHECK(prov_out.good()) << "(cannot write " << result.provenance_jsonl << ")";

  const int64_t warmup =
      cfg.warmup_steps < 0 ? std::max<int64_t>(1, cfg.steps * 8 / 100) : cfg.warmup_steps;

  numerics::AdamConfig adam_cfg;
  adam_cfg.lr = cfg.lr;
  numerics::Adam adam(model->TrainableParams(cfg.train_fusion), adam_cfg);

  const auto checkpoint_provenance = [&](int64_t steps_done) {
    nlohmann::json j;
    j["phase"] = phase;
    j["seed"] = cfg.seed;
    j["steps"] = steps_done;
    return j.dump();
  };

  for (int64_t step = 0; step < cfg.steps; ++step) {
    Rng batch_rng = Rng::Derive(cfg.seed, Rng::kBatch, static_cast<uint64_t>(step));
    std::vector<Var> slot_losses;
    nlohmann::json prov_utts = nlohmann::json::array();
    int64_t masked_frames = 0;
    for (int64_t b = 0; b < cfg.batch_size; ++b) {
      const Utt &utt = corpus[batch_rng.UniformInt(static_cast<int64_t>(corpus.size()))];
      Rng mask_rng =
          Rng::Derive(cfg.seed, Rng::kSpanMask, static_cast<uint64_t>(step), static_cast<uint64_t>(b));
      std::vector<int64_t> mask = ssl::SpanMask(model->ConvFrames(utt.wave.size()), masking, &mask_rng);
      masked_frames += static_cast<int64_t>(mask.size());
      nlohmann::json prov;
      slot_losses.push_back(slot_fn(step, b, utt, mask, &prov));
      prov_utts.push_back(std::move(prov));
    }
    Var loss = numerics::Mean(numerics::Concat(slot_losses, 0));
    const double loss_value = loss->value.vec()[0];
    result.losses.push_back(loss_value);

    const double lr_t = step < warmup ? cfg.lr * static_cast<double>(step + 1) /
                                            static_cast<double>(warmup)
                                      : cfg.lr;
    csv << step << "," << FmtG17(loss_value) << "," << masked_frames << "," << FmtG17(lr_t)
        << "\n";
    nlohmann::json line;
    line["step"] = step;
    line["utts"] = std::move(prov_utts);
    prov_out << line.dump() << "\n";

    if (!std::isfinite(loss_value)) {
      // Keep the weights as they were before this step and leave a dump that
      // pins down exactly which draws produced the bad batch.
      result.halted_nonfinite = true;
      result.halt_dump = out_dir + "/halt_dump.json";
      nlohmann::json dump;
      dump["phase"] = phase;
      dump["seed"] = cfg.seed;
      dump["step"] = step;
      dump["loss"] = FmtG17(loss_value);
      dump["utts"] = line["utts"];
      std::ofstream dump_out(result.halt_dump);
      FATLAB_CHECK(dump_out.good()) << "(cannot write " << result.halt_dump << ")";
      dump_out << dump.dump(2) << "\n";
      break;
    }

    numerics::Backward(loss);
    adam.set_lr(lr_t);
    adam.Step();
    adam.ZeroGrads();
    result.steps_done = step + 1;

    if (cfg.checkpoint_every > 0 && (step + 1) % cfg.checkpoint_every == 0 &&
        step + 1 < cfg.steps) {
      const std::string path = out_dir + "/ckpt_" + std::to_string(step + 1) + ".bin";
      model->Save(path, masking, checkpoint_provenance(step + 1));
    }
  }

  if (!result.halted_nonfinite) {
    result.final_checkpoint = out_dir + "/final.bin";
    model->Save(result.final_checkpoint, masking, checkpoint_provenance(result.steps_done));
  }
  return result;
}

}  // namespace

PretrainResult Pretrain(ssl::SslEncoder *model, const std::string &manifest,
                        const std::string &targets_dir, const ActivePool &pool,
                        const NoiseSource &noise, const FatConfig &fat, const ImstConfig *imst,
                        const ssl::MaskingConfig &masking, const PretrainConfig &cfg,
                        const std::string &out_dir) {
  FATLAB_CHECK(pool.size() > 0) << "(empty front-end pool)";
  std::vector<Utt> corpus = LoadCorpus(manifest, targets_dir);
  const SlotFn slot_fn = [&](int64_t step, int64_t slot, const Utt &utt,
                             const std::vector<int64_t> &mask, nlohmann::json *prov) {
    const uint64_t s = static_cast<uint64_t>(step);
    const uint64_t b = static_cast<uint64_t>(slot);
    Rng noise_rng = Rng::Derive(cfg.seed, Rng::kNoise, s, b);
    Rng snr_rng = Rng::Derive(cfg.seed, Rng::kSnr, s, b);
    // Per-batch granularity replays slot 0's draw for every slot, so the
    // whole batch passes through one front-end.
    Rng pool_rng = Rng::Derive(cfg.seed, Rng::kPool, s, fat.per_utterance ? b : 0);
    FatDraws draws;
    draws.noise = &noise_rng;
    draws.snr = &snr_rng;
    draws.pool = &pool_rng;
    FatPrepared prep = FatPrepare(utt.wave, noise, pool, fat, draws);
    prep.provenance.utt_id = utt.id;
    audio::Waveform noisy_branch = prep.noisy;
    if (imst != nullptr) {
      Rng coin_rng = Rng::Derive(cfg.seed, Rng::kImstCoin, s, b);
      Rng imst_pool_rng = Rng::Derive(cfg.seed, Rng::kImstPool, s, b);
      noisy_branch = ImstApply(prep.noisy, pool, *imst, &coin_rng, &imst_pool_rng, &prep.provenance);
    }
    ssl::ForwardResult fwd = model->ForwardTwoBranch(prep.enhanced, noisy_branch, &mask);
    *prov = ProvenanceJson(prep.provenance);
    return ssl::MaskedPredictionLoss(fwd.logits, utt.targets, mask);
  };
  return RunLoop(model, corpus, masking, cfg, out_dir, "fat_pretrain", slot_fn);
}

PretrainResult BaselinePretrain(ssl::SslEncoder *model, const std::string &manifest,
                                const std::string &targets_dir,
                                const ssl::MaskingConfig &masking, const PretrainConfig &cfg,
                                const std::string &out_dir) {
  std::vector<Utt> corpus = LoadCorpus(manifest, targets_dir);
  const SlotFn slot_fn = [&](int64_t, int64_t, const Utt &utt, const std::vector<int64_t> &mask,
                             nlohmann::json *prov) {
    ssl::ForwardResult fwd = model->ForwardSingle(utt.wave, &mask);
    (*prov)["id"] = utt.id;
    return ssl::MaskedPredictionLoss(fwd.logits, utt.targets, mask);
  };
  return RunLoop(model, corpus, masking, cfg, out_dir, "baseline_pretrain", slot_fn);
}

}  // namespace fat
}  // namespace fatlab
