// fatlab/frontends/train.cc

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

#include "fatlab/frontends/train.h"

#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <utility>

#include "fatlab/audio/manifest.h"
#include "fatlab/audio/wav.h"
#include "fatlab/frontends/enhancer.h"
#include "fatlab/frontends/si_snr.h"
#include "fatlab/numerics/autograd.h"
#include "fatlab/numerics/checkpoint.h"
#include "fatlab/numerics/optim.h"
#include "fatlab/numerics/rng.h"
#include "fatlab/numerics/tensor.h"
#include "fatlab/util/check.h"

namespace fatlab {
namespace frontends {

using numerics::Rng;
using numerics::Tensor;
using numerics::Var;

namespace {

struct Pair {
  audio::Waveform noisy;
  audio::Waveform clean;
};

std::vector<Pair> LoadPairs(const PairedManifests &split) {
  std::vector<audio::ManifestEntry> noisy = audio::ReadManifest(split.noisy);
  std::vector<audio::ManifestEntry> clean = audio::ReadManifest(split.clean);
  FATLAB_CHECK(!noisy.empty()) << "(empty manifest " << split.noisy << ")";
  std::unordered_map<std::string, const audio::ManifestEntry *> by_id;
  for (const audio::ManifestEntry &e : clean) by_id[e.id] = &e;

  std::vector<Pair> pairs;
  pairs.reserve(noisy.size());
  for (const audio::ManifestEntry &e : noisy) {
    auto it = by_id.find(e.id);
    FATLAB_CHECK(it != by_id.end())
        << "(utterance " << e.id << " from " << split.noisy << " has no clean counterpart in "
        << split.clean << ")";
    Pair p;
    p.noisy = audio::LoadWav(audio::ResolveAudioPath(split.noisy, e.audio));
    p.clean = audio::LoadWav(audio::ResolveAudioPath(split.clean, it->second->audio));
    FATLAB_CHECK(p.noisy.size() == p.clean.size())
        << "(utterance " << e.id << ": noisy has " << p.noisy.size() << " samples, clean has "
        << p.clean.size() << ")";
    // The mixer may rescale the mixture to dodge clipping; the clean
    // component inside it is scaled by the same factor.
    if (e.rescale != 1.0) {
      for (double &s : p.clean.samples) s *= e.rescale;
    }
    pairs.push_back(std::move(p));
  }
  return pairs;
}

std::vector<Tensor> Snapshot(const numerics::ParamRegistry &reg) {
  std::vector<Tensor> snap;
  snap.reserve(reg.entries().size());
  for (const auto &e : reg.entries()) snap.push_back(e.second->value);
  return snap;
}

void Restore(numerics::ParamRegistry *reg, const std::vector<Tensor> &snap) {
  FATLAB_CHECK(snap.size() == reg->entries().size()) << "(snapshot size mismatch)";
  for (size_t i = 0; i < snap.size(); ++i) reg->entries()[i].second->value = snap[i];
}

double MeanValSiSnr(const Frontend &fe, const std::vector<Pair> &val) {
  double sum = 0.0;
  for (const Pair &p : val) sum += SiSnrDb(fe.Enhance(p.noisy), p.clean);
  return sum / static_cast<double>(val.size());
}

Pair CropPair(const Pair &p, int64_t crop, Rng *rng) {
  int64_t n = p.noisy.size();
  if (crop <= 0 || n <= crop) return p;
  int64_t offset = rng->UniformInt(n - crop + 1);
  Pair out;
  out.noisy.sample_rate = p.noisy.sample_rate;
  out.clean.sample_rate = p.clean.sample_rate;
  out.noisy.samples.assign(p.noisy.samples.begin() + offset,
                           p.noisy.samples.begin() + offset + crop);
  out.clean.samples.assign(p.clean.samples.begin() + offset,
                           p.clean.samples.begin() + offset + crop);
  return out;
}

}  // namespace

TrainFrontendResult TrainFrontend(const FrontendSpec &spec, const PairedManifests &train,
                                  const PairedManifests &val, const std::string &out_checkpoint,
                                  const TrainFrontendConfig &cfg) {
  FATLAB_CHECK(cfg.epochs >= 0) << "(epochs " << cfg.epochs << ")";
  FATLAB_CHECK(cfg.lr > 0.0) << "(learning rate " << cfg.lr << ")";

  std::vector<Pair> train_pairs = LoadPairs(train);
  std::vector<Pair> val_pairs = LoadPairs(val);

  std::unique_ptr<Frontend> fe = CreateFrontend(spec);
  numerics::AdamConfig adam_cfg;
  adam_cfg.lr = cfg.lr;
  numerics::Adam adam(fe->registry().Params(), adam_cfg);
  Rng rng = Rng::Derive(cfg.seed, Rng::kBatch);

  TrainFrontendResult result;
  result.checkpoint = out_checkpoint;
  auto say = [&result](const std::string &line) { result.log.push_back(line); };

  {
    std::ostringstream head;
    head << "front-end " << spec.id << " (" << ToString(spec.family) << "), "
         << fe->registry().TotalScalars() << " parameters, " << train_pairs.size()
         << " train / " << val_pairs.size() << " val pairs";
    say(head.str());
  }

  double noisy_val = 0.0;
  for (const Pair &p : val_pairs) noisy_val += SiSnrDb(p.noisy, p.clean);
  noisy_val /= static_cast<double>(val_pairs.size());
  result.noisy_val_si_snr_db = noisy_val;

  std::vector<Tensor> best = Snapshot(fe->registry());
  double best_val = MeanValSiSnr(*fe, val_pairs);
  result.best_epoch = 0;
  {
    std::ostringstream line;
    line << "init val si-snr " << best_val << " dB (noisy input " << noisy_val << " dB)";
    say(line.str());
  }

  std::vector<size_t> order(train_pairs.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;

  bool aborted = false;
  for (int64_t epoch = 1; epoch <= cfg.epochs && !aborted; ++epoch) {
    for (size_t i = order.size(); i > 1; --i) {
      int64_t j = rng.UniformInt(static_cast<int64_t>(i));
      std::swap(order[i - 1], order[static_cast<size_t>(j)]);
    }

    double epoch_loss = 0.0;
    int64_t epoch_steps = 0;
    for (size_t idx : order) {
      Pair p = CropPair(train_pairs[idx], cfg.crop_samples, &rng);
      Var loss = fe->TrainingLoss(p.noisy, p.clean);
      double loss_value = loss->value[0];
      if (!std::isfinite(loss_value)) {
        std::ostringstream line;
        line << "epoch " << epoch << " step " << result.steps
             << ": non-finite loss, aborting with the best checkpoint so far";
        say(line.str());
        aborted = true;
        break;
      }
      numerics::Backward(loss);
      adam.Step();
      adam.ZeroGrads();
      ++result.steps;
      ++epoch_steps;
      epoch_loss += loss_value;
      if (cfg.log_every > 0 && result.steps % cfg.log_every == 0) {
        std::ostringstream line;
        line << "epoch " << epoch << " step " << result.steps << " loss " << loss_value;
        say(line.str());
      }
    }
    if (aborted) break;

    double val_db = MeanValSiSnr(*fe, val_pairs);
    bool improved = val_db > best_val;
    if (improved) {
      best = Snapshot(fe->registry());
      best_val = val_db;
      result.best_epoch = epoch;
    }
    std::ostringstream line;
    line << "epoch " << epoch << " mean loss "
         << (epoch_steps > 0 ? epoch_loss / static_cast<double>(epoch_steps) : 0.0)
         << " val si-snr " << val_db << " dB" << (improved ? " (best)" : "");
    say(line.str());
  }

  Restore(&fe->registry(), best);
  result.aborted = aborted;
  result.skipped_steps = adam.skipped_steps();
  result.best_val_si_snr_db = best_val;
  {
    std::ostringstream line;
    line << "kept epoch " << result.best_epoch << " checkpoint, val si-snr " << best_val
         << " dB (" << best_val - noisy_val << " dB over noisy)";
    say(line.str());
  }

  SaveFrontend(*fe, out_checkpoint);
  std::ofstream log_out(out_checkpoint + ".log", std::ios::trunc);
  FATLAB_CHECK(log_out.good()) << "(cannot write " << out_checkpoint << ".log)";
  for (const std::string &line : result.log) log_out << line << "\n";
  return result;
}

}  // namespace frontends
}  // namespace fatlab
