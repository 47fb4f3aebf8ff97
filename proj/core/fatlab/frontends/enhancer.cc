// fatlab/frontends/enhancer.cc

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

#include "fatlab/frontends/enhancer.h"

#include <algorithm>
#include <cmath>
#include <complex>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "fatlab/frontends/si_snr.h"
#include "fatlab/numerics/init.h"
#include "fatlab/numerics/ops.h"
#include "fatlab/numerics/rng.h"
#include "fatlab/util/check.h"
#include "json.hpp"

namespace fatlab {
namespace frontends {

using numerics::MakeConst;
using numerics::NoGradGuard;
using numerics::ParamZeros;
using numerics::Rng;
using numerics::Tensor;
using numerics::Var;

namespace {

constexpr double kLogFloor = 1e-6;

// Truncated-normal weight scaled by fan-in so activations stay O(1) through
// the stack regardless of kernel and channel sizes.
Var ParamFanIn(Rng *rng, numerics::ParamRegistry *reg, const std::string &name,
               std::vector<int64_t> shape) {
  int64_t fan_in = 1;
  for (size_t i = 1; i < shape.size(); ++i) fan_in *= shape[i];
  Var v = numerics::ParamTruncNormal(rng, name, std::move(shape),
                                     1.0 / std::sqrt(static_cast<double>(fan_in)));
  reg->Register(v->name, v);
  return v;
}

Var ParamZerosReg(numerics::ParamRegistry *reg, const std::string &name,
                  std::vector<int64_t> shape) {
  Var v = ParamZeros(name, std::move(shape));
  reg->Register(v->name, v);
  return v;
}

Tensor LogMagnitudes(const audio::Spectrogram &spec) {
  Tensor t({spec.frames, spec.bins});
  for (int64_t f = 0; f < spec.frames; ++f) {
    for (int64_t b = 0; b < spec.bins; ++b) {
      t[f * spec.bins + b] = std::log(std::abs(spec.at(f, b)) + kLogFloor);
    }
  }
  return t;
}

}  // namespace

std::string ToString(FrontendFamily family) {
  switch (family) {
    case FrontendFamily::kTimeDomain:
      return "time_domain";
    case FrontendFamily::kTfDomain:
      return "tf_domain";
  }
  FATLAB_ERR << "bad front-end family value";
}

FrontendFamily FamilyFromString(const std::string &name) {
  if (name == "time_domain") return FrontendFamily::kTimeDomain;
  if (name == "tf_domain") return FrontendFamily::kTfDomain;
  FATLAB_ERR << "unknown front-end family \"" << name << "\"";
}

void Frontend::CheckRate(const audio::Waveform &w) const {
  FATLAB_CHECK(w.sample_rate == spec_.sample_rate)
      << "(front-end " << spec_.id << " expects " << spec_.sample_rate << " Hz, got "
      << w.sample_rate << ")";
  FATLAB_CHECK(w.size() > 0) << "(front-end " << spec_.id << ": empty waveform)";
}

// ---------------------------------------------------------------------------
// Time domain
// ---------------------------------------------------------------------------

TimeDomainEnhancer::TimeDomainEnhancer(FrontendSpec spec) : Frontend(std::move(spec)) {
  const TimeDomainArch &a = spec_.td;
  FATLAB_CHECK(a.filters >= 1 && a.kernel >= 1 && a.stride >= 1 && a.block_channels >= 1)
      << "(time-domain arch must have positive sizes)";
  FATLAB_CHECK(a.stride <= a.kernel)
      << "(analysis stride " << a.stride << " must not exceed kernel " << a.kernel << ")";
  FATLAB_CHECK(!a.dilations.empty()) << "(mask network needs at least one block)";
  for (int64_t d : a.dilations) FATLAB_CHECK(d >= 1) << "(dilation " << d << ")";

  Rng rng = Rng::Derive(spec_.init_seed, Rng::kInit);
  enc_w_ = ParamFanIn(&rng, &registry_, "enc.w", {a.filters, 1, a.kernel});
  pre_w_ = ParamFanIn(&rng, &registry_, "pre.w", {a.block_channels, a.filters, 1});
  pre_b_ = ParamZerosReg(&registry_, "pre.b", {a.block_channels});
  for (size_t i = 0; i < a.dilations.size(); ++i) {
    std::string base = "block" + std::to_string(i);
    Var w = ParamFanIn(&rng, &registry_, base + ".w", {a.block_channels, a.block_channels, 3});
    Var b = ParamZerosReg(&registry_, base + ".b", {a.block_channels});
    blocks_.emplace_back(w, b);
  }
  mask_w_ = ParamFanIn(&rng, &registry_, "mask.w", {a.filters, a.block_channels, 1});
  mask_b_ = ParamZerosReg(&registry_, "mask.b", {a.filters});
  dec_w_ = ParamFanIn(&rng, &registry_, "dec.w", {a.filters, 1, a.kernel});
}

Var TimeDomainEnhancer::EstimateVar(const audio::Waveform &noisy) const {
  using namespace fatlab::numerics;  // NOLINT
  CheckRate(noisy);
  const TimeDomainArch &a = spec_.td;
  int64_t n = noisy.size();

  // Right-pad so the strided analysis tiles the signal; synthesis then yields
  // exactly the padded length, trimmed back to n.
  int64_t padded = std::max(n, a.kernel);
  if ((padded - a.kernel) % a.stride != 0) {
    padded += a.stride - (padded - a.kernel) % a.stride;
  }
  Tensor x({1, padded});
  for (int64_t i = 0; i < n; ++i) x[i] = noisy.samples[i];
  Var in = MakeConst(std::move(x));

  Var feats = Conv1d(in, enc_w_, nullptr, a.stride, 0);
  Var h = Relu(Conv1d(feats, pre_w_, pre_b_, 1, 0));
  for (size_t i = 0; i < blocks_.size(); ++i) {
    int64_t d = a.dilations[i];
    // pad == dilation keeps the frame count, so the residual add lines up.
    h = Add(h, Relu(Conv1d(h, blocks_[i].first, blocks_[i].second, 1, d, d)));
  }
  Var mask = Sigmoid(Conv1d(h, mask_w_, mask_b_, 1, 0));
  Var est = ConvTranspose1d(Mul(feats, mask), dec_w_, nullptr, a.stride, 0);
  return Reshape(Slice(est, 1, 0, n), {n});
}

audio::Waveform TimeDomainEnhancer::Enhance(const audio::Waveform &noisy) const {
  NoGradGuard no_grad;
  Var est = EstimateVar(noisy);
  audio::Waveform out;
  out.samples.assign(est->value.vec().begin(), est->value.vec().end());
  out.sample_rate = noisy.sample_rate;
  return out;
}

Var TimeDomainEnhancer::TrainingLoss(const audio::Waveform &noisy,
                                     const audio::Waveform &clean) const {
  FATLAB_CHECK(noisy.size() == clean.size())
      << "(training pair lengths " << noisy.size() << " vs " << clean.size() << ")";
  FATLAB_CHECK(noisy.sample_rate == clean.sample_rate)
      << "(training pair sample rates " << noisy.sample_rate << " vs " << clean.sample_rate
      << ")";
  return NegSiSnrLoss(EstimateVar(noisy), clean.samples);
}

// ---------------------------------------------------------------------------
// TF domain
// ---------------------------------------------------------------------------

TfDomainEnhancer::TfDomainEnhancer(FrontendSpec spec) : Frontend(std::move(spec)) {
  const TfDomainArch &a = spec_.tf;
  FATLAB_CHECK(a.frame_length >= 2 && a.hop >= 1 && a.hop <= a.frame_length)
      << "(tf arch: frame " << a.frame_length << ", hop " << a.hop << ")";
  FATLAB_CHECK(a.hidden >= 1) << "(tf arch: hidden width " << a.hidden << ")";

  int64_t bins = a.frame_length / 2 + 1;
  Rng rng = Rng::Derive(spec_.init_seed, Rng::kInit);
  in_w_ = ParamFanIn(&rng, &registry_, "in.w", {bins, a.hidden});
  in_b_ = ParamZerosReg(&registry_, "in.b", {a.hidden});
  if (a.recurrent) {
    gru_wz_ = ParamFanIn(&rng, &registry_, "gru.wz", {a.hidden, a.hidden});
    gru_uz_ = ParamFanIn(&rng, &registry_, "gru.uz", {a.hidden, a.hidden});
    gru_bz_ = ParamZerosReg(&registry_, "gru.bz", {a.hidden});
    gru_wr_ = ParamFanIn(&rng, &registry_, "gru.wr", {a.hidden, a.hidden});
    gru_ur_ = ParamFanIn(&rng, &registry_, "gru.ur", {a.hidden, a.hidden});
    gru_br_ = ParamZerosReg(&registry_, "gru.br", {a.hidden});
    gru_wh_ = ParamFanIn(&rng, &registry_, "gru.wh", {a.hidden, a.hidden});
    gru_uh_ = ParamFanIn(&rng, &registry_, "gru.uh", {a.hidden, a.hidden});
    gru_bh_ = ParamZerosReg(&registry_, "gru.bh", {a.hidden});
  }
  out_w_ = ParamFanIn(&rng, &registry_, "out.w", {a.hidden, bins});
  out_b_ = ParamZerosReg(&registry_, "out.b", {bins});
}

Var TfDomainEnhancer::MaskVar(const audio::Spectrogram &noisy_spec) const {
  using namespace fatlab::numerics;  // NOLINT
  const TfDomainArch &a = spec_.tf;
  FATLAB_CHECK(noisy_spec.frame_length == a.frame_length && noisy_spec.hop == a.hop)
      << "(spectrogram " << noisy_spec.frame_length << "/" << noisy_spec.hop
      << " does not match the front-end's " << a.frame_length << "/" << a.hop << ")";

  Var x = MakeConst(LogMagnitudes(noisy_spec));
  Var proj = Add(Matmul(x, in_w_), in_b_);
  Var hidden;
  if (a.recurrent) {
    Var h = MakeConst(Tensor::Zeros({1, a.hidden}));
    std::vector<Var> states;
    states.reserve(static_cast<size_t>(noisy_spec.frames));
    for (int64_t t = 0; t < noisy_spec.frames; ++t) {
      Var xt = Slice(proj, 0, t, 1);
      Var z = Sigmoid(Add(Add(Matmul(xt, gru_wz_), Matmul(h, gru_uz_)), gru_bz_));
      Var r = Sigmoid(Add(Add(Matmul(xt, gru_wr_), Matmul(h, gru_ur_)), gru_br_));
      Var cand = TanhOp(Add(Add(Matmul(xt, gru_wh_), Matmul(Mul(r, h), gru_uh_)), gru_bh_));
      h = Add(h, Mul(z, Sub(cand, h)));
      states.push_back(h);
    }
    hidden = states.size() == 1 ? states[0] : Concat(states, 0);
  } else {
    hidden = Gelu(proj);
  }
  return Sigmoid(Add(Matmul(hidden, out_w_), out_b_));
}

audio::Waveform ApplyMagnitudeMask(const audio::Spectrogram &spec, const Tensor &mask) {
  FATLAB_CHECK(mask.shape().size() == 2 && mask.shape()[0] == spec.frames &&
               mask.shape()[1] == spec.bins)
      << "(mask shape must be [" << spec.frames << "," << spec.bins << "])";
  audio::Spectrogram gated = spec;
  for (int64_t f = 0; f < spec.frames; ++f) {
    for (int64_t b = 0; b < spec.bins; ++b) {
      gated.data[static_cast<size_t>(f * spec.bins + b)] *= mask[f * spec.bins + b];
    }
  }
  return audio::Istft(gated);
}

audio::Waveform TfDomainEnhancer::Enhance(const audio::Waveform &noisy) const {
  NoGradGuard no_grad;
  CheckRate(noisy);
  audio::Spectrogram s =
      audio::Stft(noisy, spec_.tf.frame_length, spec_.tf.hop, audio::Window::kHann);
  Var mask = MaskVar(s);
  return ApplyMagnitudeMask(s, mask->value);
}

Var TfDomainEnhancer::TrainingLoss(const audio::Waveform &noisy,
                                   const audio::Waveform &clean) const {
  using namespace fatlab::numerics;  // NOLINT
  CheckRate(noisy);
  FATLAB_CHECK(noisy.size() == clean.size())
      << "(training pair lengths " << noisy.size() << " vs " << clean.size() << ")";
  FATLAB_CHECK(noisy.sample_rate == clean.sample_rate)
      << "(training pair sample rates " << noisy.sample_rate << " vs " << clean.sample_rate
      << ")";
  audio::Spectrogram sn =
      audio::Stft(noisy, spec_.tf.frame_length, spec_.tf.hop, audio::Window::kHann);
  audio::Spectrogram sc =
      audio::Stft(clean, spec_.tf.frame_length, spec_.tf.hop, audio::Window::kHann);

  // Ideal amplitude mask, clipped to [0, 1] like the sigmoid output.
  Tensor iam({sn.frames, sn.bins});
  for (int64_t f = 0; f < sn.frames; ++f) {
    for (int64_t b = 0; b < sn.bins; ++b) {
      double num = std::abs(sc.at(f, b));
      double den = std::max(std::abs(sn.at(f, b)), 1e-10);
      iam[f * sn.bins + b] = std::min(num / den, 1.0);
    }
  }
  Var diff = Sub(MaskVar(sn), MakeConst(std::move(iam)));
  return Mean(Mul(diff, diff));
}

// ---------------------------------------------------------------------------
// Factory and checkpoints
// ---------------------------------------------------------------------------

std::unique_ptr<Frontend> CreateFrontend(const FrontendSpec &spec) {
  FATLAB_CHECK(!spec.id.empty()) << "(front-end spec needs an id)";
  switch (spec.family) {
    case FrontendFamily::kTimeDomain:
      return std::make_unique<TimeDomainEnhancer>(spec);
    case FrontendFamily::kTfDomain:
      return std::make_unique<TfDomainEnhancer>(spec);
  }
  FATLAB_ERR << "bad front-end family value";
}

void SaveFrontend(const Frontend &frontend, const std::string &path) {
  std::filesystem::path parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  frontend.registry().Save(path);

  const FrontendSpec &s = frontend.spec();
  std::string sidecar = path + ".json";
  std::ifstream in(sidecar);
  FATLAB_CHECK(in.good()) << "(checkpoint sidecar " << sidecar << " missing)";
  nlohmann::json j = nlohmann::json::parse(in, nullptr, /*allow_exceptions=*/false);
  in.close();
  FATLAB_CHECK(!j.is_discarded()) << "(checkpoint sidecar " << sidecar << " is not valid JSON)";

  nlohmann::json hp;
  if (s.family == FrontendFamily::kTimeDomain) {
    hp = {{"filters", s.td.filters},
          {"kernel", s.td.kernel},
          {"stride", s.td.stride},
          {"block_channels", s.td.block_channels},
          {"dilations", s.td.dilations}};
  } else {
    hp = {{"frame_length", s.tf.frame_length},
          {"hop", s.tf.hop},
          {"hidden", s.tf.hidden},
          {"recurrent", s.tf.recurrent}};
  }
  j["frontend"] = {{"id", s.id},
                   {"family", ToString(s.family)},
                   {"hyperparameters", hp},
                   {"training_snr_range", {s.snr_low_db, s.snr_high_db}},
                   {"seed", s.init_seed},
                   {"sample_rate", s.sample_rate},
                   {"seen_in_training", s.seen_in_training}};

  std::ofstream out(sidecar, std::ios::trunc);
  FATLAB_CHECK(out.good()) << "(cannot rewrite " << sidecar << ")";
  out << j.dump(2) << "\n";
  FATLAB_CHECK(out.good()) << "(short write to " << sidecar << ")";
}

std::unique_ptr<Frontend> LoadFrontend(const std::string &path) {
  std::string sidecar = path + ".json";
  std::ifstream in(sidecar);
  FATLAB_CHECK(in.good()) << "(checkpoint sidecar " << sidecar << " missing)";
  nlohmann::json j = nlohmann::json::parse(in, nullptr, /*allow_exceptions=*/false);
  FATLAB_CHECK(!j.is_discarded()) << "(checkpoint sidecar " << sidecar << " is not valid JSON)";
  FATLAB_CHECK(j.contains("frontend"))
      << "(" << sidecar << " has no front-end description; not a front-end checkpoint)";
  const nlohmann::json &f = j["frontend"];

  FrontendSpec spec;
  spec.id = f.at("id").get<std::string>();
  spec.family = FamilyFromString(f.at("family").get<std::string>());
  spec.init_seed = f.at("seed").get<uint64_t>();
  spec.sample_rate = f.value("sample_rate", 16000);
  spec.seen_in_training = f.value("seen_in_training", true);
  if (f.contains("training_snr_range")) {
    spec.snr_low_db = f["training_snr_range"].at(0).get<double>();
    spec.snr_high_db = f["training_snr_range"].at(1).get<double>();
  }
  const nlohmann::json &hp = f.at("hyperparameters");
  if (spec.family == FrontendFamily::kTimeDomain) {
    spec.td.filters = hp.at("filters").get<int64_t>();
    spec.td.kernel = hp.at("kernel").get<int64_t>();
    spec.td.stride = hp.at("stride").get<int64_t>();
    spec.td.block_channels = hp.at("block_channels").get<int64_t>();
    spec.td.dilations = hp.at("dilations").get<std::vector<int64_t>>();
  } else {
    spec.tf.frame_length = hp.at("frame_length").get<int64_t>();
    spec.tf.hop = hp.at("hop").get<int64_t>();
    spec.tf.hidden = hp.at("hidden").get<int64_t>();
    spec.tf.recurrent = hp.at("recurrent").get<bool>();
  }

  std::unique_ptr<Frontend> fe = CreateFrontend(spec);
  fe->registry().Load(path);
  return fe;
}

}  // namespace frontends
}  // namespace fatlab
