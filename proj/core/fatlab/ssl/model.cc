// fatlab/ssl/model.cc

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

#include "fatlab/ssl/model.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <utility>

#include "json.hpp"

#include "fatlab/numerics/init.h"
#include "fatlab/numerics/rng.h"
#include "fatlab/util/check.h"

namespace fatlab {
namespace ssl {

using numerics::Var;

namespace {

// Multi-head scaled dot-product attention; self-attention when q_in and
// kv_in are the same node, cross-attention otherwise. Appends one
// row-stochastic matrix per head to the trace.
Var Mha(const Var &q_in, const Var &kv_in, const Var &q_w, const Var &q_b,
        const Var &k_w, const Var &k_b, const Var &v_w, const Var &v_b,
        const Var &o_w, const Var &o_b, int64_t heads, ForwardTrace *trace) {
  int64_t dim = q_w->value.shape()[1];
  int64_t dh = dim / heads;
  double scale = 1.0 / std::sqrt(static_cast<double>(dh));
  Var q = numerics::Add(numerics::Matmul(q_in, q_w), q_b);
  Var k = numerics::Add(numerics::Matmul(kv_in, k_w), k_b);
  Var v = numerics::Add(numerics::Matmul(kv_in, v_w), v_b);
  std::vector<Var> outs;
  outs.reserve(static_cast<size_t>(heads));
  for (int64_t h = 0; h < heads; ++h) {
    Var qh = numerics::Slice(q, 1, h * dh, dh);
    Var kh = numerics::Slice(k, 1, h * dh, dh);
    Var vh = numerics::Slice(v, 1, h * dh, dh);
    Var probs = numerics::Softmax(
        numerics::ScalarMul(numerics::Matmul(qh, numerics::Transpose(kh)), scale));
    if (trace) trace->attention_rows.push_back(probs->value);
    outs.push_back(numerics::Matmul(probs, vh));
  }
  return numerics::Add(numerics::Matmul(numerics::Concat(outs, 1), o_w), o_b);
}

}  // namespace

SslEncoder::SslEncoder(const EncoderConfig &enc, const FusionConfig &fusion, uint64_t seed)
    : enc_(enc), fusion_cfg_(fusion), seed_(seed) {
  FATLAB_CHECK(!enc_.conv.empty()) << "(encoder needs at least one conv layer)";
  int64_t stride_prod = 1;
  for (const auto &l : enc_.conv) {
    FATLAB_CHECK(l.channels >= 1 && l.kernel >= 1 && l.stride >= 1)
        << "(bad conv layer spec " << l.channels << "/" << l.kernel << "/" << l.stride << ")";
    stride_prod *= l.stride;
  }
  FATLAB_CHECK(stride_prod == kDownsample)
      << "(conv stride product " << stride_prod << " must equal " << kDownsample
      << " so encoder frames match the target frame rate)";
  FATLAB_CHECK(enc_.model_dim >= 1 && enc_.num_heads >= 1 &&
               enc_.model_dim % enc_.num_heads == 0)
      << "(model_dim " << enc_.model_dim << " not divisible by num_heads "
      << enc_.num_heads << ")";
  FATLAB_CHECK(enc_.num_blocks >= 1) << "(num_blocks " << enc_.num_blocks << ")";
  FATLAB_CHECK(enc_.ffn_dim >= 1) << "(ffn_dim " << enc_.ffn_dim << ")";
  FATLAB_CHECK(enc_.num_classes >= 2) << "(num_classes " << enc_.num_classes << ")";
  FATLAB_CHECK(enc_.max_frames >= 1) << "(max_frames " << enc_.max_frames << ")";

  numerics::Rng rng = numerics::Rng::Derive(seed, numerics::Rng::kInit);
  auto tn = [&](const std::string &name, std::vector<int64_t> shape) {
    Var v = numerics::ParamTruncNormal(&rng, name, std::move(shape));
    registry_.Register(name, v);
    return v;
  };
  auto zeros = [&](const std::string &name, std::vector<int64_t> shape) {
    Var v = numerics::ParamZeros(name, std::move(shape));
    registry_.Register(name, v);
    return v;
  };
  auto ones = [&](const std::string &name, std::vector<int64_t> shape) {
    Var v = numerics::ParamFull(name, std::move(shape), 1.0);
    registry_.Register(name, v);
    return v;
  };

  // Shared weights first, fusion last: models differing only in fusion get
  // bitwise-identical shared initialization from the same seed.
  int64_t d = enc_.model_dim;
  int64_t in_ch = 1;
  for (size_t i = 0; i < enc_.conv.size(); ++i) {
    const auto &spec = enc_.conv[i];
    std::string p = "conv" + std::to_string(i) + ".";
    ConvLayer l;
    l.w = tn(p + "w", {spec.channels, in_ch, spec.kernel});
    l.b = zeros(p + "b", {spec.channels});
    l.ln_g = ones(p + "ln_g", {spec.channels});
    l.ln_b = zeros(p + "ln_b", {spec.channels});
    conv_.push_back(std::move(l));
    in_ch = spec.channels;
  }
  proj_w_ = tn("proj.w", {in_ch, d});
  proj_b_ = zeros("proj.b", {d});
  ex_ln_g_ = ones("extract_ln.g", {d});
  ex_ln_b_ = zeros("extract_ln.b", {d});
  mask_embed_ = tn("mask_embed", {d});
  pos_ = tn("pos_emb", {enc_.max_frames, d});
  for (int64_t b = 0; b < enc_.num_blocks; ++b) {
    std::string p = "block" + std::to_string(b) + ".";
    Block blk;
    blk.q_w = tn(p + "q_w", {d, d});
    blk.q_b = zeros(p + "q_b", {d});
    blk.k_w = tn(p + "k_w", {d, d});
    blk.k_b = zeros(p + "k_b", {d});
    blk.v_w = tn(p + "v_w", {d, d});
    blk.v_b = zeros(p + "v_b", {d});
    blk.o_w = tn(p + "o_w", {d, d});
    blk.o_b = zeros(p + "o_b", {d});
    blk.ln1_g = ones(p + "ln1_g", {d});
    blk.ln1_b = zeros(p + "ln1_b", {d});
    blk.f1_w = tn(p + "f1_w", {d, enc_.ffn_dim});
    blk.f1_b = zeros(p + "f1_b", {enc_.ffn_dim});
    blk.f2_w = tn(p + "f2_w", {enc_.ffn_dim, d});
    blk.f2_b = zeros(p + "f2_b", {d});
    blk.ln2_g = ones(p + "ln2_g", {d});
    blk.ln2_b = zeros(p + "ln2_b", {d});
    blocks_.push_back(std::move(blk));
  }
  head_w_ = tn("head.w", {d, enc_.num_classes});
  head_b_ = zeros("head.b", {enc_.num_classes});

  fusion_after_block_ = FusionSites(fusion_cfg_.placement, enc_.num_blocks);
  for (size_t s = 0; s < fusion_after_block_.size(); ++s) {
    std::string p = "fusion" + std::to_string(s) + ".";
    FusionSite site;
    switch (fusion_cfg_.variant) {
      case FusionVariant::kOA:
        // One scalar per site; zero keeps the aux branch silent at init.
        site.alpha = zeros(p + "alpha", {1});
        break;
      case FusionVariant::kSF:
        // Zero weights make the gate exactly 0.5 at init.
        site.sf_w = zeros(p + "sf_w", {2 * d, d});
        site.sf_b = zeros(p + "sf_b", {d});
        break;
      case FusionVariant::kDA:
        // Zero output projection makes the residual an exact identity at
        // init even though q/k/v start random.
        site.q_w = tn(p + "q_w", {d, d});
        site.q_b = zeros(p + "q_b", {d});
        site.k_w = tn(p + "k_w", {d, d});
        site.k_b = zeros(p + "k_b", {d});
        site.v_w = tn(p + "v_w", {d, d});
        site.v_b = zeros(p + "v_b", {d});
        site.o_w = zeros(p + "o_w", {d, d});
        site.o_b = zeros(p + "o_b", {d});
        break;
    }
    fusion_sites_.push_back(std::move(site));
  }
}

int64_t SslEncoder::ReceptiveField() const {
  int64_t rf = 1;
  int64_t jump = 1;
  for (const auto &l : enc_.conv) {
    rf += (l.kernel - 1) * jump;
    jump *= l.stride;
  }
  return rf;
}

int64_t SslEncoder::ConvFrames(int64_t samples) const {
  int64_t len = samples;
  for (const auto &l : enc_.conv) {
    if (len < l.kernel) {
      FATLAB_ERR << "conv_extract: input of " << samples
                 << " samples is shorter than the " << ReceptiveField()
                 << "-sample receptive field";
    }
    len = (len - l.kernel) / l.stride + 1;
  }
  return len;
}

Var SslEncoder::ConvExtract(const audio::Waveform &w) const {
  FATLAB_CHECK(w.sample_rate == 16000)
      << "(encoder expects 16 kHz input, got " << w.sample_rate << ")";
  ConvFrames(w.size());
  numerics::Tensor in({1, w.size()});
  std::copy(w.samples.begin(), w.samples.end(), in.data());
  Var x = numerics::MakeConst(std::move(in));
  for (size_t i = 0; i < conv_.size(); ++i) {
    x = numerics::Conv1d(x, conv_[i].w, conv_[i].b, enc_.conv[i].stride, /*pad=*/0);
    // Normalize over channels per frame, then gelu.
    x = numerics::Transpose(x);
    x = numerics::Gelu(numerics::LayerNorm(x, conv_[i].ln_g, conv_[i].ln_b));
    x = numerics::Transpose(x);
  }
  x = numerics::Transpose(x);  // [frames, channels]
  x = numerics::Add(numerics::Matmul(x, proj_w_), proj_b_);
  return numerics::LayerNorm(x, ex_ln_g_, ex_ln_b_);
}

Var SslEncoder::Embed(const audio::Waveform &w, const std::vector<int64_t> *mask) const {
  Var x = ConvExtract(w);
  int64_t frames = x->value.shape()[0];
  if (mask != nullptr && !mask->empty()) {
    for (int64_t idx : *mask) {
      FATLAB_CHECK(idx >= 0 && idx < frames)
          << "(mask index " << idx << " outside " << frames << " frames)";
    }
    x = numerics::ReplaceRows(x, *mask, mask_embed_);
  }
  FATLAB_CHECK(frames <= enc_.max_frames)
      << "(utterance of " << frames << " frames exceeds the positional table of "
      << enc_.max_frames << ")";
  std::vector<int64_t> idx(static_cast<size_t>(frames));
  std::iota(idx.begin(), idx.end(), 0);
  return numerics::Add(x, numerics::GatherRows(pos_, idx));
}

Var SslEncoder::RunBlock(const Block &b, const Var &x, ForwardTrace *trace) const {
  Var attn = Mha(x, x, b.q_w, b.q_b, b.k_w, b.k_b, b.v_w, b.v_b, b.o_w, b.o_b,
                 enc_.num_heads, trace);
  Var h = numerics::LayerNorm(numerics::Add(x, attn), b.ln1_g, b.ln1_b);
  Var ff = numerics::Gelu(numerics::Add(numerics::Matmul(h, b.f1_w), b.f1_b));
  ff = numerics::Add(numerics::Matmul(ff, b.f2_w), b.f2_b);
  return numerics::LayerNorm(numerics::Add(h, ff), b.ln2_g, b.ln2_b);
}

Var SslEncoder::ApplyFusion(const FusionSite &site, const Var &h_main,
                            const Var &h_aux, ForwardTrace *trace) const {
  Var out;
  switch (fusion_cfg_.variant) {
    case FusionVariant::kOA:
      out = numerics::Add(h_main, numerics::Mul(h_aux, site.alpha));
      break;
    case FusionVariant::kSF: {
      Var g = numerics::Sigmoid(numerics::Add(
          numerics::Matmul(numerics::Concat({h_main, h_aux}, 1), site.sf_w), site.sf_b));
      Var inv = numerics::ScalarAdd(numerics::Neg(g), 1.0);
      out = numerics::Add(numerics::Mul(g, h_main), numerics::Mul(inv, h_aux));
      break;
    }
    case FusionVariant::kDA:
      out = numerics::Add(
          h_main, Mha(h_main, h_aux, site.q_w, site.q_b, site.k_w, site.k_b,
                      site.v_w, site.v_b, site.o_w, site.o_b, enc_.num_heads, trace));
      break;
  }
  if (trace) trace->fusion.push_back({h_main->value, h_aux->value, out->value});
  return out;
}

ForwardResult SslEncoder::ForwardTwoBranch(const audio::Waveform &enhanced,
                                           const audio::Waveform &noisy,
                                           const std::vector<int64_t> *mask,
                                           ForwardTrace *trace) const {
  if (enhanced.size() != noisy.size()) {
    FATLAB_ERR << "two-branch forward: branch lengths differ (" << enhanced.size()
               << " vs " << noisy.size() << " samples)";
  }
  FATLAB_CHECK(enhanced.sample_rate == noisy.sample_rate)
      << "(branch sample rates differ)";
  Var h_main = Embed(enhanced, mask);
  Var h_aux = Embed(noisy, nullptr);
  ForwardResult out;
  size_t site = 0;
  for (int64_t b = 0; b < enc_.num_blocks; ++b) {
    h_main = RunBlock(blocks_[static_cast<size_t>(b)], h_main, trace);
    h_aux = RunBlock(blocks_[static_cast<size_t>(b)], h_aux, trace);
    if (site < fusion_after_block_.size() && fusion_after_block_[site] == b) {
      h_main = ApplyFusion(fusion_sites_[site], h_main, h_aux, trace);
      ++site;
    }
    out.layers.push_back(h_main);
  }
  out.logits = numerics::Add(numerics::Matmul(h_main, head_w_), head_b_);
  return out;
}

ForwardResult SslEncoder::ForwardSingle(const audio::Waveform &w,
                                        const std::vector<int64_t> *mask,
                                        ForwardTrace *trace) const {
  Var h = Embed(w, mask);
  ForwardResult out;
  for (int64_t b = 0; b < enc_.num_blocks; ++b) {
    h = RunBlock(blocks_[static_cast<size_t>(b)], h, trace);
    out.layers.push_back(h);
  }
  out.logits = numerics::Add(numerics::Matmul(h, head_w_), head_b_);
  return out;
}

std::vector<Var> SslEncoder::TrainableParams(bool include_fusion) const {
  std::vector<Var> out;
  for (const auto &e : registry_.entries()) {
    if (!include_fusion && e.first.rfind("fusion", 0) == 0) continue;
    out.push_back(e.second);
  }
  return out;
}

int64_t SslEncoder::FusionParamCount() const {
  int64_t n = 0;
  for (const auto &e : registry_.entries()) {
    if (e.first.rfind("fusion", 0) == 0) n += e.second->value.numel();
  }
  return n;
}

void SslEncoder::Save(const std::string &path, const MaskingConfig &masking,
                      const std::string &provenance_json) const {
  registry_.Save(path);
  nlohmann::json j;
  {
    std::ifstream in(path + ".json");
    FATLAB_CHECK(static_cast<bool>(in)) << "(sidecar vanished: " << path << ".json)";
    in >> j;
  }
  nlohmann::json conv = nlohmann::json::array();
  for (const auto &l : enc_.conv) {
    conv.push_back({l.channels, l.kernel, l.stride});
  }
  j["model"] = {
      {"encoder",
       {{"conv", conv},
        {"num_blocks", enc_.num_blocks},
        {"model_dim", enc_.model_dim},
        {"num_heads", enc_.num_heads},
        {"ffn_dim", enc_.ffn_dim},
        {"num_classes", enc_.num_classes},
        {"max_frames", enc_.max_frames}}},
      {"fusion",
       {{"variant", ToString(fusion_cfg_.variant)},
        {"placement", ToString(fusion_cfg_.placement)}}},
      {"masking",
       {{"mask_prob", masking.mask_prob},
        {"span_length", masking.span_length},
        {"min_masks", masking.min_masks}}},
      {"init_seed", seed_},
  };
  if (!provenance_json.empty()) {
    try {
      j["provenance"] = nlohmann::json::parse(provenance_json);
    } catch (const std::exception &e) {
      FATLAB_ERR << "model save: bad provenance json: " << e.what();
    }
  }
  std::ofstream out(path + ".json", std::ios::trunc);
  if (!out) FATLAB_ERR << "model save: cannot rewrite sidecar: " << path << ".json";
  out << j.dump(2) << "\n";
}

SslEncoder SslEncoder::Load(const std::string &path, MaskingConfig *masking,
                            std::string *provenance_json) {
  nlohmann::json j;
  {
    std::ifstream in(path + ".json");
    if (!in) FATLAB_ERR << "model load: missing sidecar: " << path << ".json";
    try {
      in >> j;
    } catch (const std::exception &e) {
      FATLAB_ERR << "model load: bad sidecar " << path << ".json: " << e.what();
    }
  }
  if (!j.contains("model")) {
    FATLAB_ERR << "model load: sidecar has no model section: " << path << ".json";
  }
  const auto &m = j["model"];
  EncoderConfig enc;
  enc.conv.clear();
  for (const auto &l : m["encoder"]["conv"]) {
    enc.conv.push_back({l.at(0).get<int64_t>(), l.at(1).get<int64_t>(), l.at(2).get<int64_t>()});
  }
  enc.num_blocks = m["encoder"]["num_blocks"].get<int64_t>();
  enc.model_dim = m["encoder"]["model_dim"].get<int64_t>();
  enc.num_heads = m["encoder"]["num_heads"].get<int64_t>();
  enc.ffn_dim = m["encoder"]["ffn_dim"].get<int64_t>();
  enc.num_classes = m["encoder"]["num_classes"].get<int64_t>();
  enc.max_frames = m["encoder"]["max_frames"].get<int64_t>();
  FusionConfig fc;
  fc.variant = VariantFromString(m["fusion"]["variant"].get<std::string>());
  fc.placement = PlacementFromString(m["fusion"]["placement"].get<std::string>());
  SslEncoder model(enc, fc, m.value("init_seed", uint64_t{0}));
  model.registry_.Load(path);
  if (masking != nullptr && m.contains("masking")) {
    masking->mask_prob = m["masking"]["mask_prob"].get<double>();
    masking->span_length = m["masking"]["span_length"].get<int64_t>();
    masking->min_masks = m["masking"]["min_masks"].get<int64_t>();
  }
  if (provenance_json != nullptr) {
    *provenance_json = j.contains("provenance") ? j["provenance"].dump() : std::string();
  }
  return model;
}

Var MaskedPredictionLoss(const Var &logits, const std::vector<int64_t> &targets,
                         const std::vector<int64_t> &mask) {
  FATLAB_CHECK(logits != nullptr && logits->value.rank() == 2)
      << "(masked loss expects [frames, K] logits)";
  if (mask.empty()) FATLAB_ERR << "masked loss: empty mask";
  int64_t frames = std::min(logits->value.shape()[0],
                            static_cast<int64_t>(targets.size()));
  FATLAB_CHECK(frames >= 1) << "(masked loss with no target frames)";
  int64_t k = logits->value.shape()[1];
  std::vector<int64_t> rows;
  std::vector<int64_t> ids;
  for (int64_t t : mask) {
    FATLAB_CHECK(t >= 0) << "(negative mask index " << t << ")";
    if (t >= frames) continue;
    int64_t id = targets[static_cast<size_t>(t)];
    FATLAB_CHECK(id >= 0 && id < k)
        << "(target id " << id << " outside [0, " << k << "))";
    rows.push_back(t);
    ids.push_back(id);
  }
  if (rows.empty()) {
    FATLAB_ERR << "masked loss: no masked frame survives truncation to " << frames
               << " frames";
  }
  Var sel = numerics::GatherRows(logits, rows);
  return numerics::Mean(numerics::CrossEntropyRows(sel, ids));
}

}  // namespace ssl
}  // namespace fatlab
