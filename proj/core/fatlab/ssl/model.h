// fatlab/ssl/model.h

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

#ifndef FATLAB_SSL_MODEL_H_
#define FATLAB_SSL_MODEL_H_

#include <cstdint>
#include <string>
#include <vector>

#include "fatlab/audio/wav.h"
#include "fatlab/numerics/checkpoint.h"
#include "fatlab/numerics/ops.h"
#include "fatlab/ssl/config.h"

namespace fatlab {
namespace ssl {

// Optional observation of a forward pass for tests and diagnostics.
struct ForwardTrace {
  // Row-stochastic attention matrices in evaluation order: per block one
  // matrix per self-attention head (main branch first, then aux when
  // two-branch), plus one per cross-attention head at every dual-attention
  // fusion site.
  std::vector<numerics::Tensor> attention_rows;
  struct FusionIo {
    numerics::Tensor main_in, aux_in, fused;
  };
  std::vector<FusionIo> fusion;  // one entry per fusion site, in depth order
};

struct ForwardResult {
  numerics::Var logits;                // [frames, K]
  std::vector<numerics::Var> layers;   // main-branch state after each block
};

// Two-branch masked-prediction encoder. The main branch carries the
// enhanced waveform and is the only one that is masked and the only one
// read by the prediction head; the aux branch carries the raw noisy
// waveform and feeds the main branch through one-directional fusion at the
// placement-selected block boundaries. Both branches share every encoder
// weight.
//
// Parameters are shared_ptr leaves, so copies of this class alias the same
// weights. A model is single-threaded during forward/backward; an instance
// used read-only (no optimizer touching its weights) may run forwards from
// several threads at once.
class SslEncoder {
 public:
  // Fresh parameters from Rng stream kInit of `seed`. Fusion parameters are
  // drawn after all shared ones, so two models that differ only in fusion
  // variant or placement share bitwise-identical encoder weights.
  SslEncoder(const EncoderConfig &enc, const FusionConfig &fusion, uint64_t seed);

  // Conv frame count for a sample count, by the per-layer floor arithmetic.
  // Fails when the input is shorter than the stack's receptive field.
  int64_t ConvFrames(int64_t samples) const;
  int64_t ReceptiveField() const;

  // Strided conv stack + channel layer norm + gelu, then a linear projection
  // to model_dim and a final layer norm: waveform in, [frames, dim] out.
  // No masking happens here.
  numerics::Var ConvExtract(const audio::Waveform &w) const;

  // Full two-branch forward. `mask` lists main-branch frames whose conv
  // features are replaced by the learned mask embedding (substitution is
  // post-extraction); pass nullptr or an empty vector for no masking. The
  // branches must have equal sample counts.
  ForwardResult ForwardTwoBranch(const audio::Waveform &enhanced,
                                 const audio::Waveform &noisy,
                                 const std::vector<int64_t> *mask,
                                 ForwardTrace *trace = nullptr) const;

  // Fusion-free single-branch forward with the same shared weights; the
  // reference point for the fusion-at-init identities and for baselines.
  ForwardResult ForwardSingle(const audio::Waveform &w,
                              const std::vector<int64_t> *mask,
                              ForwardTrace *trace = nullptr) const;

  const EncoderConfig &encoder_config() const { return enc_; }
  const FusionConfig &fusion_config() const { return fusion_cfg_; }
  uint64_t seed() const { return seed_; }

  numerics::ParamRegistry &registry() { return registry_; }
  const numerics::ParamRegistry &registry() const { return registry_; }

  // Registry order, optionally without the fusion parameters (frozen-fusion
  // training steps exactly like a fusion-free model).
  std::vector<numerics::Var> TrainableParams(bool include_fusion = true) const;
  int64_t FusionParamCount() const;

  // Checkpoint in the numerics container; the JSON sidecar gains a "model"
  // section (encoder, fusion and masking configs plus the init seed) and,
  // when non-empty, a caller-supplied "provenance" object (training seed,
  // steps, data manifest hash, codebook reference).
  void Save(const std::string &path, const MaskingConfig &masking,
            const std::string &provenance_json = "") const;
  static SslEncoder Load(const std::string &path, MaskingConfig *masking = nullptr,
                         std::string *provenance_json = nullptr);

 private:
  struct ConvLayer {
    numerics::Var w, b, ln_g, ln_b;
  };
  struct Block {
    numerics::Var q_w, q_b, k_w, k_b, v_w, v_b, o_w, o_b;
    numerics::Var ln1_g, ln1_b;
    numerics::Var f1_w, f1_b, f2_w, f2_b;
    numerics::Var ln2_g, ln2_b;
  };
  struct FusionSite {
    numerics::Var alpha;                              // OA
    numerics::Var sf_w, sf_b;                         // SF
    numerics::Var q_w, q_b, k_w, k_b, v_w, v_b, o_w, o_b;  // DA
  };

  numerics::Var Embed(const audio::Waveform &w, const std::vector<int64_t> *mask) const;
  numerics::Var RunBlock(const Block &b, const numerics::Var &x, ForwardTrace *trace) const;
  numerics::Var ApplyFusion(const FusionSite &site, const numerics::Var &h_main,
                            const numerics::Var &h_aux, ForwardTrace *trace) const;

  EncoderConfig enc_;
  FusionConfig fusion_cfg_;
  uint64_t seed_ = 0;

  std::vector<ConvLayer> conv_;
  numerics::Var proj_w_, proj_b_, ex_ln_g_, ex_ln_b_;
  numerics::Var mask_embed_, pos_;
  std::vector<Block> blocks_;
  numerics::Var head_w_, head_b_;
  std::vector<int64_t> fusion_after_block_;
  std::vector<FusionSite> fusion_sites_;

  numerics::ParamRegistry registry_;
};

// Mean softmax cross-entropy over the masked frames only. Logit rows and
// targets are truncated to the shorter of the two (they can differ by one
// frame); mask entries past the truncated range are dropped. Fails when the
// mask is empty before or after that filtering.
numerics::Var MaskedPredictionLoss(const numerics::Var &logits,
                                   const std::vector<int64_t> &targets,
                                   const std::vector<int64_t> &mask);

}  // namespace ssl
}  // namespace fatlab

#endif  // FATLAB_SSL_MODEL_H_
