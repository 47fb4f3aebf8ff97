// fatlab/frontends/enhancer.h

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

#ifndef FATLAB_FRONTENDS_ENHANCER_H_
#define FATLAB_FRONTENDS_ENHANCER_H_

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "fatlab/audio/stft.h"
#include "fatlab/audio/wav.h"
#include "fatlab/frontends/config.h"
#include "fatlab/numerics/autograd.h"
#include "fatlab/numerics/checkpoint.h"
#include "fatlab/numerics/tensor.h"

namespace fatlab {
namespace frontends {

// A trainable speech enhancer. Parameters live in a registry keyed by stable
// names, so checkpoints round-trip through the shared format. Instances are
// immutable once trained: Enhance builds no gradients and may be called from
// several threads at once.
class Frontend {
 public:
  explicit Frontend(FrontendSpec spec) : spec_(std::move(spec)) {}
  virtual ~Frontend() = default;

  Frontend(const Frontend &) = delete;
  Frontend &operator=(const Frontend &) = delete;

  // Cleans one utterance. The output has the same length and sample rate as
  // the input; a sample-rate mismatch with the training config fails.
  virtual audio::Waveform Enhance(const audio::Waveform &noisy) const = 0;

  // Differentiable per-pair training objective (lower is better). The pair
  // must be sample-aligned with equal lengths.
  virtual numerics::Var TrainingLoss(const audio::Waveform &noisy,
                                     const audio::Waveform &clean) const = 0;

  const FrontendSpec &spec() const { return spec_; }
  numerics::ParamRegistry &registry() { return registry_; }
  const numerics::ParamRegistry &registry() const { return registry_; }

 protected:
  void CheckRate(const audio::Waveform &w) const;

  FrontendSpec spec_;
  numerics::ParamRegistry registry_;
};

// Time-domain enhancer: strided conv filterbank, dilated residual conv mask
// network with a sigmoid gate, transposed-conv synthesis trimmed back to the
// input length.
class TimeDomainEnhancer : public Frontend {
 public:
  explicit TimeDomainEnhancer(FrontendSpec spec);

  audio::Waveform Enhance(const audio::Waveform &noisy) const override;
  numerics::Var TrainingLoss(const audio::Waveform &noisy,
                             const audio::Waveform &clean) const override;

  // Differentiable enhanced estimate, rank 1 with one entry per input sample.
  numerics::Var EstimateVar(const audio::Waveform &noisy) const;

 private:
  numerics::Var enc_w_;
  numerics::Var pre_w_, pre_b_;
  std::vector<std::pair<numerics::Var, numerics::Var>> blocks_;  // (w, b) per dilation
  numerics::Var mask_w_, mask_b_;
  numerics::Var dec_w_;
};

// TF-domain enhancer: per-bin sigmoid magnitude mask predicted from log
// magnitudes by a single GRU (or feed-forward) layer, applied to the noisy
// STFT with the noisy phase kept.
class TfDomainEnhancer : public Frontend {
 public:
  explicit TfDomainEnhancer(FrontendSpec spec);

  audio::Waveform Enhance(const audio::Waveform &noisy) const override;
  numerics::Var TrainingLoss(const audio::Waveform &noisy,
                             const audio::Waveform &clean) const override;

  // Differentiable mask for a precomputed noisy spectrogram, shaped
  // [frames, bins] like the magnitudes it gates.
  numerics::Var MaskVar(const audio::Spectrogram &noisy_spec) const;

 private:
  numerics::Var in_w_, in_b_;
  numerics::Var gru_wz_, gru_uz_, gru_bz_;
  numerics::Var gru_wr_, gru_ur_, gru_br_;
  numerics::Var gru_wh_, gru_uh_, gru_bh_;
  numerics::Var out_w_, out_b_;
};

// Scales every spectrogram cell by the matching mask entry (noisy phase is
// preserved) and resynthesizes. The mask must have shape [frames, bins].
audio::Waveform ApplyMagnitudeMask(const audio::Spectrogram &spec, const numerics::Tensor &mask);

std::unique_ptr<Frontend> CreateFrontend(const FrontendSpec &spec);

// Writes the parameter checkpoint plus a JSON sidecar describing the spec, so
// the instance can be rebuilt from the files alone.
void SaveFrontend(const Frontend &frontend, const std::string &path);

// Rebuilds a front-end from a checkpoint written by SaveFrontend.
std::unique_ptr<Frontend> LoadFrontend(const std::string &path);

}  // namespace frontends
}  // namespace fatlab

#endif  // FATLAB_FRONTENDS_ENHANCER_H_
