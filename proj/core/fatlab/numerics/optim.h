// fatlab/numerics/optim.h

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

#ifndef FATLAB_NUMERICS_OPTIM_H_
#define FATLAB_NUMERICS_OPTIM_H_

#include <cstdint>
#include <vector>

#include "fatlab/numerics/autograd.h"

namespace fatlab {
namespace numerics {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.98;
  double eps = 1e-6;
};

// Adam with bias correction. State (m, v) is kept per parameter in
// registration order. If any gradient in the step is non-finite the whole
// step is skipped, no state advances, and skipped_steps() is bumped; training
// loops surface that counter in their logs.
class Adam {
 public:
  Adam(std::vector<Var> params, AdamConfig config);

  // Applies one update using the grads currently stored on the parameters,
  // then leaves the grads untouched (callers zero them via ZeroGrads).
  // Returns false when the step was skipped because of a non-finite grad.
  bool Step();

  void ZeroGrads();

  // Overrides the learning rate for subsequent steps (warmup schedules).
  void set_lr(double lr) { config_.lr = lr; }
  double lr() const { return config_.lr; }

  int64_t step_count() const { return step_count_; }
  int64_t skipped_steps() const { return skipped_steps_; }

  const std::vector<Var> &params() const { return params_; }

 private:
  std::vector<Var> params_;
  AdamConfig config_;
  std::vector<Tensor> m_, v_;
  int64_t step_count_ = 0;
  int64_t skipped_steps_ = 0;
};

}  // namespace numerics
}  // namespace fatlab

#endif  // FATLAB_NUMERICS_OPTIM_H_
