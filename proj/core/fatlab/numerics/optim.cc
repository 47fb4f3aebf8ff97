// fatlab/numerics/optim.cc

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

#include "fatlab/numerics/optim.h"

#include <cmath>

#include "fatlab/util/check.h"

namespace fatlab {
namespace numerics {

Adam::Adam(std::vector<Var> params, AdamConfig config)
    : params_(std::move(params)), config_(config) {
  FATLAB_CHECK(!params_.empty()) << "(Adam over zero parameters)";
  m_.reserve(params_.size());
  v_.reserve(params_.size());
  for (const Var &p : params_) {
    FATLAB_CHECK(p != nullptr && p->is_leaf && p->requires_grad)
        << "(Adam parameters must be trainable leaves)";
    m_.push_back(Tensor::Zeros(p->value.shape()));
    v_.push_back(Tensor::Zeros(p->value.shape()));
  }
}

bool Adam::Step() {
  for (const Var &p : params_) {
    if (p->grad.empty()) continue;
    if (!p->grad.AllFinite()) {
      ++skipped_steps_;
      FATLAB_WARN << "Adam: non-finite gradient on " << (p->name.empty() ? "<param>" : p->name)
                  << ", skipping step " << (step_count_ + 1);
      return false;
    }
  }
  ++step_count_;
  double bc1 = 1.0 - std::pow(config_.beta1, static_cast<double>(step_count_));
  double bc2 = 1.0 - std::pow(config_.beta2, static_cast<double>(step_count_));
  for (size_t i = 0; i < params_.size(); ++i) {
    Node *p = params_[i].get();
    if (p->grad.empty()) continue;
    const double *g = p->grad.data();
    double *m = m_[i].data();
    double *v = v_[i].data();
    double *w = p->value.data();
    int64_t n = p->value.numel();
    for (int64_t j = 0; j < n; ++j) {
      m[j] = config_.beta1 * m[j] + (1.0 - config_.beta1) * g[j];
      v[j] = config_.beta2 * v[j] + (1.0 - config_.beta2) * g[j] * g[j];
      double mhat = m[j] / bc1;
      double vhat = v[j] / bc2;
      w[j] -= config_.lr * mhat / (std::sqrt(vhat) + config_.eps);
    }
  }
  return true;
}

void Adam::ZeroGrads() {
  for (const Var &p : params_) p->grad = Tensor();
}

}  // namespace numerics
}  // namespace fatlab
