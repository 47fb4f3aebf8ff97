// fatlab/numerics/grad_check.cc

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

#include "fatlab/numerics/grad_check.h"

#include <algorithm>
#include <cmath>

#include "fatlab/util/check.h"

namespace fatlab {
namespace numerics {

GradCheckResult CheckGradients(const std::function<Var()> &make_loss,
                               const std::vector<Var> &params,
                               const GradCheckOptions &opts) {
  FATLAB_CHECK(!params.empty()) << "(grad check over zero parameters)";
  for (const Var &p : params) p->grad = Tensor();

  Var loss = make_loss();
  FATLAB_CHECK(loss->value.numel() == 1)
      << "(grad check loss must be scalar, got " << loss->value.ShapeStr() << ")";
  Backward(loss);

  std::vector<Tensor> analytic;
  analytic.reserve(params.size());
  for (const Var &p : params) {
    analytic.push_back(p->grad.empty() ? Tensor::Zeros(p->value.shape()) : p->grad);
  }

  GradCheckResult res;
  NoGradGuard guard;
  for (size_t pi = 0; pi < params.size(); ++pi) {
    Node *p = params[pi].get();
    int64_t n = p->value.numel();
    int64_t stride = 1;
    if (opts.max_coords_per_param > 0 && n > opts.max_coords_per_param) {
      stride = (n + opts.max_coords_per_param - 1) / opts.max_coords_per_param;
    }
    for (int64_t j = 0; j < n; j += stride) {
      double saved = p->value[j];
      p->value[j] = saved + opts.h;
      double up = make_loss()->value[0];
      p->value[j] = saved - opts.h;
      double down = make_loss()->value[0];
      p->value[j] = saved;
      double gn = (up - down) / (2.0 * opts.h);
      double ga = analytic[pi][j];
      double abs_err = std::fabs(ga - gn);
      double rel_err = abs_err / std::max({std::fabs(ga), std::fabs(gn), 1e-8});
      if (rel_err > res.max_rel_err) {
        res.max_rel_err = rel_err;
        res.worst_param = p->name.empty() ? "<param>" : p->name;
        res.worst_coord = j;
      }
      res.max_abs_err = std::max(res.max_abs_err, abs_err);
      ++res.coords_checked;
    }
  }
  for (const Var &p : params) p->grad = Tensor();
  return res;
}

}  // namespace numerics
}  // namespace fatlab
