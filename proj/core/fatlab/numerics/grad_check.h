// fatlab/numerics/grad_check.h

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

#ifndef FATLAB_NUMERICS_GRAD_CHECK_H_
#define FATLAB_NUMERICS_GRAD_CHECK_H_

#include <functional>
#include <string>
#include <vector>

#include "fatlab/numerics/autograd.h"

namespace fatlab {
namespace numerics {

struct GradCheckOptions {
  double h = 1e-5;
  // 0 checks every coordinate; otherwise at most this many per parameter,
  // taken at an even stride so coverage is deterministic.
  int64_t max_coords_per_param = 0;
};

struct GradCheckResult {
  double max_rel_err = 0.0;
  double max_abs_err = 0.0;
  std::string worst_param;
  int64_t worst_coord = -1;
  int64_t coords_checked = 0;
};

// Compares analytic gradients against central finite differences.
//
// `make_loss` must rebuild the graph from the current parameter values and
// return a scalar. It is invoked once with gradients enabled and then twice
// per probed coordinate with gradients off. Relative error per coordinate is
// |ga - gn| / max(|ga|, |gn|, 1e-8).
GradCheckResult CheckGradients(const std::function<Var()> &make_loss,
                               const std::vector<Var> &params,
                               const GradCheckOptions &opts = {});

}  // namespace numerics
}  // namespace fatlab

#endif  // FATLAB_NUMERICS_GRAD_CHECK_H_
