// fatlab/numerics/init.h

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

#ifndef FATLAB_NUMERICS_INIT_H_
#define FATLAB_NUMERICS_INIT_H_

#include <string>
#include <utility>
#include <vector>

#include "fatlab/numerics/autograd.h"
#include "fatlab/numerics/rng.h"

namespace fatlab {
namespace numerics {

// Trainable leaf filled from a truncated normal (resampled beyond 2 sigma).
inline Var ParamTruncNormal(Rng *rng, std::string name, std::vector<int64_t> shape,
                            double sigma = 0.02) {
  Tensor t(std::move(shape));
  for (int64_t i = 0; i < t.numel(); ++i) t[i] = rng->TruncatedNormal(sigma);
  Var v = MakeLeaf(std::move(t), /*requires_grad=*/true);
  v->name = std::move(name);
  return v;
}

inline Var ParamZeros(std::string name, std::vector<int64_t> shape) {
  Var v = MakeLeaf(Tensor::Zeros(std::move(shape)), /*requires_grad=*/true);
  v->name = std::move(name);
  return v;
}

inline Var ParamFull(std::string name, std::vector<int64_t> shape, double fill) {
  Var v = MakeLeaf(Tensor::Full(std::move(shape), fill), /*requires_grad=*/true);
  v->name = std::move(name);
  return v;
}

}  // namespace numerics
}  // namespace fatlab

#endif  // FATLAB_NUMERICS_INIT_H_
