// fatlab/numerics/tensor.cc

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

#include "fatlab/numerics/tensor.h"

#include <cmath>
#include <sstream>

#include "fatlab/util/check.h"

namespace fatlab {
namespace numerics {

int64_t NumelOf(const std::vector<int64_t> &shape) {
  int64_t n = 1;
  for (int64_t d : shape) {
    FATLAB_CHECK(d >= 0) << "(negative dimension in shape " << ShapeStr(shape) << ")";
    n *= d;
  }
  return n;
}

Tensor::Tensor(std::vector<int64_t> shape) : shape_(std::move(shape)) {
  data_.assign(static_cast<size_t>(NumelOf(shape_)), 0.0);
}

Tensor::Tensor(std::vector<int64_t> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  FATLAB_CHECK(NumelOf(shape_) == static_cast<int64_t>(data_.size()))
      << "(shape " << fatlab::numerics::ShapeStr(shape_) << " vs data length " << data_.size()
      << ")";
}

Tensor Tensor::Scalar(double v) { return Tensor({1}, {v}); }

Tensor Tensor::Full(std::vector<int64_t> shape, double v) {
  Tensor t(std::move(shape));
  for (auto &x : t.data_) x = v;
  return t;
}

bool Tensor::AllFinite() const {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

std::string Tensor::ShapeStr() const { return numerics::ShapeStr(shape_); }

std::string ShapeStr(const std::vector<int64_t> &shape) {
  std::ostringstream os;
  os << "[";
  for (size_t i = 0; i < shape.size(); ++i) {
    if (i) os << "x";
    os << shape[i];
  }
  os << "]";
  return os.str();
}

}  // namespace numerics
}  // namespace fatlab
