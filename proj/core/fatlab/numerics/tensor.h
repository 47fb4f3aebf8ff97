// fatlab/numerics/tensor.h

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

#ifndef FATLAB_NUMERICS_TENSOR_H_
#define FATLAB_NUMERICS_TENSOR_H_

#include <cstdint>
#include <string>
#include <vector>

namespace fatlab {
namespace numerics {

// Dense row-major float64 tensor. Plain value semantics: copies copy the
// buffer. No strided views; transpose/slice produce fresh buffers.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<int64_t> shape);
  Tensor(std::vector<int64_t> shape, std::vector<double> data);

  static Tensor Scalar(double v);
  static Tensor Zeros(std::vector<int64_t> shape) { return Tensor(std::move(shape)); }
  static Tensor Full(std::vector<int64_t> shape, double v);

  const std::vector<int64_t> &shape() const { return shape_; }
  int64_t dim(int i) const { return shape_[static_cast<size_t>(i)]; }
  int rank() const { return static_cast<int>(shape_.size()); }
  int64_t numel() const { return static_cast<int64_t>(data_.size()); }
  bool empty() const { return data_.empty(); }

  double *data() { return data_.data(); }
  const double *data() const { return data_.data(); }
  std::vector<double> &vec() { return data_; }
  const std::vector<double> &vec() const { return data_; }

  double operator[](int64_t i) const { return data_[static_cast<size_t>(i)]; }
  double &operator[](int64_t i) { return data_[static_cast<size_t>(i)]; }

  // 2-D accessors; valid only for rank-2 tensors.
  int64_t rows() const { return shape_[0]; }
  int64_t cols() const { return shape_[1]; }
  double at2(int64_t r, int64_t c) const { return data_[static_cast<size_t>(r * shape_[1] + c)]; }
  double &at2(int64_t r, int64_t c) { return data_[static_cast<size_t>(r * shape_[1] + c)]; }

  bool SameShape(const Tensor &other) const { return shape_ == other.shape_; }
  bool AllFinite() const;

  std::string ShapeStr() const;

 private:
  std::vector<int64_t> shape_;
  std::vector<double> data_;
};

std::string ShapeStr(const std::vector<int64_t> &shape);
int64_t NumelOf(const std::vector<int64_t> &shape);

}  // namespace numerics
}  // namespace fatlab

#endif  // FATLAB_NUMERICS_TENSOR_H_
