// fatlab/numerics/ops.h

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

#ifndef FATLAB_NUMERICS_OPS_H_
#define FATLAB_NUMERICS_OPS_H_

#include <cstdint>
#include <vector>

#include "fatlab/numerics/autograd.h"

namespace fatlab {
namespace numerics {

// Elementwise ops broadcast on singleton dims only (shapes are right-aligned;
// each pair of dims must be equal or one of them 1). Shape mismatches throw
// with the op name and both shapes.
Var Add(const Var &a, const Var &b);
Var Sub(const Var &a, const Var &b);
Var Mul(const Var &a, const Var &b);
Var Div(const Var &a, const Var &b);
Var Neg(const Var &a);
Var ScalarMul(const Var &a, double c);
Var ScalarAdd(const Var &a, double c);

// 2-D matrix product: [m,k] x [k,n] -> [m,n].
Var Matmul(const Var &a, const Var &b);
// 2-D transpose (copying).
Var Transpose(const Var &a);

Var Reshape(const Var &a, std::vector<int64_t> shape);
Var Concat(const std::vector<Var> &parts, int axis);
Var Slice(const Var &a, int axis, int64_t start, int64_t len);

// Row gather from a 2-D tensor; doubles as embedding lookup.
Var GatherRows(const Var &a, const std::vector<int64_t> &indices);
// Copy of 2-D x with rows at `indices` replaced by the vector `row` ([C] or
// [1,C]). Rows not listed are bitwise-unchanged.
Var ReplaceRows(const Var &x, const std::vector<int64_t> &indices, const Var &row);

// Softmax / log-softmax over the last axis.
Var Softmax(const Var &a);
Var LogSoftmax(const Var &a);

Var Sigmoid(const Var &a);
Var TanhOp(const Var &a);
Var Relu(const Var &a);
Var Gelu(const Var &a);
Var Exp(const Var &a);
Var Log(const Var &a);
Var Sqrt(const Var &a);

// Full reductions to a [1] scalar.
Var Sum(const Var &a);
Var Mean(const Var &a);

// Layer normalization over the last axis, then affine with gamma/beta ([D]).
// eps defaults near zero so the normalized output has variance 1 to ~1e-12.
Var LayerNorm(const Var &x, const Var &gamma, const Var &beta, double eps = 1e-12);

// Per-row softmax cross-entropy against integer class ids: out[r] =
// logsumexp(logits[r,:]) - logits[r, ids[r]].
Var CrossEntropyRows(const Var &logits, const std::vector<int64_t> &ids);

// 1-D convolution. x: [Cin,T], w: [Cout,Cin,K], b: [Cout] or null.
// Output [Cout, (T + 2*pad - ((K-1)*dilation + 1))/stride + 1].
Var Conv1d(const Var &x, const Var &w, const Var &b, int64_t stride, int64_t pad,
           int64_t dilation = 1);

// Transposed 1-D convolution. x: [Cin,T], w: [Cin,Cout,K], b: [Cout] or null.
// Output [Cout, (T-1)*stride + K - 2*pad].
Var ConvTranspose1d(const Var &x, const Var &w, const Var &b, int64_t stride,
                    int64_t pad);

}  // namespace numerics
}  // namespace fatlab

#endif  // FATLAB_NUMERICS_OPS_H_
