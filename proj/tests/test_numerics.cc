// fatlab/tests/test_numerics.cc

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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>

#include "fatlab/numerics/autograd.h"
#include "fatlab/numerics/checkpoint.h"
#include "fatlab/numerics/grad_check.h"
#include "fatlab/numerics/init.h"
#include "fatlab/numerics/ops.h"
#include "fatlab/numerics/optim.h"
#include "fatlab/numerics/rng.h"
#include "fatlab/numerics/tensor.h"
#include "fatlab/util/check.h"

using namespace fatlab::numerics;

namespace {

Tensor RandomTensor(Rng *rng, std::vector<int64_t> shape, double scale = 1.0) {
  Tensor t(std::move(shape));
  for (int64_t i = 0; i < t.numel(); ++i) t[i] = rng->Gaussian() * scale;
  return t;
}

Var RandomLeaf(Rng *rng, std::vector<int64_t> shape, double scale = 1.0) {
  return MakeLeaf(RandomTensor(rng, std::move(shape), scale), true);
}

bool BitEqual(const Tensor &a, const Tensor &b) {
  if (a.shape() != b.shape()) return false;
  return std::memcmp(a.data(), b.data(), sizeof(double) * static_cast<size_t>(a.numel())) == 0;
}

}  // namespace

TEST_CASE("tensor basics") {
  Tensor t({2, 3});
  CHECK(t.numel() == 6);
  CHECK(t.rank() == 2);
  CHECK(t.ShapeStr() == "[2x3]");
  for (int64_t i = 0; i < 6; ++i) CHECK(t[i] == 0.0);
  Tensor f = Tensor::Full({4}, 2.5);
  CHECK(f[3] == 2.5);
  Tensor s = Tensor::Scalar(7.0);
  CHECK(s.numel() == 1);
  CHECK(s.rank() == 1);
  CHECK_THROWS_AS(Tensor({2, -1}), fatlab::Error);
}

TEST_CASE("rng determinism and ranges") {
  Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.NextU64() == b.NextU64());

  Rng c(42);
  for (int i = 0; i < 10000; ++i) {
    double u = c.Uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
  Rng d(7);
  for (int i = 0; i < 10000; ++i) {
    double x = d.TruncatedNormal(0.02);
    CHECK(std::fabs(x) <= 0.04 + 1e-15);
  }
  Rng e(7);
  for (int i = 0; i < 1000; ++i) {
    int64_t k = e.UniformInt(5);
    CHECK(k >= 0);
    CHECK(k < 5);
  }

  // Derived streams with different purposes diverge even for equal seeds.
  Rng s1 = Rng::Derive(1, Rng::kBatch, 3, 0);
  Rng s2 = Rng::Derive(1, Rng::kSpanMask, 3, 0);
  CHECK(s1.NextU64() != s2.NextU64());
  // And re-deriving reproduces the stream.
  Rng s3 = Rng::Derive(1, Rng::kBatch, 3, 0);
  Rng s4 = Rng::Derive(1, Rng::kBatch, 3, 0);
  for (int i = 0; i < 16; ++i) CHECK(s3.NextU64() == s4.NextU64());
}

TEST_CASE("rng gaussian moments") {
  Rng r(123);
  const int n = 200000;
  double mean = 0.0, m2 = 0.0;
  for (int i = 0; i < n; ++i) {
    double x = r.Gaussian();
    mean += x;
    m2 += x * x;
  }
  mean /= n;
  m2 /= n;
  CHECK(std::fabs(mean) < 0.01);
  CHECK(std::fabs(m2 - 1.0) < 0.02);
}

TEST_CASE("grad of sum is ones") {
  Rng r(Rng::Derive(1, Rng::kTest, 1).NextU64());
  Var x = RandomLeaf(&r, {3, 4});
  Var loss = Sum(x);
  Backward(loss);
  for (int64_t i = 0; i < 12; ++i) CHECK(x->grad[i] == 1.0);
}

TEST_CASE("grad of sum of squares is 2x") {
  Rng r(Rng::Derive(1, Rng::kTest, 2).NextU64());
  Var x = RandomLeaf(&r, {5});
  Var loss = Sum(Mul(x, x));
  Backward(loss);
  for (int64_t i = 0; i < 5; ++i) CHECK(x->grad[i] == doctest::Approx(2.0 * x->value[i]).epsilon(1e-14));
}

TEST_CASE("fan-out accumulates additively") {
  Var x = MakeLeaf(Tensor::Full({3}, 1.5), true);
  Var y = Add(x, x);
  Var loss = Sum(y);
  Backward(loss);
  for (int64_t i = 0; i < 3; ++i) CHECK(x->grad[i] == 2.0);

  // Same leaf feeding two different ops.
  x->grad = Tensor();
  Var loss2 = Add(Sum(Mul(x, x)), Sum(x));
  Backward(loss2);
  for (int64_t i = 0; i < 3; ++i)
    CHECK(x->grad[i] == doctest::Approx(2.0 * x->value[i] + 1.0).epsilon(1e-14));
}

TEST_CASE("backward frees intermediate grads unless retained") {
  Var x = MakeLeaf(Tensor::Full({2}, 1.0), true);
  Var mid = Mul(x, x);
  Var kept = Add(mid, x);
  kept->retain_grad = true;
  Var loss = Sum(kept);
  Backward(loss);
  CHECK(mid->grad.empty());
  CHECK(!kept->grad.empty());
  CHECK(!x->grad.empty());
}

TEST_CASE("no-grad guard detaches graph construction") {
  Var x = MakeLeaf(Tensor::Full({2}, 3.0), true);
  {
    NoGradGuard guard;
    CHECK(!GradEnabled());
    Var y = Mul(x, x);
    CHECK(!y->requires_grad);
    CHECK(y->parents.empty());
  }
  CHECK(GradEnabled());
}

TEST_CASE("backward requires scalar") {
  Var x = MakeLeaf(Tensor::Full({2}, 1.0), true);
  Var y = Mul(x, x);
  CHECK_THROWS_AS(Backward(y), fatlab::Error);
}

TEST_CASE("softmax rows sum to one") {
  Rng r(Rng::Derive(1, Rng::kTest, 3).NextU64());
  Var x = RandomLeaf(&r, {7, 11}, 5.0);
  Var y = Softmax(x);
  for (int64_t row = 0; row < 7; ++row) {
    double s = 0.0;
    for (int64_t c = 0; c < 11; ++c) s += y->value.at2(row, c);
    CHECK(std::fabs(s - 1.0) < 1e-12);
  }
}

TEST_CASE("sigmoid stays inside the open unit interval") {
  Tensor t({4});
  t[0] = -1000.0;
  t[1] = -20.0;
  t[2] = 20.0;
  t[3] = 1000.0;
  Var y = Sigmoid(MakeLeaf(t, false));
  for (int64_t i = 0; i < 4; ++i) {
    CHECK(y->value[i] > 0.0);
    CHECK(y->value[i] < 1.0);
  }
}

TEST_CASE("layer norm normalizes rows") {
  Rng r(Rng::Derive(1, Rng::kTest, 4).NextU64());
  Var x = RandomLeaf(&r, {6, 32}, 3.0);
  Var gamma = MakeLeaf(Tensor::Full({32}, 1.0), true);
  Var beta = MakeLeaf(Tensor::Zeros({32}), true);
  Var y = LayerNorm(x, gamma, beta);
  for (int64_t row = 0; row < 6; ++row) {
    double mean = 0.0;
    for (int64_t c = 0; c < 32; ++c) mean += y->value.at2(row, c);
    mean /= 32.0;
    double var = 0.0;
    for (int64_t c = 0; c < 32; ++c) {
      double d = y->value.at2(row, c) - mean;
      var += d * d;
    }
    var /= 32.0;
    CHECK(std::fabs(mean) < 1e-9);
    CHECK(std::fabs(var - 1.0) < 1e-9);
  }
}

TEST_CASE("broadcast add and mul with backward reduction") {
  Rng r(Rng::Derive(1, Rng::kTest, 5).NextU64());
  Var a = RandomLeaf(&r, {4, 3});
  Var b = RandomLeaf(&r, {3});
  Var c = RandomLeaf(&r, {4, 1});

  Var y = Add(a, b);
  CHECK(y->value.shape() == std::vector<int64_t>{4, 3});
  for (int64_t i = 0; i < 4; ++i)
    for (int64_t j = 0; j < 3; ++j)
      CHECK(y->value.at2(i, j) == a->value.at2(i, j) + b->value[j]);

  auto loss_fn = [&]() { return Sum(Mul(Add(a, b), c)); };
  GradCheckResult res = CheckGradients(loss_fn, {a, b, c});
  CHECK(res.max_rel_err < 1e-6);

  CHECK_THROWS_AS(Add(RandomLeaf(&r, {2, 3}), RandomLeaf(&r, {2, 4})), fatlab::Error);
}

TEST_CASE("matmul against hand oracle and gradients") {
  Tensor ta({2, 3}, {1, 2, 3, 4, 5, 6});
  Tensor tb({3, 2}, {7, 8, 9, 10, 11, 12});
  Var a = MakeLeaf(ta, true);
  Var b = MakeLeaf(tb, true);
  Var y = Matmul(a, b);
  CHECK(y->value.at2(0, 0) == 58.0);
  CHECK(y->value.at2(0, 1) == 64.0);
  CHECK(y->value.at2(1, 0) == 139.0);
  CHECK(y->value.at2(1, 1) == 154.0);

  auto loss_fn = [&]() { return Sum(Mul(Matmul(a, b), Matmul(a, b))); };
  GradCheckResult res = CheckGradients(loss_fn, {a, b});
  CHECK(res.max_rel_err < 1e-6);

  CHECK_THROWS_AS(Matmul(a, a), fatlab::Error);
}

TEST_CASE("structural ops gradient check") {
  Rng r(Rng::Derive(1, Rng::kTest, 6).NextU64());
  Var a = RandomLeaf(&r, {4, 5});
  Var b = RandomLeaf(&r, {2, 5});

  auto loss_fn = [&]() {
    Var cat = Concat({a, b}, 0);
    Var sl = Slice(cat, 0, 1, 4);
    Var tr = Transpose(sl);
    Var rs = Reshape(tr, {4, 5});
    Var g = GatherRows(rs, {0, 2, 2, 3});
    return Mean(Mul(g, g));
  };
  GradCheckResult res = CheckGradients(loss_fn, {a, b});
  CHECK(res.max_rel_err < 1e-6);
}

TEST_CASE("replace_rows leaves other rows bitwise untouched") {
  Rng r(Rng::Derive(1, Rng::kTest, 7).NextU64());
  Var x = RandomLeaf(&r, {5, 3});
  Var e = RandomLeaf(&r, {3});
  Var y = ReplaceRows(x, {1, 3}, e);
  for (int64_t row : {0, 2, 4}) {
    CHECK(std::memcmp(y->value.data() + row * 3, x->value.data() + row * 3,
                      3 * sizeof(double)) == 0);
  }
  for (int64_t row : {1, 3}) {
    CHECK(std::memcmp(y->value.data() + row * 3, e->value.data(), 3 * sizeof(double)) == 0);
  }

  auto loss_fn = [&]() {
    Var z = ReplaceRows(x, {1, 3}, e);
    return Sum(Mul(z, z));
  };
  GradCheckResult res = CheckGradients(loss_fn, {x, e});
  CHECK(res.max_rel_err < 1e-6);
}

TEST_CASE("pointwise ops gradient check") {
  Rng r(Rng::Derive(1, Rng::kTest, 8).NextU64());
  Var x = RandomLeaf(&r, {3, 4}, 0.8);
  auto loss_fn = [&]() {
    Var h = Gelu(x);
    h = TanhOp(h);
    h = Sigmoid(h);
    h = Add(h, Relu(x));
    h = Exp(ScalarMul(h, 0.3));
    h = Log(ScalarAdd(h, 1.0));
    h = Sqrt(ScalarAdd(Mul(h, h), 0.5));
    return Mean(h);
  };
  GradCheckResult res = CheckGradients(loss_fn, {x});
  CHECK(res.max_rel_err < 1e-6);
}

TEST_CASE("softmax family gradient check") {
  Rng r(Rng::Derive(1, Rng::kTest, 9).NextU64());
  Var x = RandomLeaf(&r, {4, 6}, 2.0);
  Var w = RandomLeaf(&r, {4, 6}, 1.0);
  auto loss_fn = [&]() {
    Var s = Softmax(x);
    Var l = LogSoftmax(x);
    return Add(Sum(Mul(s, w)), Sum(Mul(l, w)));
  };
  GradCheckResult res = CheckGradients(loss_fn, {x});
  CHECK(res.max_rel_err < 1e-6);
}

TEST_CASE("cross entropy matches negative log softmax") {
  Rng r(Rng::Derive(1, Rng::kTest, 10).NextU64());
  Var x = RandomLeaf(&r, {3, 5}, 2.0);
  std::vector<int64_t> ids = {4, 0, 2};
  Var ce = CrossEntropyRows(x, ids);
  Var ls = LogSoftmax(x);
  for (int64_t row = 0; row < 3; ++row) {
    CHECK(ce->value[row] ==
          doctest::Approx(-ls->value.at2(row, ids[static_cast<size_t>(row)])).epsilon(1e-12));
  }
  auto loss_fn = [&]() { return Mean(CrossEntropyRows(x, ids)); };
  GradCheckResult res = CheckGradients(loss_fn, {x});
  CHECK(res.max_rel_err < 1e-4);
}

TEST_CASE("layer norm gradient check") {
  Rng r(Rng::Derive(1, Rng::kTest, 11).NextU64());
  Var x = RandomLeaf(&r, {3, 8}, 2.0);
  Var gamma = RandomLeaf(&r, {8}, 0.5);
  Var beta = RandomLeaf(&r, {8}, 0.5);
  Var w = RandomLeaf(&r, {3, 8});
  auto loss_fn = [&]() { return Sum(Mul(LayerNorm(x, gamma, beta), w)); };
  GradCheckResult res = CheckGradients(loss_fn, {x, gamma, beta});
  CHECK(res.max_rel_err < 1e-5);
}

namespace {

// Direct convolution oracle, no reuse of the op's index arithmetic.
Tensor Conv1dOracle(const Tensor &x, const Tensor &w, const Tensor *b, int64_t stride,
                    int64_t pad, int64_t dilation) {
  int64_t cin = x.dim(0), t_in = x.dim(1);
  int64_t cout = w.dim(0), k = w.dim(2);
  int64_t span = (k - 1) * dilation + 1;
  int64_t t_out = (t_in + 2 * pad - span) / stride + 1;
  Tensor out({cout, t_out});
  for (int64_t co = 0; co < cout; ++co) {
    for (int64_t t = 0; t < t_out; ++t) {
      double acc = b != nullptr ? (*b)[co] : 0.0;
      for (int64_t ci = 0; ci < cin; ++ci) {
        for (int64_t kk = 0; kk < k; ++kk) {
          int64_t ti = t * stride + kk * dilation - pad;
          if (ti >= 0 && ti < t_in) acc += w[(co * cin + ci) * k + kk] * x[ci * t_in + ti];
        }
      }
      out.at2(co, t) = acc;
    }
  }
  return out;
}

Tensor ConvTranspose1dOracle(const Tensor &x, const Tensor &w, const Tensor *b,
                             int64_t stride, int64_t pad) {
  int64_t cin = x.dim(0), t_in = x.dim(1);
  int64_t cout = w.dim(1), k = w.dim(2);
  int64_t t_out = (t_in - 1) * stride + k - 2 * pad;
  Tensor out({cout, t_out});
  for (int64_t co = 0; co < cout; ++co) {
    for (int64_t to = 0; to < t_out; ++to) {
      double acc = b != nullptr ? (*b)[co] : 0.0;
      for (int64_t ci = 0; ci < cin; ++ci) {
        for (int64_t t = 0; t < t_in; ++t) {
          int64_t kk = to + pad - t * stride;
          if (kk >= 0 && kk < k) acc += x[ci * t_in + t] * w[(ci * cout + co) * k + kk];
        }
      }
      out.at2(co, to) = acc;
    }
  }
  return out;
}

}  // namespace

TEST_CASE("conv1d matches direct oracle across shapes") {
  Rng r(Rng::Derive(1, Rng::kTest, 12).NextU64());
  struct Case {
    int64_t cin, t, cout, k, stride, pad, dilation;
  };
  for (const Case &c : {Case{1, 16, 2, 3, 1, 0, 1}, Case{2, 20, 3, 5, 2, 2, 1},
                        Case{3, 30, 2, 4, 3, 1, 2}, Case{2, 25, 4, 2, 2, 0, 4},
                        Case{4, 18, 1, 7, 1, 3, 1}}) {
    Var x = RandomLeaf(&r, {c.cin, c.t});
    Var w = RandomLeaf(&r, {c.cout, c.cin, c.k});
    Var b = RandomLeaf(&r, {c.cout});
    Var y = Conv1d(x, w, b, c.stride, c.pad, c.dilation);
    Tensor want = Conv1dOracle(x->value, w->value, &b->value, c.stride, c.pad, c.dilation);
    REQUIRE(y->value.shape() == want.shape());
    for (int64_t i = 0; i < want.numel(); ++i)
      CHECK(y->value[i] == doctest::Approx(want[i]).epsilon(1e-12));

    auto loss_fn = [&]() {
      Var out = Conv1d(x, w, b, c.stride, c.pad, c.dilation);
      return Sum(Mul(out, out));
    };
    GradCheckResult res = CheckGradients(loss_fn, {x, w, b});
    CHECK(res.max_rel_err < 1e-5);
  }
}

TEST_CASE("conv_transpose1d matches direct oracle across shapes") {
  Rng r(Rng::Derive(1, Rng::kTest, 13).NextU64());
  struct Case {
    int64_t cin, t, cout, k, stride, pad;
  };
  for (const Case &c : {Case{2, 10, 1, 4, 2, 0}, Case{3, 8, 2, 6, 3, 2},
                        Case{1, 12, 2, 8, 4, 1}}) {
    Var x = RandomLeaf(&r, {c.cin, c.t});
    Var w = RandomLeaf(&r, {c.cin, c.cout, c.k});
    Var b = RandomLeaf(&r, {c.cout});
    Var y = ConvTranspose1d(x, w, b, c.stride, c.pad);
    Tensor want = ConvTranspose1dOracle(x->value, w->value, &b->value, c.stride, c.pad);
    REQUIRE(y->value.shape() == want.shape());
    for (int64_t i = 0; i < want.numel(); ++i)
      CHECK(y->value[i] == doctest::Approx(want[i]).epsilon(1e-12));

    auto loss_fn = [&]() {
      Var out = ConvTranspose1d(x, w, b, c.stride, c.pad);
      return Sum(Mul(out, out));
    };
    GradCheckResult res = CheckGradients(loss_fn, {x, w, b});
    CHECK(res.max_rel_err < 1e-5);
  }
}

TEST_CASE("conv adjoint identity") {
  // <conv(x), y> equals <x, conv_transpose(y)> when the transpose uses the
  // same (transposed) kernel, stride and pad.
  Rng r(Rng::Derive(1, Rng::kTest, 14).NextU64());
  int64_t cin = 2, t_in = 21, cout = 3, k = 5, stride = 2, pad = 1;
  Var x = RandomLeaf(&r, {cin, t_in});
  Var w = RandomLeaf(&r, {cout, cin, k});
  Var y = Conv1d(x, w, nullptr, stride, pad, 1);
  Tensor cot = RandomTensor(&r, y->value.shape());

  double lhs = 0.0;
  for (int64_t i = 0; i < cot.numel(); ++i) lhs += y->value[i] * cot[i];

  // Kernel reindexed from [Cout,Cin,K] to [Cin,Cout,K] is what the adjoint uses.
  Tensor wt({cout, cin, k});
  for (int64_t co = 0; co < cout; ++co)
    for (int64_t ci = 0; ci < cin; ++ci)
      for (int64_t kk = 0; kk < k; ++kk)
        wt[(co * cin + ci) * k + kk] = w->value[(co * cin + ci) * k + kk];
  Var cotv = MakeLeaf(cot, false);
  Var wv = MakeLeaf(wt, false);
  Var back = ConvTranspose1d(cotv, wv, nullptr, stride, pad);
  // conv_transpose output is longer than t_in when the final strides do not
  // land exactly; compare on the overlap.
  double rhs = 0.0;
  int64_t t_back = back->value.dim(1);
  for (int64_t ci = 0; ci < cin; ++ci)
    for (int64_t t = 0; t < std::min(t_in, t_back); ++t)
      rhs += x->value[ci * t_in + t] * back->value[ci * t_back + t];
  CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
}

TEST_CASE("three layer mlp finite difference sweep") {
  for (uint64_t seed = 0; seed < 5; ++seed) {
    Rng r(Rng::Derive(seed, Rng::kTest, 15).NextU64());
    Var x = MakeLeaf(RandomTensor(&r, {4, 6}), false);
    Var w1 = RandomLeaf(&r, {6, 8}, 0.5);
    Var b1 = RandomLeaf(&r, {8}, 0.1);
    Var w2 = RandomLeaf(&r, {8, 8}, 0.5);
    Var b2 = RandomLeaf(&r, {8}, 0.1);
    Var w3 = RandomLeaf(&r, {8, 3}, 0.5);
    Var b3 = RandomLeaf(&r, {3}, 0.1);
    std::vector<int64_t> ids = {static_cast<int64_t>(seed % 3), 1, 2, 0};
    auto loss_fn = [&]() {
      Var h = Gelu(Add(Matmul(x, w1), b1));
      h = TanhOp(Add(Matmul(h, w2), b2));
      Var logits = Add(Matmul(h, w3), b3);
      return Mean(CrossEntropyRows(logits, ids));
    };
    GradCheckOptions opts;
    opts.h = 1e-5;
    GradCheckResult res = CheckGradients(loss_fn, {w1, b1, w2, b2, w3, b3}, opts);
    CHECK(res.max_rel_err < 1e-4);
  }
}

TEST_CASE("adam first step follows the sign of the gradient") {
  Tensor w0({3}, {1.0, -2.0, 0.5});
  Var w = MakeLeaf(w0, true);
  AdamConfig cfg;
  cfg.lr = 0.1;
  Adam opt({w}, cfg);
  Tensor g({3}, {0.3, -0.7, 0.0001});
  w->grad = g;
  CHECK(opt.Step());
  for (int64_t i = 0; i < 3; ++i) {
    // With zero state, mhat = g and vhat = g*g, so the update is
    // lr * g / (|g| + eps), essentially a signed step of size lr.
    double want = w0[i] - cfg.lr * g[i] / (std::fabs(g[i]) + cfg.eps);
    CHECK(w->value[i] == doctest::Approx(want).epsilon(1e-14));
  }
}

TEST_CASE("adam ignores parameters with empty grads and zero grad is a fixpoint") {
  Var w = MakeLeaf(Tensor::Full({2}, 1.0), true);
  Adam opt({w}, {});
  Tensor before = w->value;
  CHECK(opt.Step());
  CHECK(BitEqual(before, w->value));

  w->grad = Tensor::Zeros({2});
  CHECK(opt.Step());
  CHECK(BitEqual(before, w->value));
}

TEST_CASE("adam skips non-finite gradient steps") {
  Var w = MakeLeaf(Tensor::Full({2}, 1.0), true);
  Adam opt({w}, {});
  Tensor bad({2});
  bad[0] = std::nan("");
  bad[1] = 1.0;
  w->grad = bad;
  CHECK(!opt.Step());
  CHECK(opt.skipped_steps() == 1);
  CHECK(opt.step_count() == 0);
  CHECK(w->value[0] == 1.0);
  CHECK(w->value[1] == 1.0);
}

TEST_CASE("adam drives a quadratic bowl to its minimum") {
  Tensor start({6}, {1.0, -0.8, 0.5, -0.3, 1.2, -1.5});
  Var x = MakeLeaf(start, true);
  AdamConfig cfg;
  cfg.lr = 0.05;
  Adam opt({x}, cfg);
  for (int step = 0; step < 500; ++step) {
    opt.ZeroGrads();
    Var loss = Sum(Mul(x, x));
    Backward(loss);
    opt.Step();
  }
  for (int64_t i = 0; i < 6; ++i) CHECK(std::fabs(x->value[i]) < 1e-3);
}

TEST_CASE("training step is bit-reproducible") {
  auto run = [](uint64_t seed) {
    Rng r(Rng::Derive(seed, Rng::kInit).NextU64());
    Var x = MakeLeaf(RandomTensor(&r, {3, 4}), false);
    Var w = RandomLeaf(&r, {4, 2}, 0.5);
    Var b = RandomLeaf(&r, {2}, 0.1);
    AdamConfig cfg;
    cfg.lr = 0.01;
    Adam opt({w, b}, cfg);
    for (int step = 0; step < 10; ++step) {
      opt.ZeroGrads();
      Var h = Gelu(Add(Matmul(x, w), b));
      Var loss = Mean(Mul(h, h));
      Backward(loss);
      opt.Step();
    }
    return std::make_pair(w->value, b->value);
  };
  auto [w1, b1] = run(9);
  auto [w2, b2] = run(9);
  CHECK(BitEqual(w1, w2));
  CHECK(BitEqual(b1, b2));
  auto [w3, b3] = run(10);
  CHECK(!BitEqual(w1, w3));
}

TEST_CASE("checkpoint roundtrip is bitwise") {
  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path() / "fatlab_ckpt_test";
  fs::create_directories(dir);
  std::string path = (dir / "model.fatl").string();

  Rng r(Rng::Derive(1, Rng::kTest, 17).NextU64());
  ParamRegistry reg;
  reg.Register("enc.w", RandomLeaf(&r, {4, 3}));
  reg.Register("enc.b", RandomLeaf(&r, {3}));
  reg.Register("head.w", RandomLeaf(&r, {3, 7}));
  CHECK(reg.TotalScalars() == 12 + 3 + 21);

  Tensor w_before = reg.Get("enc.w")->value;
  Tensor b_before = reg.Get("enc.b")->value;
  reg.Save(path);
  CHECK(fs::exists(path + ".json"));

  for (auto &p : reg.Params())
    for (int64_t i = 0; i < p->value.numel(); ++i) p->value[i] = -99.0;
  reg.Load(path);
  CHECK(BitEqual(reg.Get("enc.w")->value, w_before));
  CHECK(BitEqual(reg.Get("enc.b")->value, b_before));

  // Shape mismatch and missing-parameter failures.
  ParamRegistry other;
  other.Register("enc.w", RandomLeaf(&r, {4, 4}));
  CHECK_THROWS_AS(other.Load(path), fatlab::Error);

  ParamRegistry subset;
  subset.Register("enc.w", RandomLeaf(&r, {4, 3}));
  CHECK_THROWS_AS(subset.Load(path), fatlab::Error);

  ParamRegistry superset;
  superset.Register("enc.w", RandomLeaf(&r, {4, 3}));
  superset.Register("enc.b", RandomLeaf(&r, {3}));
  superset.Register("head.w", RandomLeaf(&r, {3, 7}));
  superset.Register("extra", RandomLeaf(&r, {2}));
  CHECK_THROWS_AS(superset.Load(path), fatlab::Error);

  CHECK_THROWS_AS(reg.Register("enc.w", RandomLeaf(&r, {1})), fatlab::Error);

  fs::remove_all(dir);
}

TEST_CASE("grad checker flags a corrupted gradient") {
  Var x = MakeLeaf(Tensor::Full({3}, 0.7), true);
  // A hand-built op with a deliberately wrong backward: forward is sum(x),
  // backward claims the gradient is 2.
  auto broken = [&]() {
    double s = 0.0;
    for (int64_t i = 0; i < 3; ++i) s += x->value[i];
    Node *nx = x.get();
    return MakeOpNode("broken_sum", Tensor::Scalar(s), {x}, [nx](Node *self) {
      nx->AccumulateGrad(Tensor::Full(nx->value.shape(), 2.0 * self->grad[0]));
    });
  };
  GradCheckResult res = CheckGradients(broken, {x});
  CHECK(res.max_rel_err > 0.4);
}
