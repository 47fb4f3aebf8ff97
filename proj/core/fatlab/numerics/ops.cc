// fatlab/numerics/ops.cc

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

#include "fatlab/numerics/ops.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include "fatlab/util/check.h"

namespace fatlab {
namespace numerics {

namespace {

// ---------------------------------------------------------------------------
// Broadcasting machinery (singleton dims only, right-aligned).

struct BroadcastPlan {
  std::vector<int64_t> out_shape;
  bool same_shape = false;
  // Right-aligned strides into a and b; 0 where the input dim is 1.
  std::vector<int64_t> a_stride, b_stride, out_dims;
};

BroadcastPlan PlanBroadcast(const char *op, const Tensor &a, const Tensor &b) {
  BroadcastPlan plan;
  if (a.shape() == b.shape()) {
    plan.out_shape = a.shape();
    plan.same_shape = true;
    return plan;
  }
  int ra = a.rank(), rb = b.rank();
  int r = std::max(ra, rb);
  plan.out_shape.assign(r, 1);
  for (int i = 0; i < r; ++i) {
    int64_t da = i < r - ra ? 1 : a.dim(i - (r - ra));
    int64_t db = i < r - rb ? 1 : b.dim(i - (r - rb));
    if (da != db && da != 1 && db != 1) {
      FATLAB_ERR << op << ": shapes not broadcastable: " << a.ShapeStr() << " vs "
                 << b.ShapeStr();
    }
    plan.out_shape[i] = std::max(da, db);
  }
  // Row-major strides with 0 on broadcast dims.
  plan.a_stride.assign(r, 0);
  plan.b_stride.assign(r, 0);
  plan.out_dims = plan.out_shape;
  int64_t sa = 1, sb = 1;
  for (int i = r - 1; i >= 0; --i) {
    int64_t da = i < r - ra ? 1 : a.dim(i - (r - ra));
    int64_t db = i < r - rb ? 1 : b.dim(i - (r - rb));
    plan.a_stride[i] = da == 1 ? 0 : sa;
    plan.b_stride[i] = db == 1 ? 0 : sb;
    sa *= da;
    sb *= db;
  }
  return plan;
}

// Reduce a gradient of out_shape down to the (broadcast) input shape by
// summing over expanded dims.
Tensor ReduceTo(const Tensor &grad, const std::vector<int64_t> &shape) {
  if (grad.shape() == shape) return grad;
  Tensor out(shape);
  int rg = grad.rank();
  int rs = static_cast<int>(shape.size());
  // Right-aligned strides of the target inside the grad index space.
  std::vector<int64_t> tstride(rg, 0);
  int64_t s = 1;
  for (int i = rg - 1; i >= 0; --i) {
    int64_t d = i < rg - rs ? 1 : shape[static_cast<size_t>(i - (rg - rs))];
    tstride[i] = d == 1 ? 0 : s;
    s *= d;
  }
  const auto &gd = grad.shape();
  std::vector<int64_t> idx(rg, 0);
  const double *g = grad.data();
  double *o = out.data();
  int64_t n = grad.numel();
  int64_t toff = 0;
  for (int64_t lin = 0; lin < n; ++lin) {
    o[toff] += g[lin];
    for (int i = rg - 1; i >= 0; --i) {
      if (++idx[i] < gd[static_cast<size_t>(i)]) {
        toff += tstride[i];
        break;
      }
      idx[i] = 0;
      toff -= tstride[i] * (gd[static_cast<size_t>(i)] - 1);
    }
  }
  return out;
}

enum class BinOp { kAdd, kSub, kMul, kDiv };

Var BinaryElementwise(const char *name, BinOp op, const Var &a, const Var &b) {
  const Tensor &ta = a->value, &tb = b->value;
  BroadcastPlan plan = PlanBroadcast(name, ta, tb);
  Tensor out(plan.out_shape);
  double *o = out.data();
  const double *pa = ta.data(), *pb = tb.data();
  int64_t n = out.numel();
  auto apply = [op](double x, double y) {
    switch (op) {
      case BinOp::kAdd: return x + y;
      case BinOp::kSub: return x - y;
      case BinOp::kMul: return x * y;
      case BinOp::kDiv: return x / y;
    }
    return 0.0;
  };
  if (plan.same_shape) {
    switch (op) {
      case BinOp::kAdd:
        for (int64_t i = 0; i < n; ++i) o[i] = pa[i] + pb[i];
        break;
      case BinOp::kSub:
        for (int64_t i = 0; i < n; ++i) o[i] = pa[i] - pb[i];
        break;
      case BinOp::kMul:
        for (int64_t i = 0; i < n; ++i) o[i] = pa[i] * pb[i];
        break;
      case BinOp::kDiv:
        for (int64_t i = 0; i < n; ++i) o[i] = pa[i] / pb[i];
        break;
    }
  } else {
    int r = static_cast<int>(plan.out_dims.size());
    std::vector<int64_t> idx(r, 0);
    int64_t ia = 0, ib = 0;
    for (int64_t lin = 0; lin < n; ++lin) {
      o[lin] = apply(pa[ia], pb[ib]);
      for (int i = r - 1; i >= 0; --i) {
        if (++idx[i] < plan.out_dims[static_cast<size_t>(i)]) {
          ia += plan.a_stride[i];
          ib += plan.b_stride[i];
          break;
        }
        idx[i] = 0;
        ia -= plan.a_stride[i] * (plan.out_dims[static_cast<size_t>(i)] - 1);
        ib -= plan.b_stride[i] * (plan.out_dims[static_cast<size_t>(i)] - 1);
      }
    }
  }

  Node *na = a.get(), *nb = b.get();
  return MakeOpNode(name, std::move(out), {a, b}, [na, nb, op](Node *self) {
    const Tensor &g = self->grad;
    const Tensor &va = na->value, &vb = nb->value;
    if (na->requires_grad) {
      Tensor ga(g.shape());
      double *d = ga.data();
      const double *gp = g.data();
      int64_t n = g.numel();
      switch (op) {
        case BinOp::kAdd:
        case BinOp::kSub:
          for (int64_t i = 0; i < n; ++i) d[i] = gp[i];
          break;
        case BinOp::kMul: {
          BroadcastPlan plan = PlanBroadcast("mul.bwd", va, vb);
          const double *pb = vb.data();
          if (plan.same_shape) {
            for (int64_t i = 0; i < n; ++i) d[i] = gp[i] * pb[i];
          } else {
            int r = static_cast<int>(plan.out_dims.size());
            std::vector<int64_t> idx(r, 0);
            int64_t ib = 0;
            for (int64_t lin = 0; lin < n; ++lin) {
              d[lin] = gp[lin] * pb[ib];
              for (int i = r - 1; i >= 0; --i) {
                if (++idx[i] < plan.out_dims[static_cast<size_t>(i)]) {
                  ib += plan.b_stride[i];
                  break;
                }
                idx[i] = 0;
                ib -= plan.b_stride[i] * (plan.out_dims[static_cast<size_t>(i)] - 1);
              }
            }
          }
          break;
        }
        case BinOp::kDiv: {
          BroadcastPlan plan = PlanBroadcast("div.bwd", va, vb);
          const double *pb = vb.data();
          if (plan.same_shape) {
            for (int64_t i = 0; i < n; ++i) d[i] = gp[i] / pb[i];
          } else {
            int r = static_cast<int>(plan.out_dims.size());
            std::vector<int64_t> idx(r, 0);
            int64_t ib = 0;
            for (int64_t lin = 0; lin < n; ++lin) {
              d[lin] = gp[lin] / pb[ib];
              for (int i = r - 1; i >= 0; --i) {
                if (++idx[i] < plan.out_dims[static_cast<size_t>(i)]) {
                  ib += plan.b_stride[i];
                  break;
                }
                idx[i] = 0;
                ib -= plan.b_stride[i] * (plan.out_dims[static_cast<size_t>(i)] - 1);
              }
            }
          }
          break;
        }
      }
      na->AccumulateGrad(ReduceTo(ga, va.shape()));
    }
    if (nb->requires_grad) {
      Tensor gb(g.shape());
      double *d = gb.data();
      const double *gp = g.data();
      int64_t n = g.numel();
      switch (op) {
        case BinOp::kAdd:
          for (int64_t i = 0; i < n; ++i) d[i] = gp[i];
          break;
        case BinOp::kSub:
          for (int64_t i = 0; i < n; ++i) d[i] = -gp[i];
          break;
        case BinOp::kMul:
        case BinOp::kDiv: {
          BroadcastPlan plan = PlanBroadcast("bin.bwd", va, vb);
          const double *pa = va.data(), *pb = vb.data();
          int r = static_cast<int>(plan.out_dims.size());
          std::vector<int64_t> idx(r, 0);
          int64_t ia = 0, ib = 0;
          bool same = plan.same_shape;
          for (int64_t lin = 0; lin < n; ++lin) {
            int64_t ja = same ? lin : ia, jb = same ? lin : ib;
            if (op == BinOp::kMul) {
              d[lin] = gp[lin] * pa[ja];
            } else {
              double bv = pb[jb];
              d[lin] = -gp[lin] * pa[ja] / (bv * bv);
            }
            if (!same) {
              for (int i = r - 1; i >= 0; --i) {
                if (++idx[i] < plan.out_dims[static_cast<size_t>(i)]) {
                  ia += plan.a_stride[i];
                  ib += plan.b_stride[i];
                  break;
                }
                idx[i] = 0;
                ia -= plan.a_stride[i] * (plan.out_dims[static_cast<size_t>(i)] - 1);
                ib -= plan.b_stride[i] * (plan.out_dims[static_cast<size_t>(i)] - 1);
              }
            }
          }
          break;
        }
      }
      nb->AccumulateGrad(ReduceTo(gb, vb.shape()));
    }
  });
}

// ---------------------------------------------------------------------------
// Unary helper.

template <typename Fwd, typename Bwd>
Var UnaryElementwise(const char *name, const Var &a, Fwd fwd, Bwd dfdx_from_x_and_y) {
  const Tensor &ta = a->value;
  Tensor out(ta.shape());
  const double *x = ta.data();
  double *y = out.data();
  int64_t n = ta.numel();
  for (int64_t i = 0; i < n; ++i) y[i] = fwd(x[i]);
  Node *na = a.get();
  return MakeOpNode(name, std::move(out), {a},
                    [na, dfdx_from_x_and_y](Node *self) {
                      if (!na->requires_grad) return;
                      const double *g = self->grad.data();
                      const double *x = na->value.data();
                      const double *y = self->value.data();
                      Tensor gx(na->value.shape());
                      double *d = gx.data();
                      int64_t n = gx.numel();
                      for (int64_t i = 0; i < n; ++i)
                        d[i] = g[i] * dfdx_from_x_and_y(x[i], y[i]);
                      na->AccumulateGrad(gx);
                    });
}

void SplitAxis(const std::vector<int64_t> &shape, int axis, int64_t *outer,
               int64_t *mid, int64_t *inner) {
  *outer = 1;
  *inner = 1;
  for (int i = 0; i < axis; ++i) *outer *= shape[static_cast<size_t>(i)];
  *mid = shape[static_cast<size_t>(axis)];
  for (size_t i = static_cast<size_t>(axis) + 1; i < shape.size(); ++i)
    *inner *= shape[i];
}

}  // namespace

// ---------------------------------------------------------------------------
// Elementwise.

Var Add(const Var &a, const Var &b) { return BinaryElementwise("add", BinOp::kAdd, a, b); }
Var Sub(const Var &a, const Var &b) { return BinaryElementwise("sub", BinOp::kSub, a, b); }
Var Mul(const Var &a, const Var &b) { return BinaryElementwise("mul", BinOp::kMul, a, b); }
Var Div(const Var &a, const Var &b) { return BinaryElementwise("div", BinOp::kDiv, a, b); }

Var Neg(const Var &a) {
  return UnaryElementwise(
      "neg", a, [](double x) { return -x; }, [](double, double) { return -1.0; });
}

Var ScalarMul(const Var &a, double c) {
  return UnaryElementwise(
      "scalar_mul", a, [c](double x) { return c * x; }, [c](double, double) { return c; });
}

Var ScalarAdd(const Var &a, double c) {
  return UnaryElementwise(
      "scalar_add", a, [c](double x) { return x + c; }, [](double, double) { return 1.0; });
}

// ---------------------------------------------------------------------------
// Matmul / transpose / reshape.

Var Matmul(const Var &a, const Var &b) {
  const Tensor &ta = a->value, &tb = b->value;
  FATLAB_CHECK(ta.rank() == 2 && tb.rank() == 2)
      << "(matmul needs rank-2 operands: " << ta.ShapeStr() << " x " << tb.ShapeStr() << ")";
  if (ta.cols() != tb.rows()) {
    FATLAB_ERR << "matmul: inner dimensions differ: " << ta.ShapeStr() << " x "
               << tb.ShapeStr();
  }
  int64_t m = ta.rows(), k = ta.cols(), n2 = tb.cols();
  Tensor out({m, n2});
  {
    const double *pa = ta.data(), *pb = tb.data();
    double *po = out.data();
    for (int64_t i = 0; i < m; ++i) {
      double *orow = po + i * n2;
      const double *arow = pa + i * k;
      for (int64_t kk = 0; kk < k; ++kk) {
        double av = arow[kk];
        if (av == 0.0) continue;
        const double *brow = pb + kk * n2;
        for (int64_t j = 0; j < n2; ++j) orow[j] += av * brow[j];
      }
    }
  }
  Node *na = a.get(), *nb = b.get();
  return MakeOpNode("matmul", std::move(out), {a, b}, [na, nb](Node *self) {
    const Tensor &g = self->grad;
    const Tensor &va = na->value, &vb = nb->value;
    int64_t m = va.rows(), k = va.cols(), n2 = vb.cols();
    if (na->requires_grad) {
      // dA = dC * B^T; rows of dC and rows of B are both contiguous.
      Tensor ga({m, k});
      const double *pg = g.data(), *pb = vb.data();
      double *pda = ga.data();
      for (int64_t i = 0; i < m; ++i) {
        const double *grow = pg + i * n2;
        double *darow = pda + i * k;
        for (int64_t kk = 0; kk < k; ++kk) {
          const double *brow = pb + kk * n2;
          double acc = 0.0;
          for (int64_t j = 0; j < n2; ++j) acc += grow[j] * brow[j];
          darow[kk] = acc;
        }
      }
      na->AccumulateGrad(ga);
    }
    if (nb->requires_grad) {
      // dB = A^T * dC.
      Tensor gb({k, n2});
      const double *pg = g.data(), *pa = va.data();
      double *pdb = gb.data();
      for (int64_t i = 0; i < m; ++i) {
        const double *arow = pa + i * k;
        const double *grow = pg + i * n2;
        for (int64_t kk = 0; kk < k; ++kk) {
          double av = arow[kk];
          if (av == 0.0) continue;
          double *dbrow = pdb + kk * n2;
          for (int64_t j = 0; j < n2; ++j) dbrow[j] += av * grow[j];
        }
      }
      nb->AccumulateGrad(gb);
    }
  });
}

Var Transpose(const Var &a) {
  const Tensor &ta = a->value;
  FATLAB_CHECK(ta.rank() == 2) << "(transpose needs rank 2, got " << ta.ShapeStr() << ")";
  int64_t m = ta.rows(), n = ta.cols();
  Tensor out({n, m});
  for (int64_t i = 0; i < m; ++i)
    for (int64_t j = 0; j < n; ++j) out.at2(j, i) = ta.at2(i, j);
  Node *na = a.get();
  return MakeOpNode("transpose", std::move(out), {a}, [na](Node *self) {
    if (!na->requires_grad) return;
    const Tensor &g = self->grad;
    int64_t n = g.rows(), m = g.cols();
    Tensor ga({m, n});
    for (int64_t j = 0; j < n; ++j)
      for (int64_t i = 0; i < m; ++i) ga.at2(i, j) = g.at2(j, i);
    na->AccumulateGrad(ga);
  });
}

Var Reshape(const Var &a, std::vector<int64_t> shape) {
  const Tensor &ta = a->value;
  int64_t n = NumelOf(shape);
  if (n != ta.numel()) {
    FATLAB_ERR << "reshape: element count mismatch: " << ta.ShapeStr() << " -> "
               << ShapeStr(shape);
  }
  Tensor out(std::move(shape), ta.vec());
  Node *na = a.get();
  return MakeOpNode("reshape", std::move(out), {a}, [na](Node *self) {
    if (!na->requires_grad) return;
    Tensor ga(na->value.shape(), self->grad.vec());
    na->AccumulateGrad(ga);
  });
}

// ---------------------------------------------------------------------------
// Concat / slice / gather.

Var Concat(const std::vector<Var> &parts, int axis) {
  FATLAB_CHECK(!parts.empty()) << "(concat of zero tensors)";
  const Tensor &t0 = parts[0]->value;
  int r = t0.rank();
  FATLAB_CHECK(axis >= 0 && axis < r) << "(concat axis " << axis << " for rank " << r << ")";
  std::vector<int64_t> out_shape = t0.shape();
  int64_t total_axis = 0;
  for (const auto &p : parts) {
    const Tensor &t = p->value;
    FATLAB_CHECK(t.rank() == r) << "(concat rank mismatch " << t.ShapeStr() << " vs "
                                << t0.ShapeStr() << ")";
    for (int i = 0; i < r; ++i) {
      if (i != axis && t.dim(i) != t0.dim(i)) {
        FATLAB_ERR << "concat: shape mismatch off-axis: " << t.ShapeStr() << " vs "
                   << t0.ShapeStr();
      }
    }
    total_axis += t.dim(axis);
  }
  out_shape[static_cast<size_t>(axis)] = total_axis;
  Tensor out(out_shape);

  int64_t outer, mid_unused, inner;
  SplitAxis(out_shape, axis, &outer, &mid_unused, &inner);
  double *po = out.data();
  int64_t axis_off = 0;
  for (const auto &p : parts) {
    const Tensor &t = p->value;
    int64_t mid = t.dim(axis);
    const double *pt = t.data();
    for (int64_t o = 0; o < outer; ++o) {
      double *dst = po + (o * total_axis + axis_off) * inner;
      const double *src = pt + o * mid * inner;
      std::copy(src, src + mid * inner, dst);
    }
    axis_off += mid;
  }

  std::vector<Node *> raw;
  raw.reserve(parts.size());
  for (const auto &p : parts) raw.push_back(p.get());
  return MakeOpNode("concat", std::move(out), parts,
                    [raw, axis, outer, inner, total_axis](Node *self) {
                      const double *g = self->grad.data();
                      int64_t axis_off = 0;
                      for (Node *p : raw) {
                        int64_t mid = p->value.dim(axis);
                        if (p->requires_grad) {
                          Tensor gp(p->value.shape());
                          double *d = gp.data();
                          for (int64_t o = 0; o < outer; ++o) {
                            const double *src = g + (o * total_axis + axis_off) * inner;
                            std::copy(src, src + mid * inner, d + o * mid * inner);
                          }
                          p->AccumulateGrad(gp);
                        }
                        axis_off += mid;
                      }
                    });
}

Var Slice(const Var &a, int axis, int64_t start, int64_t len) {
  const Tensor &ta = a->value;
  int r = ta.rank();
  FATLAB_CHECK(axis >= 0 && axis < r) << "(slice axis " << axis << " for rank " << r << ")";
  FATLAB_CHECK(start >= 0 && len >= 0 && start + len <= ta.dim(axis))
      << "(slice [" << start << "," << start + len << ") of axis size " << ta.dim(axis)
      << " in " << ta.ShapeStr() << ")";
  std::vector<int64_t> out_shape = ta.shape();
  out_shape[static_cast<size_t>(axis)] = len;
  Tensor out(out_shape);
  int64_t outer, mid, inner;
  SplitAxis(ta.shape(), axis, &outer, &mid, &inner);
  const double *pa = ta.data();
  double *po = out.data();
  for (int64_t o = 0; o < outer; ++o) {
    const double *src = pa + (o * mid + start) * inner;
    std::copy(src, src + len * inner, po + o * len * inner);
  }
  Node *na = a.get();
  return MakeOpNode("slice", std::move(out), {a},
                    [na, axis, start, len, outer, mid, inner](Node *self) {
                      if (!na->requires_grad) return;
                      Tensor ga(na->value.shape());
                      const double *g = self->grad.data();
                      double *d = ga.data();
                      for (int64_t o = 0; o < outer; ++o) {
                        const double *src = g + o * len * inner;
                        std::copy(src, src + len * inner, d + (o * mid + start) * inner);
                      }
                      na->AccumulateGrad(ga);
                    });
}

Var GatherRows(const Var &a, const std::vector<int64_t> &indices) {
  const Tensor &ta = a->value;
  FATLAB_CHECK(ta.rank() == 2) << "(gather_rows needs rank 2, got " << ta.ShapeStr() << ")";
  int64_t rows = ta.rows(), cols = ta.cols();
  for (int64_t id : indices) {
    FATLAB_CHECK(id >= 0 && id < rows)
        << "(gather_rows index " << id << " out of range for " << ta.ShapeStr() << ")";
  }
  Tensor out({static_cast<int64_t>(indices.size()), cols});
  for (size_t i = 0; i < indices.size(); ++i) {
    const double *src = ta.data() + indices[i] * cols;
    std::copy(src, src + cols, out.data() + static_cast<int64_t>(i) * cols);
  }
  Node *na = a.get();
  return MakeOpNode("gather_rows", std::move(out), {a}, [na, indices](Node *self) {
    if (!na->requires_grad) return;
    int64_t cols = na->value.cols();
    Tensor ga(na->value.shape());
    const double *g = self->grad.data();
    double *d = ga.data();
    for (size_t i = 0; i < indices.size(); ++i) {
      const double *src = g + static_cast<int64_t>(i) * cols;
      double *dst = d + indices[i] * cols;
      for (int64_t c = 0; c < cols; ++c) dst[c] += src[c];
    }
    na->AccumulateGrad(ga);
  });
}

Var ReplaceRows(const Var &x, const std::vector<int64_t> &indices, const Var &row) {
  const Tensor &tx = x->value;
  const Tensor &tr = row->value;
  FATLAB_CHECK(tx.rank() == 2) << "(replace_rows needs rank 2, got " << tx.ShapeStr() << ")";
  int64_t cols = tx.cols();
  FATLAB_CHECK(tr.numel() == cols) << "(replace_rows row " << tr.ShapeStr()
                                   << " vs matrix " << tx.ShapeStr() << ")";
  for (int64_t id : indices) {
    FATLAB_CHECK(id >= 0 && id < tx.rows())
        << "(replace_rows index " << id << " out of range for " << tx.ShapeStr() << ")";
  }
  Tensor out = tx;
  for (int64_t id : indices) {
    std::copy(tr.data(), tr.data() + cols, out.data() + id * cols);
  }
  Node *nx = x.get(), *nr = row.get();
  return MakeOpNode("replace_rows", std::move(out), {x, row}, [nx, nr, indices](Node *self) {
    const Tensor &g = self->grad;
    int64_t cols = nx->value.cols();
    if (nx->requires_grad) {
      Tensor gx = g;
      for (int64_t id : indices) {
        std::fill(gx.data() + id * cols, gx.data() + (id + 1) * cols, 0.0);
      }
      nx->AccumulateGrad(gx);
    }
    if (nr->requires_grad) {
      Tensor gr(nr->value.shape());
      double *d = gr.data();
      for (int64_t id : indices) {
        const double *src = g.data() + id * cols;
        for (int64_t c = 0; c < cols; ++c) d[c] += src[c];
      }
      nr->AccumulateGrad(gr);
    }
  });
}

// ---------------------------------------------------------------------------
// Softmax family.

Var Softmax(const Var &a) {
  const Tensor &ta = a->value;
  FATLAB_CHECK(ta.rank() >= 1) << "(softmax of empty tensor)";
  int64_t cols = ta.dim(ta.rank() - 1);
  int64_t rows = ta.numel() / cols;
  Tensor out(ta.shape());
  for (int64_t r = 0; r < rows; ++r) {
    const double *x = ta.data() + r * cols;
    double *y = out.data() + r * cols;
    double mx = x[0];
    for (int64_t c = 1; c < cols; ++c) mx = std::max(mx, x[c]);
    double sum = 0.0;
    for (int64_t c = 0; c < cols; ++c) {
      y[c] = std::exp(x[c] - mx);
      sum += y[c];
    }
    double inv = 1.0 / sum;
    for (int64_t c = 0; c < cols; ++c) y[c] *= inv;
  }
  Node *na = a.get();
  return MakeOpNode("softmax", std::move(out), {a}, [na, rows, cols](Node *self) {
    if (!na->requires_grad) return;
    Tensor ga(na->value.shape());
    const double *g = self->grad.data();
    const double *y = self->value.data();
    double *d = ga.data();
    for (int64_t r = 0; r < rows; ++r) {
      const double *gr = g + r * cols;
      const double *yr = y + r * cols;
      double dot = 0.0;
      for (int64_t c = 0; c < cols; ++c) dot += gr[c] * yr[c];
      double *dr = d + r * cols;
      for (int64_t c = 0; c < cols; ++c) dr[c] = (gr[c] - dot) * yr[c];
    }
    na->AccumulateGrad(ga);
  });
}

Var LogSoftmax(const Var &a) {
  const Tensor &ta = a->value;
  FATLAB_CHECK(ta.rank() >= 1) << "(log_softmax of empty tensor)";
  int64_t cols = ta.dim(ta.rank() - 1);
  int64_t rows = ta.numel() / cols;
  Tensor out(ta.shape());
  for (int64_t r = 0; r < rows; ++r) {
    const double *x = ta.data() + r * cols;
    double *y = out.data() + r * cols;
    double mx = x[0];
    for (int64_t c = 1; c < cols; ++c) mx = std::max(mx, x[c]);
    double sum = 0.0;
    for (int64_t c = 0; c < cols; ++c) sum += std::exp(x[c] - mx);
    double lse = mx + std::log(sum);
    for (int64_t c = 0; c < cols; ++c) y[c] = x[c] - lse;
  }
  Node *na = a.get();
  return MakeOpNode("log_softmax", std::move(out), {a}, [na, rows, cols](Node *self) {
    if (!na->requires_grad) return;
    Tensor ga(na->value.shape());
    const double *g = self->grad.data();
    const double *y = self->value.data();
    double *d = ga.data();
    for (int64_t r = 0; r < rows; ++r) {
      const double *gr = g + r * cols;
      const double *yr = y + r * cols;
      double gsum = 0.0;
      for (int64_t c = 0; c < cols; ++c) gsum += gr[c];
      double *dr = d + r * cols;
      for (int64_t c = 0; c < cols; ++c) dr[c] = gr[c] - std::exp(yr[c]) * gsum;
    }
    na->AccumulateGrad(ga);
  });
}

// ---------------------------------------------------------------------------
// Pointwise nonlinearities.

Var Sigmoid(const Var &a) {
  // Output kept strictly inside (0,1): a saturated lane has zero gradient
  // anyway and downstream code (mask estimators) relies on the open interval.
  static const double kOneMinus = std::nextafter(1.0, 0.0);
  return UnaryElementwise(
      "sigmoid", a,
      [](double x) {
        double y = x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
        if (y <= 0.0) y = std::numeric_limits<double>::min();
        if (y >= 1.0) y = kOneMinus;
        return y;
      },
      [](double, double y) { return y * (1.0 - y); });
}

Var TanhOp(const Var &a) {
  return UnaryElementwise(
      "tanh", a, [](double x) { return std::tanh(x); },
      [](double, double y) { return 1.0 - y * y; });
}

Var Relu(const Var &a) {
  return UnaryElementwise(
      "relu", a, [](double x) { return x > 0 ? x : 0.0; },
      [](double x, double) { return x > 0 ? 1.0 : 0.0; });
}

Var Gelu(const Var &a) {
  // Exact erf form.
  const double kInvSqrt2 = 0.7071067811865476;
  const double kInvSqrt2Pi = 0.3989422804014327;
  return UnaryElementwise(
      "gelu", a,
      [kInvSqrt2](double x) { return 0.5 * x * (1.0 + std::erf(x * kInvSqrt2)); },
      [kInvSqrt2, kInvSqrt2Pi](double x, double) {
        double cdf = 0.5 * (1.0 + std::erf(x * kInvSqrt2));
        double pdf = kInvSqrt2Pi * std::exp(-0.5 * x * x);
        return cdf + x * pdf;
      });
}

Var Exp(const Var &a) {
  return UnaryElementwise(
      "exp", a, [](double x) { return std::exp(x); },
      [](double, double y) { return y; });
}

Var Log(const Var &a) {
  return UnaryElementwise(
      "log", a, [](double x) { return std::log(x); },
      [](double x, double) { return 1.0 / x; });
}

Var Sqrt(const Var &a) {
  return UnaryElementwise(
      "sqrt", a, [](double x) { return std::sqrt(x); },
      [](double, double y) { return 0.5 / y; });
}

// ---------------------------------------------------------------------------
// Reductions.

Var Sum(const Var &a) {
  const Tensor &ta = a->value;
  double acc = 0.0;
  const double *x = ta.data();
  int64_t n = ta.numel();
  for (int64_t i = 0; i < n; ++i) acc += x[i];
  Node *na = a.get();
  return MakeOpNode("sum", Tensor::Scalar(acc), {a}, [na](Node *self) {
    if (!na->requires_grad) return;
    double g = self->grad[0];
    na->AccumulateGrad(Tensor::Full(na->value.shape(), g));
  });
}

Var Mean(const Var &a) {
  const Tensor &ta = a->value;
  FATLAB_CHECK(ta.numel() > 0) << "(mean of empty tensor)";
  double acc = 0.0;
  const double *x = ta.data();
  int64_t n = ta.numel();
  for (int64_t i = 0; i < n; ++i) acc += x[i];
  Node *na = a.get();
  return MakeOpNode("mean", Tensor::Scalar(acc / static_cast<double>(n)), {a},
                    [na, n](Node *self) {
                      if (!na->requires_grad) return;
                      double g = self->grad[0] / static_cast<double>(n);
                      na->AccumulateGrad(Tensor::Full(na->value.shape(), g));
                    });
}

// ---------------------------------------------------------------------------
// Layer norm.

Var LayerNorm(const Var &x, const Var &gamma, const Var &beta, double eps) {
  const Tensor &tx = x->value;
  FATLAB_CHECK(tx.rank() >= 1) << "(layer_norm of empty tensor)";
  int64_t cols = tx.dim(tx.rank() - 1);
  int64_t rows = tx.numel() / cols;
  FATLAB_CHECK(gamma->value.numel() == cols && beta->value.numel() == cols)
      << "(layer_norm affine " << gamma->value.ShapeStr() << "/" << beta->value.ShapeStr()
      << " vs last dim " << cols << " of " << tx.ShapeStr() << ")";

  Tensor out(tx.shape());
  // Cached per-row statistics for the backward pass.
  auto stats = std::make_shared<std::vector<double>>(static_cast<size_t>(rows * 2));
  const double *g = gamma->value.data();
  const double *b = beta->value.data();
  for (int64_t r = 0; r < rows; ++r) {
    const double *xr = tx.data() + r * cols;
    double *yr = out.data() + r * cols;
    double mean = 0.0;
    for (int64_t c = 0; c < cols; ++c) mean += xr[c];
    mean /= static_cast<double>(cols);
    double var = 0.0;
    for (int64_t c = 0; c < cols; ++c) {
      double d = xr[c] - mean;
      var += d * d;
    }
    var /= static_cast<double>(cols);
    double inv_std = 1.0 / std::sqrt(var + eps);
    (*stats)[static_cast<size_t>(2 * r)] = mean;
    (*stats)[static_cast<size_t>(2 * r + 1)] = inv_std;
    for (int64_t c = 0; c < cols; ++c) {
      yr[c] = (xr[c] - mean) * inv_std * g[c] + b[c];
    }
  }

  Node *nx = x.get(), *ng = gamma.get(), *nb = beta.get();
  return MakeOpNode(
      "layer_norm", std::move(out), {x, gamma, beta}, [nx, ng, nb, stats, rows, cols](Node *self) {
        const double *gr = self->grad.data();
        const double *xv = nx->value.data();
        const double *gv = ng->value.data();
        Tensor gx(nx->value.shape());
        Tensor gg({cols});
        Tensor gb({cols});
        double *dgx = gx.data();
        double *dgg = gg.data();
        double *dgb = gb.data();
        double invn = 1.0 / static_cast<double>(cols);
        for (int64_t r = 0; r < rows; ++r) {
          double mean = (*stats)[static_cast<size_t>(2 * r)];
          double inv_std = (*stats)[static_cast<size_t>(2 * r + 1)];
          const double *xr = xv + r * cols;
          const double *gy = gr + r * cols;
          double sum_dxhat = 0.0, sum_dxhat_xhat = 0.0;
          for (int64_t c = 0; c < cols; ++c) {
            double xhat = (xr[c] - mean) * inv_std;
            double dxhat = gy[c] * gv[c];
            sum_dxhat += dxhat;
            sum_dxhat_xhat += dxhat * xhat;
            dgg[c] += gy[c] * xhat;
            dgb[c] += gy[c];
          }
          double *dxr = dgx + r * cols;
          for (int64_t c = 0; c < cols; ++c) {
            double xhat = (xr[c] - mean) * inv_std;
            double dxhat = gy[c] * gv[c];
            dxr[c] = inv_std * (dxhat - invn * sum_dxhat - xhat * invn * sum_dxhat_xhat);
          }
        }
        if (nx->requires_grad) nx->AccumulateGrad(gx);
        if (ng->requires_grad) ng->AccumulateGrad(gg);
        if (nb->requires_grad) nb->AccumulateGrad(gb);
      });
}

// ---------------------------------------------------------------------------
// Cross entropy.

Var CrossEntropyRows(const Var &logits, const std::vector<int64_t> &ids) {
  const Tensor &tl = logits->value;
  FATLAB_CHECK(tl.rank() == 2) << "(cross_entropy needs rank-2 logits, got "
                               << tl.ShapeStr() << ")";
  int64_t rows = tl.rows(), cols = tl.cols();
  FATLAB_CHECK(static_cast<int64_t>(ids.size()) == rows)
      << "(cross_entropy " << ids.size() << " targets vs " << rows << " rows)";
  for (int64_t id : ids) {
    FATLAB_CHECK(id >= 0 && id < cols)
        << "(cross_entropy class " << id << " out of range " << cols << ")";
  }
  Tensor out({rows});
  for (int64_t r = 0; r < rows; ++r) {
    const double *x = tl.data() + r * cols;
    double mx = x[0];
    for (int64_t c = 1; c < cols; ++c) mx = std::max(mx, x[c]);
    double sum = 0.0;
    for (int64_t c = 0; c < cols; ++c) sum += std::exp(x[c] - mx);
    out[r] = mx + std::log(sum) - x[ids[static_cast<size_t>(r)]];
  }
  Node *nl = logits.get();
  return MakeOpNode("cross_entropy_rows", std::move(out), {logits},
                    [nl, ids, rows, cols](Node *self) {
                      if (!nl->requires_grad) return;
                      const double *g = self->grad.data();
                      const double *x = nl->value.data();
                      Tensor gl(nl->value.shape());
                      double *d = gl.data();
                      for (int64_t r = 0; r < rows; ++r) {
                        const double *xr = x + r * cols;
                        double mx = xr[0];
                        for (int64_t c = 1; c < cols; ++c) mx = std::max(mx, xr[c]);
                        double sum = 0.0;
                        for (int64_t c = 0; c < cols; ++c) sum += std::exp(xr[c] - mx);
                        double *dr = d + r * cols;
                        double grad_r = g[r];
                        for (int64_t c = 0; c < cols; ++c) {
                          double p = std::exp(xr[c] - mx) / sum;
                          dr[c] = grad_r * p;
                        }
                        dr[ids[static_cast<size_t>(r)]] -= grad_r;
                      }
                      nl->AccumulateGrad(gl);
                    });
}

// ---------------------------------------------------------------------------
// Convolutions.

Var Conv1d(const Var &x, const Var &w, const Var &b, int64_t stride, int64_t pad,
           int64_t dilation) {
  const Tensor &tx = x->value, &tw = w->value;
  FATLAB_CHECK(tx.rank() == 2) << "(conv1d input must be [C,T], got " << tx.ShapeStr() << ")";
  FATLAB_CHECK(tw.rank() == 3) << "(conv1d weight must be [Cout,Cin,K], got "
                               << tw.ShapeStr() << ")";
  FATLAB_CHECK(stride >= 1 && pad >= 0 && dilation >= 1)
      << "(conv1d stride " << stride << " pad " << pad << " dilation " << dilation << ")";
  int64_t cin = tx.dim(0), t_in = tx.dim(1);
  int64_t cout = tw.dim(0), k = tw.dim(2);
  if (tw.dim(1) != cin) {
    FATLAB_ERR << "conv1d: channel mismatch: input " << tx.ShapeStr() << " vs weight "
               << tw.ShapeStr();
  }
  int64_t span = (k - 1) * dilation + 1;
  int64_t t_out = (t_in + 2 * pad - span) / stride + 1;
  if (t_in + 2 * pad < span || t_out < 1) {
    FATLAB_ERR << "conv1d: input shorter than receptive field: T=" << t_in << " pad=" << pad
               << " span=" << span;
  }
  bool has_bias = b != nullptr;
  if (has_bias) {
    FATLAB_CHECK(b->value.numel() == cout)
        << "(conv1d bias " << b->value.ShapeStr() << " vs Cout " << cout << ")";
  }

  Tensor out({cout, t_out});
  {
    const double *px = tx.data();
    const double *pw = tw.data();
    double *po = out.data();
    for (int64_t co = 0; co < cout; ++co) {
      double *orow = po + co * t_out;
      if (has_bias) {
        double bv = b->value[co];
        for (int64_t t = 0; t < t_out; ++t) orow[t] = bv;
      }
      for (int64_t ci = 0; ci < cin; ++ci) {
        const double *xrow = px + ci * t_in;
        const double *wrow = pw + (co * cin + ci) * k;
        for (int64_t kk = 0; kk < k; ++kk) {
          double wv = wrow[kk];
          if (wv == 0.0) continue;
          int64_t off = kk * dilation - pad;
          // valid t: 0 <= t*stride + off < t_in
          int64_t t_lo = off < 0 ? (-off + stride - 1) / stride : 0;
          int64_t t_hi = t_out;
          if (off + (t_out - 1) * stride >= t_in) {
            t_hi = (t_in - off + stride - 1) / stride;
            if (t_hi > t_out) t_hi = t_out;
          }
          const double *xs = xrow + off;
          for (int64_t t = t_lo; t < t_hi; ++t) orow[t] += wv * xs[t * stride];
        }
      }
    }
  }

  std::vector<Var> parents = has_bias ? std::vector<Var>{x, w, b} : std::vector<Var>{x, w};
  Node *nx = x.get(), *nw = w.get();
  Node *nb = has_bias ? b.get() : nullptr;
  return MakeOpNode(
      "conv1d", std::move(out), std::move(parents),
      [nx, nw, nb, stride, pad, dilation, cin, cout, k, t_in, t_out](Node *self) {
        const double *g = self->grad.data();
        if (nx->requires_grad) {
          Tensor gx(nx->value.shape());
          double *d = gx.data();
          const double *pw = nw->value.data();
          for (int64_t co = 0; co < cout; ++co) {
            const double *grow = g + co * t_out;
            for (int64_t ci = 0; ci < cin; ++ci) {
              double *drow = d + ci * t_in;
              const double *wrow = pw + (co * cin + ci) * k;
              for (int64_t kk = 0; kk < k; ++kk) {
                double wv = wrow[kk];
                if (wv == 0.0) continue;
                int64_t off = kk * dilation - pad;
                for (int64_t t = 0; t < t_out; ++t) {
                  int64_t ti = t * stride + off;
                  if (ti >= 0 && ti < t_in) drow[ti] += wv * grow[t];
                }
              }
            }
          }
          nx->AccumulateGrad(gx);
        }
        if (nw->requires_grad) {
          Tensor gw(nw->value.shape());
          double *d = gw.data();
          const double *px = nx->value.data();
          for (int64_t co = 0; co < cout; ++co) {
            const double *grow = g + co * t_out;
            for (int64_t ci = 0; ci < cin; ++ci) {
              const double *xrow = px + ci * t_in;
              double *drow = d + (co * cin + ci) * k;
              for (int64_t kk = 0; kk < k; ++kk) {
                int64_t off = kk * dilation - pad;
                double acc = 0.0;
                for (int64_t t = 0; t < t_out; ++t) {
                  int64_t ti = t * stride + off;
                  if (ti >= 0 && ti < t_in) acc += grow[t] * xrow[ti];
                }
                drow[kk] += acc;
              }
            }
          }
          nw->AccumulateGrad(gw);
        }
        if (nb != nullptr && nb->requires_grad) {
          Tensor gb(nb->value.shape());
          for (int64_t co = 0; co < cout; ++co) {
            const double *grow = g + co * t_out;
            double acc = 0.0;
            for (int64_t t = 0; t < t_out; ++t) acc += grow[t];
            gb[co] = acc;
          }
          nb->AccumulateGrad(gb);
        }
      });
}

Var ConvTranspose1d(const Var &x, const Var &w, const Var &b, int64_t stride, int64_t pad) {
  const Tensor &tx = x->value, &tw = w->value;
  FATLAB_CHECK(tx.rank() == 2) << "(conv_transpose1d input must be [C,T], got "
                               << tx.ShapeStr() << ")";
  FATLAB_CHECK(tw.rank() == 3) << "(conv_transpose1d weight must be [Cin,Cout,K], got "
                               << tw.ShapeStr() << ")";
  FATLAB_CHECK(stride >= 1 && pad >= 0)
      << "(conv_transpose1d stride " << stride << " pad " << pad << ")";
  int64_t cin = tx.dim(0), t_in = tx.dim(1);
  int64_t cout = tw.dim(1), k = tw.dim(2);
  if (tw.dim(0) != cin) {
    FATLAB_ERR << "conv_transpose1d: channel mismatch: input " << tx.ShapeStr()
               << " vs weight " << tw.ShapeStr();
  }
  int64_t t_out = (t_in - 1) * stride + k - 2 * pad;
  FATLAB_CHECK(t_out >= 1) << "(conv_transpose1d degenerate output length " << t_out << ")";
  bool has_bias = b != nullptr;
  if (has_bias) {
    FATLAB_CHECK(b->value.numel() == cout)
        << "(conv_transpose1d bias " << b->value.ShapeStr() << " vs Cout " << cout << ")";
  }

  Tensor out({cout, t_out});
  {
    const double *px = tx.data();
    const double *pw = tw.data();
    double *po = out.data();
    if (has_bias) {
      for (int64_t co = 0; co < cout; ++co) {
        double bv = b->value[co];
        double *orow = po + co * t_out;
        for (int64_t t = 0; t < t_out; ++t) orow[t] = bv;
      }
    }
    for (int64_t ci = 0; ci < cin; ++ci) {
      const double *xrow = px + ci * t_in;
      for (int64_t co = 0; co < cout; ++co) {
        const double *wrow = pw + (ci * cout + co) * k;
        double *orow = po + co * t_out;
        for (int64_t t = 0; t < t_in; ++t) {
          double xv = xrow[t];
          if (xv == 0.0) continue;
          int64_t base = t * stride - pad;
          for (int64_t kk = 0; kk < k; ++kk) {
            int64_t to = base + kk;
            if (to >= 0 && to < t_out) orow[to] += xv * wrow[kk];
          }
        }
      }
    }
  }

  std::vector<Var> parents = has_bias ? std::vector<Var>{x, w, b} : std::vector<Var>{x, w};
  Node *nx = x.get(), *nw = w.get();
  Node *nb = has_bias ? b.get() : nullptr;
  return MakeOpNode(
      "conv_transpose1d", std::move(out), std::move(parents),
      [nx, nw, nb, stride, pad, cin, cout, k, t_in, t_out](Node *self) {
        const double *g = self->grad.data();
        if (nx->requires_grad) {
          Tensor gx(nx->value.shape());
          double *d = gx.data();
          const double *pw = nw->value.data();
          for (int64_t ci = 0; ci < cin; ++ci) {
            double *drow = d + ci * t_in;
            for (int64_t co = 0; co < cout; ++co) {
              const double *wrow = pw + (ci * cout + co) * k;
              const double *grow = g + co * t_out;
              for (int64_t t = 0; t < t_in; ++t) {
                int64_t base = t * stride - pad;
                double acc = 0.0;
                for (int64_t kk = 0; kk < k; ++kk) {
                  int64_t to = base + kk;
                  if (to >= 0 && to < t_out) acc += grow[to] * wrow[kk];
                }
                drow[t] += acc;
              }
            }
          }
          nx->AccumulateGrad(gx);
        }
        if (nw->requires_grad) {
          Tensor gw(nw->value.shape());
          double *d = gw.data();
          const double *px = nx->value.data();
          for (int64_t ci = 0; ci < cin; ++ci) {
            const double *xrow = px + ci * t_in;
            for (int64_t co = 0; co < cout; ++co) {
              double *drow = d + (ci * cout + co) * k;
              const double *grow = g + co * t_out;
              for (int64_t t = 0; t < t_in; ++t) {
                double xv = xrow[t];
                if (xv == 0.0) continue;
                int64_t base = t * stride - pad;
                for (int64_t kk = 0; kk < k; ++kk) {
                  int64_t to = base + kk;
                  if (to >= 0 && to < t_out) drow[kk] += xv * grow[to];
                }
              }
            }
          }
          nw->AccumulateGrad(gw);
        }
        if (nb != nullptr && nb->requires_grad) {
          Tensor gb(nb->value.shape());
          for (int64_t co = 0; co < cout; ++co) {
            const double *grow = g + co * t_out;
            double acc = 0.0;
            for (int64_t t = 0; t < t_out; ++t) acc += grow[t];
            gb[co] = acc;
          }
          nb->AccumulateGrad(gb);
        }
      });
}

}  // namespace numerics
}  // namespace fatlab
