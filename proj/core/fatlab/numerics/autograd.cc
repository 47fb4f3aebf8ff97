// fatlab/numerics/autograd.cc

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

#include "fatlab/numerics/autograd.h"

#include <unordered_set>

#include "fatlab/util/check.h"

namespace fatlab {
namespace numerics {

namespace {
thread_local int g_no_grad_depth = 0;
}  // namespace

NoGradGuard::NoGradGuard() { ++g_no_grad_depth; }
NoGradGuard::~NoGradGuard() { --g_no_grad_depth; }
bool GradEnabled() { return g_no_grad_depth == 0; }

void Node::AccumulateGrad(const Tensor &g) {
  FATLAB_CHECK(g.shape() == value.shape())
      << "(gradient shape " << numerics::ShapeStr(g.shape()) << " vs value shape "
      << value.ShapeStr() << " at op " << op << ")";
  EnsureGrad();
  double *dst = grad.data();
  const double *src = g.data();
  int64_t n = g.numel();
  for (int64_t i = 0; i < n; ++i) dst[i] += src[i];
}

Var MakeLeaf(Tensor value, bool requires_grad, std::string name) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  n->requires_grad = requires_grad;
  n->is_leaf = true;
  n->op = "leaf";
  n->name = std::move(name);
  return n;
}

Var MakeConst(Tensor value) { return MakeLeaf(std::move(value), false); }

Var MakeOpNode(const char *op, Tensor value, std::vector<Var> parents,
               std::function<void(Node *)> backprop) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  n->op = op;
  bool needs = GradEnabled();
  if (needs) {
    needs = false;
    for (const auto &p : parents) {
      if (p && p->requires_grad) {
        needs = true;
        break;
      }
    }
  }
  if (needs) {
    n->requires_grad = true;
    n->parents = std::move(parents);
    n->backprop = std::move(backprop);
  }
  return n;
}

void Backward(const Var &loss) {
  FATLAB_CHECK(loss != nullptr) << "(backward on null)";
  if (loss->value.numel() != 1) {
    FATLAB_ERR << "backward requires a scalar loss, got shape " << loss->value.ShapeStr();
  }
  FATLAB_CHECK(loss->requires_grad) << "(backward on a graph with no trainable inputs)";

  // Iterative post-order DFS; each node appears once (visited by pointer),
  // which is what makes fan-out gradients sum instead of multiply-visit.
  std::vector<Node *> order;
  std::unordered_set<Node *> visited;
  struct Frame {
    Node *node;
    size_t next_parent;
  };
  std::vector<Frame> stack;
  stack.push_back({loss.get(), 0});
  visited.insert(loss.get());
  while (!stack.empty()) {
    Frame &f = stack.back();
    if (f.next_parent < f.node->parents.size()) {
      Node *p = f.node->parents[f.next_parent].get();
      ++f.next_parent;
      if (p != nullptr && p->requires_grad && visited.insert(p).second) {
        stack.push_back({p, 0});
      }
    } else {
      order.push_back(f.node);
      stack.pop_back();
    }
  }

  loss->EnsureGrad();
  loss->grad[0] += 1.0;

  // order is post-order (parents before children), so reverse iteration is
  // reverse-topological from the loss.
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node *n = *it;
    if (n->backprop && n->HasGrad()) n->backprop(n);
  }

  for (Node *n : order) {
    if (!n->is_leaf && !n->retain_grad && n != loss.get()) n->grad = Tensor();
  }
}

}  // namespace numerics
}  // namespace fatlab
