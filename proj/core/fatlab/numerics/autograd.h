// fatlab/numerics/autograd.h

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

#ifndef FATLAB_NUMERICS_AUTOGRAD_H_
#define FATLAB_NUMERICS_AUTOGRAD_H_

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "fatlab/numerics/tensor.h"

namespace fatlab {
namespace numerics {

// One node of the (acyclic) compute graph. Children own their parents via
// shared_ptr, so holding the loss keeps the whole graph alive; leaves are
// additionally held by their module and survive graph teardown.
//
// A graph instance is single-threaded: build, Backward, and grad access must
// happen on one thread. Distinct graphs on distinct threads are fine.
struct Node {
  Tensor value;
  Tensor grad;  // allocated on first accumulation; same shape as value
  bool requires_grad = false;
  bool is_leaf = false;
  bool retain_grad = false;  // keep non-leaf grad after Backward
  const char *op = "leaf";
  std::string name;  // parameters only
  std::vector<std::shared_ptr<Node>> parents;
  // Propagates self->grad into parents' grads (additive). Takes the owning
  // node as argument so the closure never captures a shared_ptr to itself.
  std::function<void(Node *self)> backprop;

  bool HasGrad() const { return grad.numel() == value.numel() && value.numel() > 0; }
  void EnsureGrad() {
    if (!HasGrad()) grad = Tensor(value.shape());
  }
  void AccumulateGrad(const Tensor &g);
};

using Var = std::shared_ptr<Node>;

// Trainable leaf (requires_grad unless inside NoGradGuard-free context is
// irrelevant; leaves ignore the guard).
Var MakeLeaf(Tensor value, bool requires_grad, std::string name = "");

// Non-trainable constant node.
Var MakeConst(Tensor value);

// Builds a node wired to parents. Honors the no-grad guard; drops parents
// and backprop when no gradient can flow. Other modules may register custom
// ops through this (e.g. a sequence loss with a hand-derived backward).
Var MakeOpNode(const char *op, Tensor value, std::vector<Var> parents,
               std::function<void(Node *self)> backprop);

// Reverse-mode sweep from a scalar loss. Gradients accumulate additively
// across fan-out; repeated calls keep accumulating into leaves. Non-leaf
// grads are freed after the sweep unless retain_grad is set.
void Backward(const Var &loss);

// Scoped inference mode: ops built inside produce constant nodes.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard &) = delete;
  NoGradGuard &operator=(const NoGradGuard &) = delete;
};

bool GradEnabled();

}  // namespace numerics
}  // namespace fatlab

#endif  // FATLAB_NUMERICS_AUTOGRAD_H_
