// fatlab/benchmarks/bench_numerics.cc

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

#include <benchmark/benchmark.h>

#include "fatlab/numerics/autograd.h"
#include "fatlab/numerics/ops.h"
#include "fatlab/numerics/rng.h"

namespace {

using namespace fatlab::numerics;

Var RandomLeaf(Rng *rng, std::vector<int64_t> shape) {
  Tensor t(std::move(shape));
  for (int64_t i = 0; i < t.numel(); ++i) t[i] = rng->Gaussian();
  return MakeLeaf(std::move(t), true);
}

void BM_MatmulForward(benchmark::State &state) {
  int64_t n = state.range(0);
  Rng rng(1);
  Var a = RandomLeaf(&rng, {n, n});
  Var b = RandomLeaf(&rng, {n, n});
  NoGradGuard guard;
  for (auto _ : state) {
    Var c = Matmul(a, b);
    benchmark::DoNotOptimize(c->value.data());
  }
  state.SetItemsProcessed(state.iterations() * 2 * n * n * n);
}
BENCHMARK(BM_MatmulForward)->Arg(64)->Arg(128)->Arg(256);

void BM_MatmulTrainStep(benchmark::State &state) {
  int64_t n = state.range(0);
  Rng rng(1);
  Var a = RandomLeaf(&rng, {n, n});
  Var b = RandomLeaf(&rng, {n, n});
  for (auto _ : state) {
    a->grad = Tensor();
    b->grad = Tensor();
    Var loss = Mean(Mul(Matmul(a, b), Matmul(a, b)));
    Backward(loss);
    benchmark::DoNotOptimize(a->grad.data());
  }
}
BENCHMARK(BM_MatmulTrainStep)->Arg(64)->Arg(128);

void BM_Conv1dForward(benchmark::State &state) {
  Rng rng(1);
  Var x = RandomLeaf(&rng, {16, 4000});
  Var w = RandomLeaf(&rng, {16, 16, 8});
  Var b = RandomLeaf(&rng, {16});
  NoGradGuard guard;
  for (auto _ : state) {
    Var y = Conv1d(x, w, b, 4, 0, 1);
    benchmark::DoNotOptimize(y->value.data());
  }
}
BENCHMARK(BM_Conv1dForward);

}  // namespace

BENCHMARK_MAIN();
