// fatlab/frontends/si_snr.cc

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

#include "fatlab/frontends/si_snr.h"

#include <cmath>
#include <cstdint>

#include "fatlab/numerics/ops.h"
#include "fatlab/util/check.h"

namespace fatlab {
namespace frontends {

namespace {

constexpr double kClampDb = 60.0;

double MeanOf(const std::vector<double> &v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

}  // namespace

double SiSnrDb(const std::vector<double> &estimate, const std::vector<double> &reference) {
  FATLAB_CHECK(estimate.size() == reference.size())
      << "(si_snr: estimate has " << estimate.size() << " samples, reference has "
      << reference.size() << ")";
  FATLAB_CHECK(!reference.empty()) << "(si_snr: empty signals)";

  double est_mean = MeanOf(estimate);
  double ref_mean = MeanOf(reference);
  double dot = 0.0;
  double ref_energy = 0.0;
  for (size_t i = 0; i < reference.size(); ++i) {
    double e = estimate[i] - est_mean;
    double r = reference[i] - ref_mean;
    dot += e * r;
    ref_energy += r * r;
  }
  FATLAB_CHECK(ref_energy > 0.0) << "(si_snr: zero-energy reference)";

  double scale = dot / ref_energy;
  double target_energy = 0.0;
  double resid_energy = 0.0;
  for (size_t i = 0; i < reference.size(); ++i) {
    double e = estimate[i] - est_mean;
    double r = reference[i] - ref_mean;
    double s = scale * r;
    target_energy += s * s;
    resid_energy += (e - s) * (e - s);
  }

  if (target_energy == 0.0) return -kClampDb;
  if (resid_energy == 0.0) return kClampDb;
  double db = 10.0 * std::log10(target_energy / resid_energy);
  if (db > kClampDb) return kClampDb;
  if (db < -kClampDb) return -kClampDb;
  return db;
}

double SiSnrDb(const audio::Waveform &estimate, const audio::Waveform &reference) {
  FATLAB_CHECK(estimate.sample_rate == reference.sample_rate)
      << "(si_snr: sample rates " << estimate.sample_rate << " vs " << reference.sample_rate
      << ")";
  return SiSnrDb(estimate.samples, reference.samples);
}

numerics::Var NegSiSnrLoss(const numerics::Var &estimate, const std::vector<double> &reference) {
  using namespace fatlab::numerics;  // NOLINT
  FATLAB_CHECK(estimate != nullptr) << "(si_snr loss: null estimate)";
  FATLAB_CHECK(estimate->value.shape().size() == 1) << "(si_snr loss: estimate must be rank 1)";
  FATLAB_CHECK(estimate->value.numel() == static_cast<int64_t>(reference.size()))
      << "(si_snr loss: estimate has " << estimate->value.numel()
      << " samples, reference has " << reference.size() << ")";
  FATLAB_CHECK(!reference.empty()) << "(si_snr loss: empty signals)";

  // The reference enters as a constant, already zero-meaned.
  double ref_mean = MeanOf(reference);
  Tensor ref({static_cast<int64_t>(reference.size())});
  double ref_energy = 0.0;
  for (size_t i = 0; i < reference.size(); ++i) {
    double r = reference[i] - ref_mean;
    ref[static_cast<int64_t>(i)] = r;
    ref_energy += r * r;
  }
  FATLAB_CHECK(ref_energy > 0.0) << "(si_snr loss: zero-energy reference)";
  Var r = MakeConst(std::move(ref));

  Var est0 = Sub(estimate, Mean(estimate));
  Var dot = Sum(Mul(est0, r));
  Var target = Mul(r, ScalarMul(dot, 1.0 / ref_energy));
  Var resid = Sub(est0, target);
  Var target_energy = Sum(Mul(target, target));
  Var resid_energy = ScalarAdd(Sum(Mul(resid, resid)), 1e-12);
  Var ratio = Div(target_energy, resid_energy);
  constexpr double kLn10 = 2.302585092994046;
  return Neg(ScalarMul(Log(ratio), 10.0 / kLn10));
}

}  // namespace frontends
}  // namespace fatlab
