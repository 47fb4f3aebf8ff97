// fatlab/frontends/si_snr.h

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

#ifndef FATLAB_FRONTENDS_SI_SNR_H_
#define FATLAB_FRONTENDS_SI_SNR_H_

#include <vector>

#include "fatlab/audio/wav.h"
#include "fatlab/numerics/autograd.h"

namespace fatlab {
namespace frontends {

// Scale-invariant SNR in dB. Both signals are zero-meaned internally, the
// estimate is projected onto the reference, and the result is clamped to
// [-60, 60] dB so degenerate estimates stay finite. Lengths must match and
// the reference must carry energy.
double SiSnrDb(const std::vector<double> &estimate, const std::vector<double> &reference);
double SiSnrDb(const audio::Waveform &estimate, const audio::Waveform &reference);

// Differentiable negative SI-SNR of a rank-1 estimate against a fixed
// reference, used as the time-domain training objective. Unlike the metric it
// is not clamped, so gradients stay alive; a tiny epsilon on the residual
// energy keeps the value finite when the estimate matches the reference.
numerics::Var NegSiSnrLoss(const numerics::Var &estimate, const std::vector<double> &reference);

}  // namespace frontends
}  // namespace fatlab

#endif  // FATLAB_FRONTENDS_SI_SNR_H_
