// Copyright 2026 The mcat-slu Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SLU_NN_LOSS_H_
#define SLU_NN_LOSS_H_

#include <span>

namespace slu::nn {

// Floor applied inside every log of a loss.
inline constexpr double kLogClamp = 1e-12;

// -(w1·label·log p + w0·(1-label)·log(1-p)). Throws DomainError unless
// 0 < p < 1.
double WeightedBce(double p, int label, double w1, double w0);

// d WeightedBce / dp.
double WeightedBceGrad(double p, int label, double w1, double w0);

// Negative log-likelihood of `target` under a normalized distribution, with
// the probability floored at kLogClamp.
double CrossEntropy(std::span<const double> dist, int target);

}  // namespace slu::nn

#endif  // SLU_NN_LOSS_H_
