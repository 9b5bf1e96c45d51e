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

#include "slu/nn/loss.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "slu/errors.h"

namespace slu::nn {
namespace {

void CheckProbability(double p) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("probability " + std::to_string(p) + " not in (0,1)");
}

}  // namespace

double WeightedBce(double p, int label, double w1, double w0) {
  CheckProbability(p);
  return -(w1 * label * std::log(std::max(p, kLogClamp)) +
           w0 * (1 - label) * std::log(std::max(1.0 - p, kLogClamp)));
}

double WeightedBceGrad(double p, int label, double w1, double w0) {
  CheckProbability(p);
  return -w1 * label / p + w0 * (1 - label) / (1.0 - p);
}

double CrossEntropy(std::span<const double> dist, int target) {
  if (target < 0 || static_cast<std::size_t>(target) >= dist.size())
    throw DomainError("target index out of range");
  return -std::log(std::max(dist[static_cast<std::size_t>(target)], kLogClamp));
}

}  // namespace slu::nn
