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

#ifndef SLU_NN_GRADCHECK_H_
#define SLU_NN_GRADCHECK_H_

#include <cmath>
#include <cstdint>
#include <functional>
#include <string>

#include "slu/nn/graph.h"
#include "slu/nn/params.h"

namespace slu::nn {

struct GradCheckOptions {
  double step = 1e-5;
  double tolerance = 1e-4;
  // Denominator floor of the relative error, so coordinates whose gradient
  // is numerically zero are compared in absolute terms.
  double floor = 1e-6;
  // Coordinates probed per tensor; <= 0 probes every coordinate.
  int max_coords_per_param = 0;
  uint64_t seed = 0;
};

struct GradCheckReport {
  double max_rel_error = 0.0;
  std::string worst_param;
  long worst_index = -1;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::size_t coords_checked = 0;
  bool passed = false;
};

// Builds a scalar loss on the given graph.
using LossBuilder = std::function<Var(Graph<double>&)>;

// Compares reverse-mode gradients of `build` against central finite
// differences for every tensor in `store`.
inline GradCheckReport GradCheck(const LossBuilder& build, ParamStore<double>& store,
                                 const GradCheckOptions& options = {}) {
  store.ZeroGrad();
  {
    Graph<double> g;
    Var loss = build(g);
    g.Backward(loss);
  }
  auto eval = [&] {
    Graph<double> g(false);
    return g.scalar(build(g));
  };

  GradCheckReport report;
  Rng rng(options.seed);
  for (auto& p : store.params()) {
    const Matrix<double> analytic = p.grad;
    const long n = static_cast<long>(p.value.size());
    std::vector<long> coords;
    if (options.max_coords_per_param <= 0 || n <= options.max_coords_per_param) {
      for (long i = 0; i < n; ++i) coords.push_back(i);
    } else {
      std::uniform_int_distribution<long> pick(0, n - 1);
      for (int k = 0; k < options.max_coords_per_param; ++k) coords.push_back(pick(rng));
    }
    for (long i : coords) {
      double& x = p.value.data()[i];
      const double saved = x;
      x = saved + options.step;
      const double up = eval();
      x = saved - options.step;
      const double down = eval();
      x = saved;
      const double numeric = (up - down) / (2 * options.step);
      const double a = analytic.data()[i];
      const double rel =
          std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), options.floor});
      ++report.coords_checked;
      if (rel > report.max_rel_error || report.worst_index < 0) {
        report.max_rel_error = rel;
        report.worst_param = p.name;
        report.worst_index = i;
        report.worst_analytic = a;
        report.worst_numeric = numeric;
      }
    }
  }
  store.ZeroGrad();
  report.passed = report.max_rel_error < options.tolerance;
  return report;
}

}  // namespace slu::nn

#endif  // SLU_NN_GRADCHECK_H_
