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

#ifndef SLU_NN_OPTIM_H_
#define SLU_NN_OPTIM_H_

#include <cmath>
#include <vector>

#include "slu/nn/params.h"

namespace slu::nn {

struct AdamOptions {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  // Global gradient-norm clip; <= 0 disables.
  double clip_norm = 0.0;
};

// Adam with bias correction over every tensor of a ParamStore. Reads
// Parameter::grad and leaves it untouched; callers zero gradients.
template <typename Real>
class Adam {
 public:
  Adam(ParamStore<Real>& store, AdamOptions options) : store_(store), options_(options) {
    for (const auto& p : store_.params()) {
      m_.push_back(Matrix<Real>::Zero(p.value.rows(), p.value.cols()));
      v_.push_back(Matrix<Real>::Zero(p.value.rows(), p.value.cols()));
    }
  }

  long step_count() const { return step_; }
  const AdamOptions& options() const { return options_; }
  void set_lr(double lr) { options_.lr = lr; }

  // Returns the gradient norm before clipping.
  double Step() {
    double norm_sq = 0;
    for (const auto& p : store_.params()) norm_sq += p.grad.template cast<double>().squaredNorm();
    const double norm = std::sqrt(norm_sq);
    double scale = 1.0;
    if (options_.clip_norm > 0 && norm > options_.clip_norm) scale = options_.clip_norm / norm;

    ++step_;
    const double bc1 = 1.0 - std::pow(options_.beta1, static_cast<double>(step_));
    const double bc2 = 1.0 - std::pow(options_.beta2, static_cast<double>(step_));
    const Real b1 = static_cast<Real>(options_.beta1);
    const Real b2 = static_cast<Real>(options_.beta2);
    const Real step_size = static_cast<Real>(options_.lr / bc1);
    const Real inv_bc2 = static_cast<Real>(1.0 / bc2);
    const Real eps = static_cast<Real>(options_.eps);
    const Real s = static_cast<Real>(scale);
    std::size_t k = 0;
    for (auto& p : store_.params()) {
      auto g = (p.grad.array() * s).eval();
      m_[k].array() = b1 * m_[k].array() + (Real(1) - b1) * g;
      v_[k].array() = b2 * v_[k].array() + (Real(1) - b2) * g.square();
      p.value.array() -= step_size * m_[k].array() / ((v_[k].array() * inv_bc2).sqrt() + eps);
      ++k;
    }
    return norm;
  }

 private:
  ParamStore<Real>& store_;
  AdamOptions options_;
  long step_ = 0;
  std::vector<Matrix<Real>> m_, v_;
};

}  // namespace slu::nn

#endif  // SLU_NN_OPTIM_H_
