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

#ifndef SLU_NN_PARAMS_H_
#define SLU_NN_PARAMS_H_

#include <cmath>
#include <cstdint>
#include <deque>
#include <map>
#include <string>
#include <vector>

#include "slu/errors.h"
#include "slu/matrix.h"
#include "slu/random.h"

namespace slu::nn {

using slu::Matrix;

enum class InitScheme { kUniformFanIn, kOnes, kZeros };

const char* InitSchemeName(InitScheme scheme);

struct ParamInit {
  InitScheme scheme = InitScheme::kUniformFanIn;
  int fan_in = 1;
  uint64_t seed = 0;
};

template <typename Real>
struct Parameter {
  std::string name;
  Matrix<Real> value;
  Matrix<Real> grad;
  ParamInit init;
};

// Named parameter tensors. Initialization of each tensor depends only on the
// store seed and the tensor name, so creation order never changes values.
template <typename Real>
class ParamStore {
 public:
  explicit ParamStore(uint64_t seed = 0) : seed_(seed) {}

  ParamStore(const ParamStore&) = delete;
  ParamStore& operator=(const ParamStore&) = delete;
  ParamStore(ParamStore&&) = default;
  ParamStore& operator=(ParamStore&&) = default;

  uint64_t seed() const { return seed_; }

  // Returns the existing tensor (shape-checked) or creates and initializes it.
  Parameter<Real>& GetOrCreate(const std::string& name, int rows, int cols, InitScheme scheme,
                               int fan_in) {
    if (auto it = index_.find(name); it != index_.end()) {
      Parameter<Real>& p = params_[it->second];
      if (p.value.rows() != rows || p.value.cols() != cols)
        throw ShapeMismatch("parameter '" + name + "' has a different shape");
      return p;
    }
    Parameter<Real> p;
    p.name = name;
    p.init = ParamInit{scheme, fan_in, DeriveSeed(seed_, name)};
    p.value = Initialize(rows, cols, p.init);
    p.grad = Matrix<Real>::Zero(rows, cols);
    index_.emplace(name, params_.size());
    params_.push_back(std::move(p));
    return params_.back();
  }

  Parameter<Real>* Find(const std::string& name) {
    auto it = index_.find(name);
    return it == index_.end() ? nullptr : &params_[it->second];
  }
  const Parameter<Real>* Find(const std::string& name) const {
    auto it = index_.find(name);
    return it == index_.end() ? nullptr : &params_[it->second];
  }

  // Insertion order.
  std::deque<Parameter<Real>>& params() { return params_; }
  const std::deque<Parameter<Real>>& params() const { return params_; }

  std::size_t NumParameters() const {
    std::size_t n = 0;
    for (const auto& p : params_) n += static_cast<std::size_t>(p.value.size());
    return n;
  }

  void ZeroGrad() {
    for (auto& p : params_) p.grad.setZero();
  }

  // Deep copy converted to another scalar type. Gradients are reset.
  template <typename Other>
  ParamStore<Other> Cast() const {
    ParamStore<Other> out(seed_);
    for (const auto& p : params_) {
      auto& q = out.Adopt(p.name, p.value.template cast<Other>(), p.init);
      (void)q;
    }
    return out;
  }

  ParamStore Clone() const { return Cast<Real>(); }

  // Inserts a tensor with explicit values (used by checkpoint loading).
  Parameter<Real>& Adopt(const std::string& name, Matrix<Real> value, ParamInit init) {
    if (index_.contains(name)) throw ShapeMismatch("duplicate parameter '" + name + "'");
    Parameter<Real> p;
    p.name = name;
    p.init = init;
    p.grad = Matrix<Real>::Zero(value.rows(), value.cols());
    p.value = std::move(value);
    index_.emplace(name, params_.size());
    params_.push_back(std::move(p));
    return params_.back();
  }

  // Copies values (not gradients) from a store with identical layout.
  template <typename Other>
  void CopyValuesFrom(const ParamStore<Other>& other) {
    for (auto& p : params_) {
      const auto* q = other.Find(p.name);
      if (!q || q->value.rows() != p.value.rows() || q->value.cols() != p.value.cols())
        throw ShapeMismatch("cannot copy parameter '" + p.name + "'");
      p.value = q->value.template cast<Real>();
    }
  }

 private:
  static Matrix<Real> Initialize(int rows, int cols, const ParamInit& init) {
    switch (init.scheme) {
      case InitScheme::kOnes:
        return Matrix<Real>::Ones(rows, cols);
      case InitScheme::kZeros:
        return Matrix<Real>::Zero(rows, cols);
      case InitScheme::kUniformFanIn:
        break;
    }
    Rng rng(init.seed);
    const double bound = 1.0 / std::sqrt(static_cast<double>(init.fan_in));
    std::uniform_real_distribution<double> dist(-bound, bound);
    Matrix<Real> m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = static_cast<Real>(dist(rng));
    return m;
  }

  uint64_t seed_ = 0;
  std::deque<Parameter<Real>> params_;
  std::map<std::string, std::size_t> index_;
};

inline const char* InitSchemeName(InitScheme scheme) {
  switch (scheme) {
    case InitScheme::kUniformFanIn:
      return "uniform_fan_in";
    case InitScheme::kOnes:
      return "ones";
    case InitScheme::kZeros:
      return "zeros";
  }
  return "unknown";
}

}  // namespace slu::nn

#endif  // SLU_NN_PARAMS_H_
