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

#ifndef SLU_NN_GRAPH_H_
#define SLU_NN_GRAPH_H_

#include <cmath>
#include <functional>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "slu/errors.h"
#include "slu/nn/params.h"

namespace slu::nn {

// Handle to a node of a Graph.
struct Var {
  int id = -1;
  bool valid() const { return id >= 0; }
};

// Eager reverse-mode autodiff tape over row-major matrices. Each op computes
// its value immediately; Backward() replays the recorded closures in reverse.
// A graph built with record=false stores values only (inference).
template <typename Real>
class Graph {
 public:
  using Mat = Matrix<Real>;

  explicit Graph(bool record = true) : record_(record) { nodes_.reserve(1024); }

  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  bool recording() const { return record_; }
  std::size_t size() const { return nodes_.size(); }

  const Mat& value(Var v) const { return nodes_[v.id].Value(); }
  Real scalar(Var v) const { return value(v)(0, 0); }
  // Gradient accumulated by Backward(); zero if the node received none.
  Mat grad(Var v) const {
    const Node& n = nodes_[v.id];
    if (n.param) return n.param->grad;
    return n.grad.size() ? n.grad : Mat::Zero(n.value.rows(), n.value.cols());
  }
  Eigen::Index rows(Var v) const { return value(v).rows(); }
  Eigen::Index cols(Var v) const { return value(v).cols(); }

  Var Constant(Mat value) { return Push(std::move(value), false); }

  // Differentiable input that is not a parameter (used by tests and checks).
  Var Input(Mat value) { return Push(std::move(value), record_); }

  // The node aliases the parameter: its value is read in place and its
  // gradient accumulates straight into Parameter::grad.
  Var Param(Parameter<Real>& p) {
    if (auto it = param_nodes_.find(&p); it != param_nodes_.end()) return Var{it->second};
    nodes_.push_back(Node{Mat(), Mat(), record_, nullptr, &p});
    Var v{static_cast<int>(nodes_.size()) - 1};
    param_nodes_.emplace(&p, v.id);
    return v;
  }

  Var MatMul(Var a, Var b) {
    CheckShape(cols(a) == rows(b), "MatMul");
    Mat out;
    out.noalias() = value(a) * value(b);
    Var c = Push(std::move(out), NeedsGrad(a) || NeedsGrad(b));
    Record(c, [a, b, c](Graph& g) {
      const Mat& dc = g.nodes_[c.id].grad;
      if (g.NeedsGrad(a)) g.GradRef(a).noalias() += dc * g.value(b).transpose();
      if (g.NeedsGrad(b)) g.GradRef(b).noalias() += g.value(a).transpose() * dc;
    });
    return c;
  }

  // a * b^T
  Var MatMulNT(Var a, Var b) {
    CheckShape(cols(a) == cols(b), "MatMulNT");
    Mat out;
    out.noalias() = value(a) * value(b).transpose();
    Var c = Push(std::move(out), NeedsGrad(a) || NeedsGrad(b));
    Record(c, [a, b, c](Graph& g) {
      const Mat& dc = g.nodes_[c.id].grad;
      if (g.NeedsGrad(a)) g.GradRef(a).noalias() += dc * g.value(b);
      if (g.NeedsGrad(b)) g.GradRef(b).noalias() += dc.transpose() * g.value(a);
    });
    return c;
  }

  Var Add(Var a, Var b) {
    CheckSameShape(a, b, "Add");
    Var c = Push(value(a) + value(b), NeedsGrad(a) || NeedsGrad(b));
    Record(c, [a, b, c](Graph& g) {
      const Mat& dc = g.nodes_[c.id].grad;
      if (g.NeedsGrad(a)) g.GradRef(a) += dc;
      if (g.NeedsGrad(b)) g.GradRef(b) += dc;
    });
    return c;
  }

  Var Sub(Var a, Var b) {
    CheckSameShape(a, b, "Sub");
    Var c = Push(value(a) - value(b), NeedsGrad(a) || NeedsGrad(b));
    Record(c, [a, b, c](Graph& g) {
      const Mat& dc = g.nodes_[c.id].grad;
      if (g.NeedsGrad(a)) g.GradRef(a) += dc;
      if (g.NeedsGrad(b)) g.GradRef(b) -= dc;
    });
    return c;
  }

  // a + row, with the 1×n row broadcast over every row of a.
  Var AddRow(Var a, Var row) {
    CheckShape(rows(row) == 1 && cols(row) == cols(a), "AddRow");
    Mat out = value(a);
    out.rowwise() += value(row).row(0);
    Var c = Push(std::move(out), NeedsGrad(a) || NeedsGrad(row));
    Record(c, [a, row, c](Graph& g) {
      const Mat& dc = g.nodes_[c.id].grad;
      if (g.NeedsGrad(a)) g.GradRef(a) += dc;
      if (g.NeedsGrad(row)) g.GradRef(row) += dc.colwise().sum();
    });
    return c;
  }

  // Elementwise product.
  Var Mul(Var a, Var b) {
    CheckSameShape(a, b, "Mul");
    Var c = Push(value(a).cwiseProduct(value(b)), NeedsGrad(a) || NeedsGrad(b));
    Record(c, [a, b, c](Graph& g) {
      const Mat& dc = g.nodes_[c.id].grad;
      if (g.NeedsGrad(a)) g.GradRef(a) += dc.cwiseProduct(g.value(b));
      if (g.NeedsGrad(b)) g.GradRef(b) += dc.cwiseProduct(g.value(a));
    });
    return c;
  }

  Var Scale(Var a, Real s) {
    Var c = Push(value(a) * s, NeedsGrad(a));
    Record(c, [a, c, s](Graph& g) { g.GradRef(a) += g.nodes_[c.id].grad * s; });
    return c;
  }

  // 1 - a
  Var OneMinus(Var a) {
    Var c = Push((Real(1) - value(a).array()).matrix(), NeedsGrad(a));
    Record(c, [a, c](Graph& g) { g.GradRef(a) -= g.nodes_[c.id].grad; });
    return c;
  }

  // p ⊙ a + (1 - p) ⊙ b, with the n×1 column p broadcast across columns.
  Var Mix(Var p, Var a, Var b) {
    CheckSameShape(a, b, "Mix");
    CheckShape(cols(p) == 1 && rows(p) == rows(a), "Mix gate");
    const Mat& pv = value(p);
    Mat out = value(b);
    for (Eigen::Index i = 0; i < out.rows(); ++i) {
      out.row(i) = pv(i, 0) * value(a).row(i) + (Real(1) - pv(i, 0)) * value(b).row(i);
    }
    Var c = Push(std::move(out), NeedsGrad(p) || NeedsGrad(a) || NeedsGrad(b));
    Record(c, [p, a, b, c](Graph& g) {
      const Mat& dc = g.nodes_[c.id].grad;
      const Mat& pv = g.value(p);
      if (g.NeedsGrad(p)) {
        g.GradRef(p) += (dc.cwiseProduct(g.value(a) - g.value(b))).rowwise().sum();
      }
      if (g.NeedsGrad(a)) {
        Mat& da = g.GradRef(a);
        for (Eigen::Index i = 0; i < dc.rows(); ++i) da.row(i) += pv(i, 0) * dc.row(i);
      }
      if (g.NeedsGrad(b)) {
        Mat& db = g.GradRef(b);
        for (Eigen::Index i = 0; i < dc.rows(); ++i) db.row(i) += (Real(1) - pv(i, 0)) * dc.row(i);
      }
    });
    return c;
  }

  Var ConcatCols(std::span<const Var> parts) {
    CheckShape(!parts.empty(), "ConcatCols of nothing");
    Eigen::Index r = rows(parts[0]), total = 0;
    bool needs = false;
    for (Var p : parts) {
      CheckShape(rows(p) == r, "ConcatCols");
      total += cols(p);
      needs = needs || NeedsGrad(p);
    }
    Mat out(r, total);
    Eigen::Index off = 0;
    for (Var p : parts) {
      out.middleCols(off, cols(p)) = value(p);
      off += cols(p);
    }
    Var c = Push(std::move(out), needs);
    std::vector<Var> saved(parts.begin(), parts.end());
    Record(c, [saved, c](Graph& g) {
      const Mat& dc = g.nodes_[c.id].grad;
      Eigen::Index off = 0;
      for (Var p : saved) {
        if (g.NeedsGrad(p)) g.GradRef(p) += dc.middleCols(off, g.cols(p));
        off += g.cols(p);
      }
    });
    return c;
  }

  Var ConcatRows(std::span<const Var> parts) {
    CheckShape(!parts.empty(), "ConcatRows of nothing");
    Eigen::Index cc = cols(parts[0]), total = 0;
    bool needs = false;
    for (Var p : parts) {
      CheckShape(cols(p) == cc, "ConcatRows");
      total += rows(p);
      needs = needs || NeedsGrad(p);
    }
    Mat out(total, cc);
    Eigen::Index off = 0;
    for (Var p : parts) {
      out.middleRows(off, rows(p)) = value(p);
      off += rows(p);
    }
    Var c = Push(std::move(out), needs);
    std::vector<Var> saved(parts.begin(), parts.end());
    Record(c, [saved, c](Graph& g) {
      const Mat& dc = g.nodes_[c.id].grad;
      Eigen::Index off = 0;
      for (Var p : saved) {
        if (g.NeedsGrad(p)) g.GradRef(p) += dc.middleRows(off, g.rows(p));
        off += g.rows(p);
      }
    });
    return c;
  }

  Var SliceCols(Var a, Eigen::Index start, Eigen::Index count) {
    CheckShape(start >= 0 && count >= 0 && start + count <= cols(a), "SliceCols");
    Var c = Push(value(a).middleCols(start, count), NeedsGrad(a));
    Record(c, [a, c, start, count](Graph& g) {
      g.GradRef(a).middleCols(start, count) += g.nodes_[c.id].grad;
    });
    return c;
  }

  Var SliceRows(Var a, Eigen::Index start, Eigen::Index count) {
    CheckShape(start >= 0 && count >= 0 && start + count <= rows(a), "SliceRows");
    Var c = Push(value(a).middleRows(start, count), NeedsGrad(a));
    Record(c, [a, c, start, count](Graph& g) {
      g.GradRef(a).middleRows(start, count) += g.nodes_[c.id].grad;
    });
    return c;
  }

  // Row lookup: out.row(i) = table.row(ids[i]).
  Var GatherRows(Var table, std::span<const int> ids) {
    const Mat& t = value(table);
    Mat out(static_cast<Eigen::Index>(ids.size()), t.cols());
    for (std::size_t i = 0; i < ids.size(); ++i) {
      CheckShape(ids[i] >= 0 && ids[i] < t.rows(), "GatherRows index");
      out.row(static_cast<Eigen::Index>(i)) = t.row(ids[i]);
    }
    Var c = Push(std::move(out), NeedsGrad(table));
    std::vector<int> saved(ids.begin(), ids.end());
    Record(c, [table, c, saved = std::move(saved)](Graph& g) {
      Mat& dt = g.GradRef(table);
      const Mat& dc = g.nodes_[c.id].grad;
      for (std::size_t i = 0; i < saved.size(); ++i)
        dt.row(saved[i]) += dc.row(static_cast<Eigen::Index>(i));
    });
    return c;
  }

  // Row-wise softmax. With `causal`, entry (i, j) is masked for j > i + offset,
  // where offset = cols - rows aligns the last query with the last key.
  Var SoftmaxRows(Var a, bool causal = false) {
    const Mat& x = value(a);
    Mat y(x.rows(), x.cols());
    const Eigen::Index offset = x.cols() - x.rows();
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      Eigen::Index limit = causal ? std::min<Eigen::Index>(x.cols(), i + offset + 1) : x.cols();
      CheckShape(limit >= 1, "SoftmaxRows with a fully masked row");
      Real m = x.row(i).head(limit).maxCoeff();
      Real sum = 0;
      for (Eigen::Index j = 0; j < limit; ++j) {
        y(i, j) = std::exp(x(i, j) - m);
        sum += y(i, j);
      }
      for (Eigen::Index j = 0; j < limit; ++j) y(i, j) /= sum;
      for (Eigen::Index j = limit; j < x.cols(); ++j) y(i, j) = 0;
    }
    Var c = Push(std::move(y), NeedsGrad(a));
    Record(c, [a, c](Graph& g) {
      const Mat& dy = g.nodes_[c.id].grad;
      const Mat& yv = g.value(c);
      Mat prod = dy.cwiseProduct(yv);
      Eigen::Matrix<Real, Eigen::Dynamic, 1> dots = prod.rowwise().sum();
      Mat dx = prod;
      for (Eigen::Index i = 0; i < dx.rows(); ++i) dx.row(i) -= dots(i) * yv.row(i);
      g.GradRef(a) += dx;
    });
    return c;
  }

  Var Sigmoid(Var a) {
    Mat y = value(a).unaryExpr([](Real x) { return SigmoidScalar(x); });
    Var c = Push(std::move(y), NeedsGrad(a));
    Record(c, [a, c](Graph& g) {
      const Mat& yv = g.value(c);
      g.GradRef(a).array() +=
          g.nodes_[c.id].grad.array() * yv.array() * (Real(1) - yv.array());
    });
    return c;
  }

  Var Tanh(Var a) {
    Mat y = value(a).array().tanh().matrix();
    Var c = Push(std::move(y), NeedsGrad(a));
    Record(c, [a, c](Graph& g) {
      const Mat& yv = g.value(c);
      g.GradRef(a).array() += g.nodes_[c.id].grad.array() * (Real(1) - yv.array().square());
    });
    return c;
  }

  // tanh-approximated GELU (smooth, so finite differences stay valid).
  Var Gelu(Var a) {
    const Mat& x = value(a);
    Mat y = x.unaryExpr([](Real v) {
      Real t = std::tanh(kGeluC * (v + Real(0.044715) * v * v * v));
      return Real(0.5) * v * (Real(1) + t);
    });
    Var c = Push(std::move(y), NeedsGrad(a));
    Record(c, [a, c](Graph& g) {
      const Mat& xv = g.value(a);
      Mat d = xv.unaryExpr([](Real v) {
        Real u = kGeluC * (v + Real(0.044715) * v * v * v);
        Real t = std::tanh(u);
        Real du = kGeluC * (Real(1) + Real(3 * 0.044715) * v * v);
        return Real(0.5) * (Real(1) + t) + Real(0.5) * v * (Real(1) - t * t) * du;
      });
      g.GradRef(a).array() += g.nodes_[c.id].grad.array() * d.array();
    });
    return c;
  }

  // Row-wise layer normalization with 1×n gain and bias.
  Var LayerNorm(Var x, Var gain, Var bias, Real eps = Real(1e-5)) {
    CheckShape(rows(gain) == 1 && cols(gain) == cols(x), "LayerNorm gain");
    CheckShape(rows(bias) == 1 && cols(bias) == cols(x), "LayerNorm bias");
    const Mat& xv = value(x);
    const Eigen::Index n = xv.cols();
    Mat xhat(xv.rows(), n);
    Eigen::Matrix<Real, Eigen::Dynamic, 1> inv_std(xv.rows());
    for (Eigen::Index i = 0; i < xv.rows(); ++i) {
      Real mean = xv.row(i).mean();
      Real var = (xv.row(i).array() - mean).square().mean();
      inv_std(i) = Real(1) / std::sqrt(var + eps);
      xhat.row(i) = (xv.row(i).array() - mean) * inv_std(i);
    }
    Mat y = xhat;
    for (Eigen::Index i = 0; i < y.rows(); ++i) {
      y.row(i) = y.row(i).cwiseProduct(value(gain).row(0)) + value(bias).row(0);
    }
    Var c = Push(std::move(y), NeedsGrad(x) || NeedsGrad(gain) || NeedsGrad(bias));
    Record(c, [x, gain, bias, c, xhat = std::move(xhat), inv_std = std::move(inv_std)](Graph& g) {
      const Mat& dy = g.nodes_[c.id].grad;
      if (g.NeedsGrad(gain)) g.GradRef(gain) += dy.cwiseProduct(xhat).colwise().sum();
      if (g.NeedsGrad(bias)) g.GradRef(bias) += dy.colwise().sum();
      if (g.NeedsGrad(x)) {
        const auto& gv = g.value(gain);
        Mat& dx = g.GradRef(x);
        const Real n = static_cast<Real>(dy.cols());
        for (Eigen::Index i = 0; i < dy.rows(); ++i) {
          auto dxhat = dy.row(i).cwiseProduct(gv.row(0)).eval();
          Real m1 = dxhat.sum() / n;
          Real m2 = dxhat.cwiseProduct(xhat.row(i)).sum() / n;
          dx.row(i).array() +=
              inv_std(i) * (dxhat.array() - m1 - xhat.row(i).array() * m2);
        }
      }
    });
    return c;
  }

  Var Sum(Var a) {
    Mat out(1, 1);
    out(0, 0) = value(a).sum();
    Var c = Push(std::move(out), NeedsGrad(a));
    Record(c, [a, c](Graph& g) { g.GradRef(a).array() += g.nodes_[c.id].grad(0, 0); });
    return c;
  }

  // Σ_i -log(max(probs(i, targets[i]), clamp)).
  Var PickNll(Var probs, std::span<const int> targets, Real clamp) {
    CheckShape(static_cast<Eigen::Index>(targets.size()) == rows(probs), "PickNll");
    const Mat& p = value(probs);
    Mat out(1, 1);
    out(0, 0) = 0;
    for (std::size_t i = 0; i < targets.size(); ++i) {
      CheckShape(targets[i] >= 0 && targets[i] < p.cols(), "PickNll target");
      out(0, 0) -= std::log(std::max(p(static_cast<Eigen::Index>(i), targets[i]), clamp));
    }
    Var c = Push(std::move(out), NeedsGrad(probs));
    std::vector<int> saved(targets.begin(), targets.end());
    Record(c, [probs, c, saved, clamp](Graph& g) {
      const Real dc = g.nodes_[c.id].grad(0, 0);
      const Mat& p = g.value(probs);
      Mat& dp = g.GradRef(probs);
      for (std::size_t i = 0; i < saved.size(); ++i) {
        Real v = p(static_cast<Eigen::Index>(i), saved[i]);
        if (v > clamp) dp(static_cast<Eigen::Index>(i), saved[i]) -= dc / v;
      }
    });
    return c;
  }

  // -(w1·y·log p + w0·(1-y)·log(1-p)) for a 1×1 probability, logs clamped.
  Var WeightedBce(Var p, double label, double w1, double w0, Real clamp) {
    CheckShape(rows(p) == 1 && cols(p) == 1, "WeightedBce");
    const Real pv = scalar(p);
    const Real y = static_cast<Real>(label);
    Mat out(1, 1);
    out(0, 0) = -(static_cast<Real>(w1) * y * std::log(std::max(pv, clamp)) +
                  static_cast<Real>(w0) * (Real(1) - y) * std::log(std::max(Real(1) - pv, clamp)));
    Var c = Push(std::move(out), NeedsGrad(p));
    Record(c, [p, c, y, w1, w0, clamp](Graph& g) {
      const Real dc = g.nodes_[c.id].grad(0, 0);
      const Real pv = g.scalar(p);
      Real d = 0;
      if (pv > clamp) d -= static_cast<Real>(w1) * y / pv;
      if (Real(1) - pv > clamp) d += static_cast<Real>(w0) * (Real(1) - y) / (Real(1) - pv);
      g.GradRef(p)(0, 0) += dc * d;
    });
    return c;
  }

  // Seeds d(loss)/d(loss) = 1 and propagates to every reachable node;
  // parameter gradients accumulate into Parameter::grad.
  void Backward(Var loss) {
    if (!record_) throw Error("Backward on a non-recording graph");
    CheckShape(rows(loss) == 1 && cols(loss) == 1, "Backward needs a scalar");
    GradRef(loss)(0, 0) += Real(1);
    for (int id = loss.id; id >= 0; --id) {
      Node& n = nodes_[id];
      if (n.backward && n.grad.size()) n.backward(*this);
    }
  }

  static Real SigmoidScalar(Real x) {
    if (x >= 0) return Real(1) / (Real(1) + std::exp(-x));
    Real e = std::exp(x);
    return e / (Real(1) + e);
  }

 private:
  static constexpr Real kGeluC = Real(0.7978845608028654);

  struct Node {
    Mat value;
    Mat grad;
    bool needs_grad = false;
    std::function<void(Graph&)> backward;
    Parameter<Real>* param = nullptr;

    const Mat& Value() const { return param ? param->value : value; }
  };

  Var Push(Mat value, bool needs_grad) {
    nodes_.push_back(Node{std::move(value), Mat(), needs_grad && record_, nullptr, nullptr});
    return Var{static_cast<int>(nodes_.size()) - 1};
  }

  template <typename F>
  void Record(Var c, F&& fn) {
    if (nodes_[c.id].needs_grad) nodes_[c.id].backward = std::forward<F>(fn);
  }

  bool NeedsGrad(Var v) const { return nodes_[v.id].needs_grad; }

  Mat& GradRef(Var v) {
    Node& n = nodes_[v.id];
    if (n.param) return n.param->grad;
    if (!n.grad.size()) n.grad = Mat::Zero(n.value.rows(), n.value.cols());
    return n.grad;
  }

  static void CheckShape(bool ok, const char* what) {
    if (!ok) throw ShapeMismatch(what);
  }
  void CheckSameShape(Var a, Var b, const char* what) const {
    if (rows(a) != rows(b) || cols(a) != cols(b)) throw ShapeMismatch(what);
  }

  bool record_;
  std::vector<Node> nodes_;
  std::unordered_map<const Parameter<Real>*, int> param_nodes_;
};

}  // namespace slu::nn

#endif  // SLU_NN_GRAPH_H_
