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

#ifndef SLU_NN_LAYERS_H_
#define SLU_NN_LAYERS_H_

#include <cmath>
#include <string>
#include <vector>

#include "slu/errors.h"
#include "slu/nn/graph.h"
#include "slu/nn/params.h"

namespace slu::nn {

template <typename Real>
struct Linear {
  Parameter<Real>* weight = nullptr;  // in × out
  Parameter<Real>* bias = nullptr;    // 1 × out

  static Linear Create(ParamStore<Real>& store, const std::string& name, int in, int out) {
    Linear l;
    l.weight = &store.GetOrCreate(name + ".weight", in, out, InitScheme::kUniformFanIn, in);
    l.bias = &store.GetOrCreate(name + ".bias", 1, out, InitScheme::kUniformFanIn, in);
    return l;
  }

  int in_dim() const { return static_cast<int>(weight->value.rows()); }
  int out_dim() const { return static_cast<int>(weight->value.cols()); }

  Var Apply(Graph<Real>& g, Var x) const {
    if (g.cols(x) != in_dim()) throw ShapeMismatch("Linear input width");
    return g.AddRow(g.MatMul(x, g.Param(*weight)), g.Param(*bias));
  }
};

template <typename Real>
struct LayerNormLayer {
  Parameter<Real>* gain = nullptr;
  Parameter<Real>* bias = nullptr;

  static LayerNormLayer Create(ParamStore<Real>& store, const std::string& name, int dim) {
    LayerNormLayer l;
    l.gain = &store.GetOrCreate(name + ".gain", 1, dim, InitScheme::kOnes, dim);
    l.bias = &store.GetOrCreate(name + ".bias", 1, dim, InitScheme::kZeros, dim);
    return l;
  }

  Var Apply(Graph<Real>& g, Var x) const {
    return g.LayerNorm(x, g.Param(*gain), g.Param(*bias));
  }
};

// Scaled dot-product attention with learned per-head projections and an
// output projection. Query and key/value inputs may have different widths.
template <typename Real>
struct MultiHeadAttention {
  Linear<Real> query, key, value, output;
  int heads = 1;

  struct Result {
    Var context;  // Q × model_dim
    Var attn;     // Q × T, mean over heads
  };

  static MultiHeadAttention Create(ParamStore<Real>& store, const std::string& name,
                                   int query_dim, int kv_dim, int model_dim, int heads) {
    if (heads < 1 || model_dim % heads != 0)
      throw InvalidHeads(std::to_string(model_dim) + " not divisible by " + std::to_string(heads));
    MultiHeadAttention m;
    m.heads = heads;
    m.query = Linear<Real>::Create(store, name + ".q", query_dim, model_dim);
    m.key = Linear<Real>::Create(store, name + ".k", kv_dim, model_dim);
    m.value = Linear<Real>::Create(store, name + ".v", kv_dim, model_dim);
    m.output = Linear<Real>::Create(store, name + ".o", model_dim, model_dim);
    return m;
  }

  int model_dim() const { return output.out_dim(); }

  Result Apply(Graph<Real>& g, Var q_in, Var k_in, Var v_in, bool causal = false) const {
    if (g.rows(k_in) < 1) throw ShapeMismatch("attention over an empty key sequence");
    if (g.rows(k_in) != g.rows(v_in)) throw ShapeMismatch("key/value length mismatch");
    Var q = query.Apply(g, q_in);
    Var k = key.Apply(g, k_in);
    Var v = value.Apply(g, v_in);
    const int dk = model_dim() / heads;
    const Real scale = Real(1) / std::sqrt(static_cast<Real>(dk));
    std::vector<Var> contexts;
    Var attn_sum;
    for (int h = 0; h < heads; ++h) {
      Var qh = heads == 1 ? q : g.SliceCols(q, h * dk, dk);
      Var kh = heads == 1 ? k : g.SliceCols(k, h * dk, dk);
      Var vh = heads == 1 ? v : g.SliceCols(v, h * dk, dk);
      Var weights = g.SoftmaxRows(g.Scale(g.MatMulNT(qh, kh), scale), causal);
      contexts.push_back(g.MatMul(weights, vh));
      attn_sum = attn_sum.valid() ? g.Add(attn_sum, weights) : weights;
    }
    Var concat = heads == 1 ? contexts[0] : g.ConcatCols(contexts);
    Var attn = heads == 1 ? attn_sum : g.Scale(attn_sum, Real(1) / static_cast<Real>(heads));
    return Result{output.Apply(g, concat), attn};
  }
};

template <typename Real>
struct FeedForward {
  Linear<Real> in, out;

  static FeedForward Create(ParamStore<Real>& store, const std::string& name, int dim, int hidden) {
    return FeedForward{Linear<Real>::Create(store, name + ".in", dim, hidden),
                       Linear<Real>::Create(store, name + ".out", hidden, dim)};
  }

  Var Apply(Graph<Real>& g, Var x) const { return out.Apply(g, g.Gelu(in.Apply(g, x))); }
};

// Post-norm transformer encoder layer.
template <typename Real>
struct TransformerEncoderLayer {
  MultiHeadAttention<Real> self_attn;
  LayerNormLayer<Real> norm1, norm2;
  FeedForward<Real> ff;

  static TransformerEncoderLayer Create(ParamStore<Real>& store, const std::string& name, int dim,
                                        int heads, int ff_dim) {
    TransformerEncoderLayer l;
    l.self_attn = MultiHeadAttention<Real>::Create(store, name + ".self_attn", dim, dim, dim, heads);
    l.norm1 = LayerNormLayer<Real>::Create(store, name + ".norm1", dim);
    l.ff = FeedForward<Real>::Create(store, name + ".ff", dim, ff_dim);
    l.norm2 = LayerNormLayer<Real>::Create(store, name + ".norm2", dim);
    return l;
  }

  Var Apply(Graph<Real>& g, Var x) const {
    Var h = norm1.Apply(g, g.Add(x, self_attn.Apply(g, x, x, x).context));
    return norm2.Apply(g, g.Add(h, ff.Apply(g, h)));
  }
};

// Post-norm transformer decoder layer: causal self-attention, cross-attention
// over `memory`, feed-forward.
template <typename Real>
struct TransformerDecoderLayer {
  MultiHeadAttention<Real> self_attn, cross_attn;
  LayerNormLayer<Real> norm1, norm2, norm3;
  FeedForward<Real> ff;

  static TransformerDecoderLayer Create(ParamStore<Real>& store, const std::string& name, int dim,
                                        int heads, int ff_dim) {
    TransformerDecoderLayer l;
    l.self_attn = MultiHeadAttention<Real>::Create(store, name + ".self_attn", dim, dim, dim, heads);
    l.norm1 = LayerNormLayer<Real>::Create(store, name + ".norm1", dim);
    l.cross_attn =
        MultiHeadAttention<Real>::Create(store, name + ".cross_attn", dim, dim, dim, heads);
    l.norm2 = LayerNormLayer<Real>::Create(store, name + ".norm2", dim);
    l.ff = FeedForward<Real>::Create(store, name + ".ff", dim, ff_dim);
    l.norm3 = LayerNormLayer<Real>::Create(store, name + ".norm3", dim);
    return l;
  }

  Var Apply(Graph<Real>& g, Var y, Var memory) const {
    Var h1 = norm1.Apply(g, g.Add(y, self_attn.Apply(g, y, y, y, /*causal=*/true).context));
    Var h2 = norm2.Apply(g, g.Add(h1, cross_attn.Apply(g, h1, memory, memory).context));
    return norm3.Apply(g, g.Add(h2, ff.Apply(g, h2)));
  }
};

// Single-layer LSTM, zero initial state, gate order (input, forget, cell, output).
template <typename Real>
struct Lstm {
  Parameter<Real>* input_weight = nullptr;      // Din × 4H
  Parameter<Real>* recurrent_weight = nullptr;  // H × 4H
  Parameter<Real>* bias = nullptr;              // 1 × 4H

  static Lstm Create(ParamStore<Real>& store, const std::string& name, int in_dim, int hidden) {
    Lstm l;
    l.input_weight =
        &store.GetOrCreate(name + ".input_weight", in_dim, 4 * hidden, InitScheme::kUniformFanIn, in_dim);
    l.recurrent_weight = &store.GetOrCreate(name + ".recurrent_weight", hidden, 4 * hidden,
                                            InitScheme::kUniformFanIn, hidden);
    l.bias = &store.GetOrCreate(name + ".bias", 1, 4 * hidden, InitScheme::kUniformFanIn, hidden);
    return l;
  }

  int hidden() const { return static_cast<int>(recurrent_weight->value.rows()); }

  // seq: L × Din  ->  L × H hidden states.
  Var Apply(Graph<Real>& g, Var seq) const {
    if (g.rows(seq) < 1) throw ShapeMismatch("LSTM over an empty sequence");
    if (g.cols(seq) != input_weight->value.rows()) throw ShapeMismatch("LSTM input width");
    const int hsz = hidden();
    Var projected = g.AddRow(g.MatMul(seq, g.Param(*input_weight)), g.Param(*bias));
    Var wh = g.Param(*recurrent_weight);
    Var h, c;
    std::vector<Var> states;
    states.reserve(static_cast<std::size_t>(g.rows(seq)));
    for (Eigen::Index t = 0; t < g.rows(seq); ++t) {
      Var gates = g.SliceRows(projected, t, 1);
      if (h.valid()) gates = g.Add(gates, g.MatMul(h, wh));
      Var i = g.Sigmoid(g.SliceCols(gates, 0, hsz));
      Var f = g.Sigmoid(g.SliceCols(gates, hsz, hsz));
      Var cand = g.Tanh(g.SliceCols(gates, 2 * hsz, hsz));
      Var o = g.Sigmoid(g.SliceCols(gates, 3 * hsz, hsz));
      Var ic = g.Mul(i, cand);
      c = c.valid() ? g.Add(g.Mul(f, c), ic) : ic;
      h = g.Mul(o, g.Tanh(c));
      states.push_back(h);
    }
    return g.ConcatRows(states);
  }
};

// Fixed sinusoidal position code, rows × dim.
template <typename Real>
Matrix<Real> SinusoidalPositions(int rows, int dim, int start = 0) {
  Matrix<Real> m(rows, dim);
  for (int r = 0; r < rows; ++r) {
    const double pos = static_cast<double>(r + start);
    for (int c = 0; c < dim; ++c) {
      const double rate = std::pow(10000.0, -static_cast<double>(2 * (c / 2)) / dim);
      m(r, c) = static_cast<Real>(c % 2 == 0 ? std::sin(pos * rate) : std::cos(pos * rate));
    }
  }
  return m;
}

}  // namespace slu::nn

#endif  // SLU_NN_LAYERS_H_
