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

#ifndef SLU_DELIBERATION_NLU_H_
#define SLU_DELIBERATION_NLU_H_

#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "slu/errors.h"
#include "slu/mcat/score.h"
#include "slu/nn/graph.h"
#include "slu/nn/layers.h"
#include "slu/nn/loss.h"
#include "slu/nn/params.h"
#include "slu/semtext/parse.h"

namespace slu::deliberation {

using nn::Graph;
using nn::Var;
using semtext::TokenSeq;

struct NluConfig {
  int input_dim = 32;  // D of e_txt / e_aud
  int dim = 32;
  int fusion_heads = 2;
  int pool_layers = 2;
  int pool_heads = 2;
  int decoder_heads = 2;
  int pointer_heads = 1;
  int ff_dim = 64;
  int max_decode_len = 64;
  // Applies an extra softmax over the copy/generate mixture.
  bool literal_eq5_softmax = false;
  mcat::IntegrationMode mode = mcat::IntegrationMode::kBaseline;
};

// Throws ConfigError.
void ValidateNluConfig(const NluConfig& cfg);

// Target vocabulary: BOS, EOS, "]", ontology symbols, then words.
class NluVocab {
 public:
  static constexpr int kBos = 0;
  static constexpr int kEos = 1;
  static constexpr int kClose = 2;

  NluVocab() = default;
  NluVocab(const semtext::Ontology& ontology, const std::vector<std::string>& words);

  int size() const { return static_cast<int>(tokens_.size()); }
  const std::string& token(int id) const { return tokens_[static_cast<std::size_t>(id)]; }
  const std::vector<std::string>& tokens() const { return tokens_; }
  bool Contains(std::string_view token) const { return index_.find(token) != index_.end(); }
  // Throws UnknownToken.
  int Index(std::string_view token) const;
  std::vector<int> Encode(const TokenSeq& tokens) const;

 private:
  std::vector<std::string> tokens_;
  std::map<std::string, int, std::less<>> index_;
};

// One teacher-forcing example.
struct NluExample {
  MatrixF e_txt;              // U × D
  MatrixF e_aud;              // T × D
  std::vector<int> hyp_ids;   // U source token ids in the target vocabulary
  std::optional<double> score;
  std::vector<int> targets;   // linearized parse ids followed by EOS
};

// Entry for word w is the summed attention on source positions holding w.
template <typename Real>
Matrix<Real> CopyDistribution(const Matrix<Real>& a_v, std::span<const int> hyp_ids,
                              int vocab_size) {
  if (a_v.cols() != static_cast<Eigen::Index>(hyp_ids.size()))
    throw ShapeMismatch("copy attention width differs from source length");
  Matrix<Real> out = Matrix<Real>::Zero(a_v.rows(), vocab_size);
  for (std::size_t u = 0; u < hyp_ids.size(); ++u) {
    if (hyp_ids[u] < 0 || hyp_ids[u] >= vocab_size) throw ShapeMismatch("source id out of range");
    out.col(hyp_ids[u]) += a_v.col(static_cast<Eigen::Index>(u));
  }
  return out;
}

// U × V scatter matrix S with S(u, hyp[u]) = 1, so a_v·S is the copy distribution.
template <typename Real>
Matrix<Real> SourceScatter(std::span<const int> hyp_ids, int vocab_size) {
  Matrix<Real> s = Matrix<Real>::Zero(static_cast<Eigen::Index>(hyp_ids.size()), vocab_size);
  for (std::size_t u = 0; u < hyp_ids.size(); ++u) {
    if (hyp_ids[u] < 0 || hyp_ids[u] >= vocab_size) throw ShapeMismatch("source id out of range");
    s(static_cast<Eigen::Index>(u), hyp_ids[u]) = Real(1);
  }
  return s;
}

// Per-position quantities of the pointer-generator decoder, one row per
// decoder input position.
struct DecodeTrace {
  Var d_v, g_v, a_v, c_ctx, c_dist, p_copy, o_v;
};

// Fusion, pooling and pointer-generator decoder over a ParamStore.
template <typename Real>
struct NluNetwork {
  NluConfig config;
  int vocab_size = 0;
  nn::MultiHeadAttention<Real> fusion;
  std::vector<nn::TransformerEncoderLayer<Real>> pool;
  nn::Parameter<Real>* target_embedding = nullptr;
  nn::TransformerDecoderLayer<Real> decoder;
  nn::Linear<Real> generator;
  nn::MultiHeadAttention<Real> pointer;
  nn::Linear<Real> gate;

  static NluNetwork Create(nn::ParamStore<Real>& store, const NluConfig& cfg, int vocab_size) {
    ValidateNluConfig(cfg);
    NluNetwork n;
    n.config = cfg;
    n.vocab_size = vocab_size;
    const int extra = mcat::AppendsToFusion(cfg.mode) ? 1 : 0;
    n.fusion = nn::MultiHeadAttention<Real>::Create(store, "fusion", cfg.input_dim + extra,
                                                    cfg.input_dim + extra, cfg.dim,
                                                    cfg.fusion_heads);
    for (int l = 0; l < cfg.pool_layers; ++l) {
      n.pool.push_back(nn::TransformerEncoderLayer<Real>::Create(
          store, "pool." + std::to_string(l), cfg.dim, cfg.pool_heads, cfg.ff_dim));
    }
    n.target_embedding = &store.GetOrCreate("decoder.embedding", vocab_size, cfg.dim,
                                            nn::InitScheme::kUniformFanIn, cfg.dim);
    n.decoder = nn::TransformerDecoderLayer<Real>::Create(store, "decoder.layer", cfg.dim,
                                                          cfg.decoder_heads, cfg.ff_dim);
    n.generator = nn::Linear<Real>::Create(store, "decoder.generator", cfg.dim, vocab_size);
    n.pointer = nn::MultiHeadAttention<Real>::Create(store, "decoder.pointer", cfg.dim, cfg.dim,
                                                     cfg.dim, cfg.pointer_heads);
    const int gate_in = 2 * cfg.dim + (mcat::AppendsToGate(cfg.mode) ? 1 : 0);
    n.gate = nn::Linear<Real>::Create(store, "decoder.gate", gate_in, 1);
    return n;
  }

  static void CheckScore(const NluConfig& cfg, const std::optional<double>& score) {
    if (mcat::UsesScore(cfg.mode) && !score)
      throw MissingScore(std::string(mcat::ModeName(cfg.mode)) + " needs a confidence score");
  }

  // e_fused (U × dim): text features plus cross-attention over audio.
  Var Fuse(Graph<Real>& g, const Matrix<Real>& e_txt, const Matrix<Real>& e_aud,
           const std::optional<double>& score) const {
    if (e_txt.rows() < 1 || e_aud.rows() < 1) throw ShapeMismatch("empty fusion input");
    if (e_txt.cols() != config.input_dim || e_aud.cols() != config.input_dim)
      throw ShapeMismatch("fusion input width");
    CheckScore(config, score);
    Matrix<Real> txt = e_txt, aud = e_aud, residual = e_txt;
    switch (config.mode) {
      case mcat::IntegrationMode::kBaseline:
        break;
      case mcat::IntegrationMode::kMulFusion: {
        auto [t, a] = mcat::IntegrateMul(e_txt, e_aud, *score);
        txt = std::move(t);
        aud = std::move(a);
        residual = txt;
        break;
      }
      case mcat::IntegrationMode::kAppendFusion:
      case mcat::IntegrationMode::kAppendFusionDec: {
        auto [t, a] = mcat::IntegrateAppendFusion(e_txt, e_aud, *score);
        txt = std::move(t);
        aud = std::move(a);
        break;
      }
    }
    Var q = g.Constant(std::move(txt));
    Var kv = g.Constant(std::move(aud));
    Var attended = fusion.Apply(g, q, kv, kv).context;
    if (config.dim != config.input_dim) return attended;
    return g.Add(g.Constant(std::move(residual)), attended);
  }

  Var Pool(Graph<Real>& g, Var fused) const {
    Var x = fused;
    for (const auto& layer : pool) x = layer.Apply(g, x);
    return x;
  }

  Var Encode(Graph<Real>& g, const Matrix<Real>& e_txt, const Matrix<Real>& e_aud,
             const std::optional<double>& score) const {
    return Pool(g, Fuse(g, e_txt, e_aud, score));
  }

  // Runs the decoder over `inputs` (BOS followed by previous targets).
  DecodeTrace Decode(Graph<Real>& g, Var memory, std::span<const int> inputs,
                     std::span<const int> hyp_ids, const std::optional<double>& score) const {
    CheckScore(config, score);
    if (g.rows(memory) != static_cast<Eigen::Index>(hyp_ids.size()))
      throw ShapeMismatch("memory length differs from source length");
    const int n = static_cast<int>(inputs.size());
    Var emb = g.GatherRows(g.Param(*target_embedding), inputs);
    Var y = g.Add(emb, g.Constant(nn::SinusoidalPositions<Real>(n, config.dim)));
    DecodeTrace t;
    t.d_v = decoder.Apply(g, y, memory);
    t.g_v = g.SoftmaxRows(generator.Apply(g, t.d_v));
    auto ptr = pointer.Apply(g, t.d_v, memory, memory);
    t.c_ctx = ptr.context;
    t.a_v = ptr.attn;
    std::vector<Var> gate_in{t.d_v, t.c_ctx};
    if (mcat::AppendsToGate(config.mode)) {
      gate_in.push_back(g.Constant(Matrix<Real>::Constant(n, 1, static_cast<Real>(*score))));
    }
    t.p_copy = g.Sigmoid(gate.Apply(g, g.ConcatCols(gate_in)));
    t.c_dist = g.MatMul(t.a_v, g.Constant(SourceScatter<Real>(hyp_ids, vocab_size)));
    t.o_v = g.Mix(t.p_copy, t.c_dist, t.g_v);
    if (config.literal_eq5_softmax) t.o_v = g.SoftmaxRows(t.o_v);
    return t;
  }

  // Mean per-token negative log-likelihood under teacher forcing.
  Var Loss(Graph<Real>& g, const NluExample& ex) const {
    if (ex.targets.empty()) throw ShapeMismatch("empty target sequence");
    Matrix<Real> e_txt = ex.e_txt.template cast<Real>();
    Matrix<Real> e_aud = ex.e_aud.template cast<Real>();
    Var memory = Encode(g, e_txt, e_aud, ex.score);
    std::vector<int> inputs{NluVocab::kBos};
    inputs.insert(inputs.end(), ex.targets.begin(), ex.targets.end() - 1);
    DecodeTrace t = Decode(g, memory, inputs, ex.hyp_ids, ex.score);
    Var nll = g.PickNll(t.o_v, ex.targets, static_cast<Real>(nn::kLogClamp));
    return g.Scale(nll, Real(1) / static_cast<Real>(ex.targets.size()));
  }
};

}  // namespace slu::deliberation

#endif  // SLU_DELIBERATION_NLU_H_
