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

#include "slu/harness/gradcheck_suite.h"

#include <random>

#include "slu/deliberation/nlu.h"
#include "slu/nn/layers.h"
#include "slu/random.h"
#include "slu/scoreenc/encoder.h"

namespace slu::harness {
namespace {

using nn::Graph;
using nn::ParamStore;
using nn::Var;

template <typename Real>
Matrix<Real> RandomMatrix(int rows, int cols, Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix<Real> m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = static_cast<Real>(n(rng));
  return m;
}

// Random linear functional of the output, so every coordinate gets a
// distinct upstream gradient.
Var Probe(Graph<double>& g, Var out, Rng& rng) {
  return g.Sum(g.Mul(out, g.Constant(RandomMatrix<double>(static_cast<int>(g.rows(out)),
                                                          static_cast<int>(g.cols(out)), rng))));
}

}  // namespace

std::vector<GradCheckCase> RunGradCheckSuite(uint64_t seed, const nn::GradCheckOptions& options) {
  std::vector<GradCheckCase> out;
  auto run = [&](const std::string& name, ParamStore<double>& store, const nn::LossBuilder& build) {
    out.push_back({name, nn::GradCheck(build, store, options)});
  };
  const int d = 6;

  {
    ParamStore<double> store(DeriveSeed(seed, "linear"));
    Rng rng(DeriveSeed(seed, "linear-data"));
    auto layer = nn::Linear<double>::Create(store, "linear", d, 5);
    const MatrixD x = RandomMatrix<double>(3, d, rng);
    const uint64_t probe = rng();
    run("linear", store, [&](Graph<double>& g) {
      Rng r(probe);
      return Probe(g, layer.Apply(g, g.Constant(x)), r);
    });
  }
  {
    ParamStore<double> store(DeriveSeed(seed, "layer_norm"));
    Rng rng(DeriveSeed(seed, "layer_norm-data"));
    auto layer = nn::LayerNormLayer<double>::Create(store, "norm", d);
    for (auto& p : store.params()) p.value = RandomMatrix<double>(1, d, rng);
    const MatrixD x = RandomMatrix<double>(4, d, rng);
    const uint64_t probe = rng();
    run("layer_norm", store, [&](Graph<double>& g) {
      Rng r(probe);
      return Probe(g, layer.Apply(g, g.Constant(x)), r);
    });
  }
  {
    ParamStore<double> store(DeriveSeed(seed, "attention"));
    Rng rng(DeriveSeed(seed, "attention-data"));
    auto layer = nn::MultiHeadAttention<double>::Create(store, "attn", d, d + 1, 8, 2);
    const MatrixD q = RandomMatrix<double>(3, d, rng);
    const MatrixD kv = RandomMatrix<double>(5, d + 1, rng);
    const uint64_t probe = rng();
    run("multi_head_attention", store, [&](Graph<double>& g) {
      Rng r(probe);
      Var k = g.Constant(kv);
      return Probe(g, layer.Apply(g, g.Constant(q), k, k).context, r);
    });
  }
  {
    ParamStore<double> store(DeriveSeed(seed, "causal"));
    Rng rng(DeriveSeed(seed, "causal-data"));
    auto layer = nn::MultiHeadAttention<double>::Create(store, "attn", d, d, 6, 3);
    const MatrixD x = RandomMatrix<double>(4, d, rng);
    const uint64_t probe = rng();
    run("causal_self_attention", store, [&](Graph<double>& g) {
      Rng r(probe);
      Var v = g.Constant(x);
      return Probe(g, layer.Apply(g, v, v, v, true).context, r);
    });
  }
  {
    ParamStore<double> store(DeriveSeed(seed, "ff"));
    Rng rng(DeriveSeed(seed, "ff-data"));
    auto layer = nn::FeedForward<double>::Create(store, "ff", d, 10);
    const MatrixD x = RandomMatrix<double>(3, d, rng);
    const uint64_t probe = rng();
    run("feed_forward", store, [&](Graph<double>& g) {
      Rng r(probe);
      return Probe(g, layer.Apply(g, g.Constant(x)), r);
    });
  }
  {
    ParamStore<double> store(DeriveSeed(seed, "encoder"));
    Rng rng(DeriveSeed(seed, "encoder-data"));
    auto layer = nn::TransformerEncoderLayer<double>::Create(store, "enc", d, 2, 10);
    const MatrixD x = RandomMatrix<double>(4, d, rng);
    const uint64_t probe = rng();
    run("transformer_encoder_layer", store, [&](Graph<double>& g) {
      Rng r(probe);
      return Probe(g, layer.Apply(g, g.Constant(x)), r);
    });
  }
  {
    ParamStore<double> store(DeriveSeed(seed, "decoder"));
    Rng rng(DeriveSeed(seed, "decoder-data"));
    auto layer = nn::TransformerDecoderLayer<double>::Create(store, "dec", d, 2, 10);
    const MatrixD y = RandomMatrix<double>(3, d, rng);
    const MatrixD m = RandomMatrix<double>(5, d, rng);
    const uint64_t probe = rng();
    run("transformer_decoder_layer", store, [&](Graph<double>& g) {
      Rng r(probe);
      return Probe(g, layer.Apply(g, g.Constant(y), g.Constant(m)), r);
    });
  }
  {
    ParamStore<double> store(DeriveSeed(seed, "lstm"));
    Rng rng(DeriveSeed(seed, "lstm-data"));
    auto layer = nn::Lstm<double>::Create(store, "lstm", d, 4);
    const MatrixD x = RandomMatrix<double>(5, d, rng);
    const uint64_t probe = rng();
    run("lstm", store, [&](Graph<double>& g) {
      Rng r(probe);
      return Probe(g, layer.Apply(g, g.Constant(x)), r);
    });
  }

  for (auto mode : {mcat::IntegrationMode::kBaseline, mcat::IntegrationMode::kMulFusion,
                    mcat::IntegrationMode::kAppendFusion, mcat::IntegrationMode::kAppendFusionDec}) {
    const std::string name = "nlu_loss_" + std::string(mcat::ModeName(mode));
    ParamStore<double> store(DeriveSeed(seed, name));
    Rng rng(DeriveSeed(seed, name + "-data"));
    deliberation::NluConfig cfg;
    cfg.input_dim = d;
    cfg.dim = 8;
    cfg.fusion_heads = 2;
    cfg.pool_layers = 1;
    cfg.pool_heads = 2;
    cfg.decoder_heads = 2;
    cfg.ff_dim = 12;
    cfg.mode = mode;
    const int vocab = 9;
    auto net = deliberation::NluNetwork<double>::Create(store, cfg, vocab);
    deliberation::NluExample ex;
    ex.e_txt = RandomMatrix<float>(4, d, rng);
    ex.e_aud = RandomMatrix<float>(7, d, rng);
    ex.hyp_ids = {3, 5, 3, 8};
    if (mcat::UsesScore(mode)) ex.score = 0.3;
    ex.targets = {4, 3, 8, 2, 1};
    run(name, store, [&](Graph<double>& g) { return net.Loss(g, ex); });
  }

  for (int label : {0, 1}) {
    const std::string name = "score_encoder_loss_label" + std::to_string(label);
    ParamStore<double> store(DeriveSeed(seed, name));
    Rng rng(DeriveSeed(seed, name + "-data"));
    scoreenc::ScoreEncoderConfig cfg;
    cfg.input_dim = d;
    cfg.lstm_dim = 4;
    auto net = scoreenc::ScoreNetwork<double>::Create(store, cfg);
    const MatrixD e_txt = RandomMatrix<double>(4, d, rng);
    const MatrixD e_aud = RandomMatrix<double>(6, d, rng);
    run(name, store, [&](Graph<double>& g) { return net.Loss(g, -2.5, e_txt, e_aud, label, 0.3, 0.7); });
  }
  return out;
}

}  // namespace slu::harness
