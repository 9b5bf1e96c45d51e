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

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>

#include "slu/errors.h"
#include "slu/harness/gradcheck_suite.h"
#include "slu/nn/checkpoint.h"
#include "slu/nn/gradcheck.h"
#include "slu/nn/graph.h"
#include "slu/nn/layers.h"
#include "slu/nn/loss.h"
#include "slu/nn/optim.h"
#include "slu/nn/params.h"

namespace slu::nn {
namespace {

MatrixD Random(int rows, int cols, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  MatrixD m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = n(rng);
  return m;
}

void SetIdentity(Linear<double>& l) {
  l.weight->value.setIdentity();
  l.bias->value.setZero();
}

TEST(Ops, SoftmaxSigmoidLinear) {
  Graph<double> g(false);
  EXPECT_EQ(g.value(g.SoftmaxRows(g.Constant(MatrixD::Zero(1, 2)))), MatrixD::Constant(1, 2, 0.5));
  EXPECT_EQ(g.scalar(g.Sigmoid(g.Constant(MatrixD::Zero(1, 1)))), 0.5);
  ParamStore<double> store(1);
  auto lin = Linear<double>::Create(store, "lin", 3, 3);
  SetIdentity(lin);
  std::mt19937_64 rng(1);
  const MatrixD x = Random(4, 3, rng);
  EXPECT_EQ(g.value(lin.Apply(g, g.Constant(x))), x);
}

TEST(Attention, SingleKeyWeightsAreOne) {
  ParamStore<double> store(2);
  auto mha = MultiHeadAttention<double>::Create(store, "a", 4, 4, 4, 2);
  std::mt19937_64 rng(2);
  Graph<double> g(false);
  Var k = g.Constant(Random(1, 4, rng));
  const auto r = mha.Apply(g, g.Constant(Random(3, 4, rng)), k, k);
  EXPECT_EQ(g.value(r.attn), MatrixD::Ones(3, 1));
}

TEST(Attention, RowsSumToOne) {
  ParamStore<double> store(3);
  auto mha = MultiHeadAttention<double>::Create(store, "a", 5, 6, 8, 4);
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    Graph<double> g(false);
    Var kv = g.Constant(Random(7, 6, rng));
    const auto r = mha.Apply(g, g.Constant(Random(3, 5, rng)), kv, kv, trial % 2 == 0);
    const MatrixD a = g.value(r.attn);
    for (Eigen::Index i = 0; i < a.rows(); ++i) EXPECT_NEAR(a.row(i).sum(), 1.0, 1e-12);
  }
}

TEST(Attention, HandComputedSingleHead) {
  ParamStore<double> store(4);
  auto mha = MultiHeadAttention<double>::Create(store, "a", 2, 2, 2, 1);
  SetIdentity(mha.query);
  SetIdentity(mha.key);
  SetIdentity(mha.value);
  SetIdentity(mha.output);
  MatrixD q(2, 2), k(2, 2), v(2, 2);
  q << 1, 0, 0.5, -1;
  k << 0.2, 0.4, -0.3, 1.0;
  v << 1, 2, 3, 4;
  Graph<double> g(false);
  const auto r = mha.Apply(g, g.Constant(q), g.Constant(k), g.Constant(v));
  for (int i = 0; i < 2; ++i) {
    const double s0 = (q(i, 0) * k(0, 0) + q(i, 1) * k(0, 1)) / std::sqrt(2.0);
    const double s1 = (q(i, 0) * k(1, 0) + q(i, 1) * k(1, 1)) / std::sqrt(2.0);
    const double w0 = std::exp(s0) / (std::exp(s0) + std::exp(s1));
    const double w1 = 1.0 - w0;
    EXPECT_NEAR(g.value(r.attn)(i, 0), w0, 1e-12);
    EXPECT_NEAR(g.value(r.attn)(i, 1), w1, 1e-12);
    EXPECT_NEAR(g.value(r.context)(i, 0), w0 * v(0, 0) + w1 * v(1, 0), 1e-12);
    EXPECT_NEAR(g.value(r.context)(i, 1), w0 * v(0, 1) + w1 * v(1, 1), 1e-12);
  }
}

TEST(Attention, HeadsMustDivideDim) {
  ParamStore<double> store(5);
  EXPECT_THROW(MultiHeadAttention<double>::Create(store, "a", 4, 4, 6, 4), InvalidHeads);
}

TEST(Lstm, ZeroInputZeroBiasGivesZero) {
  ParamStore<double> store(6);
  auto lstm = Lstm<double>::Create(store, "l", 3, 4);
  lstm.bias->value.setZero();
  Graph<double> g(false);
  EXPECT_EQ(g.value(lstm.Apply(g, g.Constant(MatrixD::Zero(5, 3)))), MatrixD::Zero(5, 4));
}

TEST(Lstm, Causal) {
  ParamStore<double> store(7);
  auto lstm = Lstm<double>::Create(store, "l", 3, 4);
  std::mt19937_64 rng(7);
  MatrixD x = Random(6, 3, rng);
  Graph<double> g(false);
  const MatrixD a = g.value(lstm.Apply(g, g.Constant(x)));
  x.bottomRows(3) = Random(3, 3, rng);
  const MatrixD b = g.value(lstm.Apply(g, g.Constant(x)));
  EXPECT_EQ(a.topRows(3), b.topRows(3));
  EXPECT_NE(a.bottomRows(3), b.bottomRows(3));
}

TEST(Transformer, DecoderIsCausal) {
  ParamStore<double> store(8);
  auto dec = TransformerDecoderLayer<double>::Create(store, "d", 4, 2, 8);
  std::mt19937_64 rng(8);
  MatrixD y = Random(5, 4, rng);
  const MatrixD m = Random(3, 4, rng);
  Graph<double> g(false);
  const MatrixD a = g.value(dec.Apply(g, g.Constant(y), g.Constant(m)));
  y.bottomRows(2) = Random(2, 4, rng);
  const MatrixD b = g.value(dec.Apply(g, g.Constant(y), g.Constant(m)));
  EXPECT_EQ(a.topRows(3), b.topRows(3));
  EXPECT_NE(a.bottomRows(2), b.bottomRows(2));
}

TEST(Transformer, UniformCrossAttentionIgnoresMemoryOrder) {
  ParamStore<double> store(9);
  auto dec = TransformerDecoderLayer<double>::Create(store, "d", 4, 2, 8);
  dec.cross_attn.key.weight->value.setZero();
  dec.cross_attn.key.bias->value.setZero();
  std::mt19937_64 rng(9);
  const MatrixD y = Random(3, 4, rng);
  MatrixD m = Random(4, 4, rng);
  Graph<double> g(false);
  const MatrixD a = g.value(dec.Apply(g, g.Constant(y), g.Constant(m)));
  m.row(0).swap(m.row(3));
  m.row(1).swap(m.row(2));
  const MatrixD b = g.value(dec.Apply(g, g.Constant(y), g.Constant(m)));
  EXPECT_LT((a - b).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Loss, WeightedBceValues) {
  EXPECT_NEAR(WeightedBce(1 - 1e-12, 1, 0.3, 0.7), 0.0, 1e-11);
  EXPECT_NEAR(WeightedBce(0.5, 1, 0.3, 0.7), 0.3 * std::log(2.0), 1e-15);
  EXPECT_NEAR(WeightedBce(0.5, 0, 0.3, 0.7), 0.7 * std::log(2.0), 1e-15);
  EXPECT_THROW(WeightedBce(1.0, 1, 0.3, 0.7), DomainError);
  for (double p : {0.1, 0.4, 0.8}) {
    EXPECT_EQ(WeightedBce(p, 1, 1.0, 1.0), -std::log(p));
    EXPECT_EQ(WeightedBce(p, 0, 1.0, 1.0), -std::log(1 - p));
    for (int label : {0, 1}) {
      const double h = 1e-6;
      const double fd =
          (WeightedBce(p + h, label, 0.3, 0.7) - WeightedBce(p - h, label, 0.3, 0.7)) / (2 * h);
      EXPECT_NEAR(WeightedBceGrad(p, label, 0.3, 0.7), fd, 1e-6);
    }
  }
}

TEST(Loss, GraphWeightedBceMatchesScalar) {
  Graph<double> g;
  Var p = g.Input(MatrixD::Constant(1, 1, 0.37));
  Var l = g.WeightedBce(p, 0, 0.3, 0.7, kLogClamp);
  EXPECT_NEAR(g.scalar(l), WeightedBce(0.37, 0, 0.3, 0.7), 1e-15);
  g.Backward(l);
  EXPECT_NEAR(g.grad(p)(0, 0), WeightedBceGrad(0.37, 0, 0.3, 0.7), 1e-12);
}

TEST(Loss, CrossEntropy) {
  const std::vector<double> onehot{0, 1, 0};
  EXPECT_NEAR(CrossEntropy(onehot, 1), 0.0, 1e-15);
  const std::vector<double> uniform(7, 1.0 / 7);
  EXPECT_NEAR(CrossEntropy(uniform, 3), std::log(7.0), 1e-12);
}

TEST(Adam, ZeroGradientLeavesParameters) {
  ParamStore<double> store(10);
  Linear<double>::Create(store, "lin", 3, 2);
  const auto before = store.Clone();
  Adam<double> adam(store, AdamOptions{});
  store.ZeroGrad();
  adam.Step();
  for (const auto& p : store.params()) EXPECT_EQ(p.value, before.Find(p.name)->value);
}

TEST(GradCheck, QuadraticIsExact) {
  ParamStore<double> store(11);
  auto& x = store.GetOrCreate("x", 3, 4, InitScheme::kUniformFanIn, 3);
  const auto report = GradCheck(
      [&](Graph<double>& g) {
        Var v = g.Param(x);
        return g.Sum(g.Mul(v, v));
      },
      store);
  EXPECT_LT(report.max_rel_error, 1e-8);
  EXPECT_EQ(report.coords_checked, 12u);
}

TEST(GradCheck, EveryLayerAndLoss) {
  const auto cases = harness::RunGradCheckSuite(3);
  EXPECT_GE(cases.size(), 14u);
  for (const auto& c : cases) {
    EXPECT_TRUE(c.report.passed) << c.name << " " << c.report.max_rel_error << " at "
                                 << c.report.worst_param;
    EXPECT_LT(c.report.max_rel_error, 1e-4) << c.name;
  }
}

TEST(Checkpoint, RoundTrip) {
  ParamStore<float> store(12);
  Linear<float>::Create(store, "lin", 3, 2);
  LayerNormLayer<float>::Create(store, "norm", 2);
  const auto dir = std::filesystem::temp_directory_path() / "slu_ckpt_test";
  std::filesystem::create_directories(dir);
  SaveCheckpoint(dir / "m", store, "abc", {{"note", "x"}});
  const auto ck = LoadCheckpoint(dir / "m", "abc");
  EXPECT_EQ(ck.config_hash, "abc");
  EXPECT_EQ(ck.metadata.at("note"), "x");
  for (const auto& p : store.params()) {
    const auto* q = ck.params.Find(p.name);
    ASSERT_NE(q, nullptr);
    EXPECT_EQ(q->value, p.value);
  }
  EXPECT_EQ(CheckpointId(ck.params, "abc"), CheckpointId(store, "abc"));
  EXPECT_THROW(LoadCheckpoint(dir / "m", "other"), ConfigError);
  std::filesystem::resize_file(dir / "m.bin", 4);
  EXPECT_THROW(LoadCheckpoint(dir / "m"), IoError);
  EXPECT_THROW(LoadCheckpoint(dir / "missing"), IoError);
  std::filesystem::remove_all(dir);
}

TEST(Params, InitDependsOnlyOnName) {
  ParamStore<float> a(13), b(13);
  a.GetOrCreate("x", 2, 3, InitScheme::kUniformFanIn, 2);
  a.GetOrCreate("y", 3, 3, InitScheme::kUniformFanIn, 3);
  b.GetOrCreate("y", 3, 3, InitScheme::kUniformFanIn, 3);
  b.GetOrCreate("x", 2, 3, InitScheme::kUniformFanIn, 2);
  EXPECT_EQ(a.Find("x")->value, b.Find("x")->value);
  EXPECT_EQ(a.Find("y")->value, b.Find("y")->value);
}

}  // namespace
}  // namespace slu::nn
