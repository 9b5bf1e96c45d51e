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
#include <random>

#include "slu/errors.h"
#include "slu/nn/loss.h"
#include "slu/random.h"
#include "slu/scoreenc/encoder.h"
#include "slu/simasr/asr.h"
#include "slu/simasr/grammar.h"

namespace slu::scoreenc {
namespace {

struct Fixture {
  simasr::GrammarConfig grammar = simasr::DefaultGrammar();
  simasr::FrozenAsr asr{simasr::GrammarVocabulary(grammar), simasr::SimConfig{}};
  simasr::Dataset train =
      simasr::BalanceAugment(simasr::BuildSplit(grammar, asr, 2000, 31, "train"), 0.5, asr, 1);
  simasr::Dataset heldout =
      simasr::BalanceAugment(simasr::BuildSplit(grammar, asr, 1000, 32, "valid"), 0.5, asr, 2);
};

const Fixture& Shared() {
  static const Fixture f;
  return f;
}

ScoreTrainConfig QuickTrain() {
  ScoreTrainConfig tc;
  tc.epochs = 3;
  return tc;
}

// Pairs (i, j) with labels 1 and 0, counting ties as one half.
double PairwiseAuc(const std::vector<double>& s, const std::vector<int>& y) {
  double wins = 0;
  double pairs = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (y[i] != 1 || y[j] != 0) continue;
      pairs += 1;
      wins += s[i] > s[j] ? 1.0 : (s[i] == s[j] ? 0.5 : 0.0);
    }
  }
  return wins / pairs;
}

// One-sided binomial tail P(X >= k) for X ~ Bin(n, 1/2).
double SignTestP(int k, int n) {
  double p = 0;
  for (int i = k; i <= n; ++i) {
    p += std::exp(std::lgamma(n + 1.0) - std::lgamma(i + 1.0) - std::lgamma(n - i + 1.0) -
                  n * std::log(2.0));
  }
  return p;
}

TEST(ScoreEncoder, ParameterCountMatchesArchitecture) {
  for (auto [d, h] : {std::pair{32, 16}, std::pair{8, 4}}) {
    ScoreEncoderConfig cfg;
    cfg.input_dim = d;
    cfg.lstm_dim = h;
    const std::size_t lstm = d * 4 * h + h * 4 * h + 4 * h;
    const std::size_t lift = h + h;
    const std::size_t attn = 4 * (h * h + h);
    const std::size_t head = 2 * h + 1;
    EXPECT_EQ(ScoreEncoder(cfg, 1).NumParameters(), 2 * lstm + lift + 2 * attn + head);
  }
  EXPECT_EQ(ScoreEncoder(ScoreEncoderConfig{}, 1).NumParameters(), 8513u);
  ScoreEncoderConfig tight;
  tight.budget = 8513;
  EXPECT_NO_THROW(ScoreEncoder(tight, 1));
  tight.budget = 8512;
  EXPECT_THROW(ScoreEncoder(tight, 1), ConfigError);
}

TEST(ScoreEncoder, OutputInOpenUnitInterval) {
  const auto& f = Shared();
  ScoreEncoder enc(ScoreEncoderConfig{}, 3);
  for (std::size_t i = 0; i < 200; ++i) {
    const auto& r = f.heldout[i].asr;
    const double s = enc.Score(r.hyp_logprob, r.e_txt, r.e_aud).value();
    EXPECT_GT(s, 0.0);
    EXPECT_LT(s, 1.0);
  }
}

TEST(ScoreEncoder, SingleStepAttentionIsOne) {
  nn::ParamStore<double> store(4);
  auto net = ScoreNetwork<double>::Create(store, ScoreEncoderConfig{});
  nn::Graph<double> g(false);
  const auto out = net.Forward(g, -1.0, MatrixD::Ones(1, 32), MatrixD::Ones(1, 32));
  EXPECT_EQ(g.scalar(out.attn_txt), 1.0);
  EXPECT_EQ(g.scalar(out.attn_aud), 1.0);
}

TEST(ScoreEncoder, UntrainedAucNearHalf) {
  const auto& f = Shared();
  ASSERT_GE(f.train.size(), 2000u);
  const simasr::Dataset sample(f.train.begin(), f.train.begin() + 2000);
  for (uint64_t seed : {5, 6}) {
    ScoreEncoder enc(ScoreEncoderConfig{}, seed);
    const double auc = Auc(enc.ScoreAll(sample), Labels(sample));
    EXPECT_NEAR(auc, 0.5, 0.1) << "seed " << seed;
  }
}

TEST(ScoreEncoder, ScoringIgnoresBatchComposition) {
  const auto& f = Shared();
  ScoreEncoder enc(ScoreEncoderConfig{}, 7);
  const simasr::Dataset some(f.heldout.begin(), f.heldout.begin() + 30);
  const auto all = enc.ScoreAll(some);
  for (std::size_t i = 0; i < some.size(); ++i) {
    const auto& r = some[i].asr;
    EXPECT_EQ(all[i], enc.Score(r.hyp_logprob, r.e_txt, r.e_aud).value());
  }
}

TEST(ScoreEncoder, EqualWeightsGiveUnweightedBce) {
  nn::ParamStore<double> store(8);
  auto net = ScoreNetwork<double>::Create(store, ScoreEncoderConfig{});
  std::mt19937_64 rng(8);
  std::normal_distribution<double> n;
  MatrixD t(3, 32), a(5, 32);
  for (Eigen::Index i = 0; i < t.size(); ++i) t.data()[i] = n(rng);
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = n(rng);
  for (int label : {0, 1}) {
    nn::Graph<double> g(false);
    const double p = g.scalar(net.Forward(g, -3.0, t, a).score);
    const double loss = g.scalar(net.Loss(g, -3.0, t, a, label, 1.0, 1.0));
    EXPECT_EQ(loss, label == 1 ? -std::log(p) : -std::log(1 - p));
  }
}

TEST(ScoreEncoder, TrainingIsDeterministicAndLearns) {
  const auto& f = Shared();
  ScoreEncoder a(ScoreEncoderConfig{}, 9);
  ScoreEncoder b(ScoreEncoderConfig{}, 9);
  const auto ra = a.Train(f.train, f.heldout, QuickTrain());
  const auto rb = b.Train(f.train, f.heldout, QuickTrain());
  EXPECT_EQ(ra.train_loss, rb.train_loss);
  EXPECT_EQ(ra.heldout.accuracy, rb.heldout.accuracy);
  EXPECT_EQ(ra.heldout.auc, rb.heldout.auc);
  EXPECT_GT(ra.heldout.accuracy, 0.75);
  EXPECT_FALSE(ra.unbalanced_warning);

  // Pairs differing only in the log-probability.
  int higher = 0;
  int n = 0;
  double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  Rng rng(10);
  std::uniform_real_distribution<double> shift(0.5, 3.0);
  for (std::size_t i = 0; i < 1000; ++i) {
    const auto& r = f.heldout[i % f.heldout.size()].asr;
    const double lo = r.hyp_logprob - shift(rng);
    const double hi = r.hyp_logprob;
    const double s_lo = a.Score(lo, r.e_txt, r.e_aud).value();
    const double s_hi = a.Score(hi, r.e_txt, r.e_aud).value();
    higher += s_hi > s_lo;
    ++n;
    for (auto [x, y] : {std::pair{lo, s_lo}, std::pair{hi, s_hi}}) {
      sx += x;
      sy += y;
      sxx += x * x;
      syy += y * y;
      sxy += x * y;
    }
  }
  const double m = 2.0 * n;
  const double corr = (sxy - sx * sy / m) / std::sqrt((sxx - sx * sx / m) * (syy - sy * sy / m));
  EXPECT_GT(corr, 0.0);
  EXPECT_LT(SignTestP(higher, n), 0.01) << higher << " of " << n;
}

TEST(ScoreEncoder, SaveLoadRoundTrip) {
  const auto& f = Shared();
  ScoreEncoder enc(ScoreEncoderConfig{}, 11);
  const auto dir = std::filesystem::temp_directory_path() / "slu_score_test";
  std::filesystem::create_directories(dir);
  enc.Save(dir / "s", "h");
  const auto back = ScoreEncoder::Load(dir / "s", "h");
  const simasr::Dataset some(f.heldout.begin(), f.heldout.begin() + 10);
  EXPECT_EQ(back.ScoreAll(some), enc.ScoreAll(some));
  EXPECT_EQ(back.Id("h"), enc.Id("h"));
  std::filesystem::remove_all(dir);
}

TEST(Metrics, ThresholdAccuracy) {
  const std::vector<int> y{1, 0, 1, 0, 1, 0};
  const std::vector<double> perfect{0.9, 0.1, 0.7, 0.2, 0.6, 0.4};
  EXPECT_EQ(EvalScoreThreshold(perfect, y), 1.0);
  const std::vector<double> flat(6, 0.5);
  EXPECT_EQ(EvalScoreThreshold(flat, y), 0.5);
  const auto m = ComputeMetrics(perfect, y);
  EXPECT_EQ(m.precision, 1.0);
  EXPECT_EQ(m.recall, 1.0);
  EXPECT_EQ(m.auc, 1.0);
  EXPECT_EQ(m.n, 6u);
}

TEST(Metrics, AucMatchesPairwiseOracle) {
  std::mt19937_64 rng(12);
  std::uniform_int_distribution<int> level(0, 9);
  std::bernoulli_distribution coin(0.4);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> s(60);
    std::vector<int> y(60);
    for (std::size_t i = 0; i < s.size(); ++i) {
      y[i] = coin(rng);
      s[i] = level(rng) / 10.0 + 0.05 * y[i];
    }
    if (std::count(y.begin(), y.end(), 1) == 0) continue;
    EXPECT_NEAR(Auc(s, y), PairwiseAuc(s, y), 1e-12);
  }
  EXPECT_THROW(Auc(std::vector<double>{0.1}, std::vector<int>{}), ShapeMismatch);
}

TEST(Objective, Names) {
  for (auto o : {Objective::kWeightedBce, Objective::kRegression, Objective::kFocal}) {
    EXPECT_EQ(ParseObjective(ObjectiveName(o)), o);
  }
  EXPECT_THROW(ParseObjective("hinge"), ConfigError);
}

}  // namespace
}  // namespace slu::scoreenc
