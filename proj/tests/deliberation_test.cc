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

#include <random>

#include "slu/deliberation/model.h"
#include "slu/deliberation/nlu.h"
#include "slu/errors.h"
#include "slu/harness/pipeline.h"
#include "slu/semtext/metrics.h"
#include "slu/simasr/asr.h"
#include "slu/simasr/grammar.h"

namespace slu::deliberation {
namespace {

using mcat::IntegrationMode;

constexpr IntegrationMode kModes[] = {IntegrationMode::kBaseline, IntegrationMode::kMulFusion,
                                      IntegrationMode::kAppendFusion,
                                      IntegrationMode::kAppendFusionDec};

struct Fixture {
  simasr::GrammarConfig grammar = simasr::DefaultGrammar();
  simasr::FrozenAsr asr{simasr::GrammarVocabulary(grammar), simasr::SimConfig{}};
  NluVocab vocab = harness::MakeNluVocab(grammar);
  simasr::Dataset data = simasr::BuildSplit(grammar, asr, 240, 21, "train");

  std::vector<NluExample> Examples(bool with_score) const {
    std::vector<std::optional<double>> scores(data.size());
    if (with_score) {
      for (std::size_t i = 0; i < data.size(); ++i) scores[i] = harness::OracleScoreOf(data[i]);
    }
    return harness::MakeHypExamples(data, vocab, scores);
  }
};

const Fixture& Shared() {
  static const Fixture f;
  return f;
}

NluConfig SmallConfig(IntegrationMode mode) {
  NluConfig cfg;
  cfg.mode = mode;
  return cfg;
}

MatrixF Random(int rows, int cols, std::mt19937_64& rng) {
  std::normal_distribution<float> n;
  MatrixF m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = n(rng);
  return m;
}

TEST(CopyDistribution, ScattersAndMergesDuplicates) {
  MatrixD a(2, 3);
  a << 0.2, 0.5, 0.3, 1.0, 0.0, 0.0;
  const std::vector<int> ids{4, 2, 4};
  const MatrixD c = CopyDistribution(a, ids, 6);
  ASSERT_EQ(c.rows(), 2);
  ASSERT_EQ(c.cols(), 6);
  EXPECT_DOUBLE_EQ(c(0, 4), 0.5);
  EXPECT_DOUBLE_EQ(c(0, 2), 0.5);
  EXPECT_DOUBLE_EQ(c(1, 4), 1.0);
  EXPECT_DOUBLE_EQ(c.sum(), 2.0);
  EXPECT_EQ(c, a * SourceScatter<double>(ids, 6));
  EXPECT_THROW(CopyDistribution(a, std::vector<int>{1, 2}, 6), ShapeMismatch);
}

TEST(Fuse, ShapesForEveryMode) {
  std::mt19937_64 rng(1);
  for (auto mode : kModes) {
    NluModel model(SmallConfig(mode), Shared().vocab, 3);
    const std::optional<double> score =
        mcat::UsesScore(mode) ? std::optional<double>(0.6) : std::nullopt;
    for (auto [u, t] : {std::pair{1, 1}, std::pair{5, 17}}) {
      const MatrixF m = model.Encode(Random(u, 32, rng), Random(t, 32, rng), score);
      EXPECT_EQ(m.rows(), u);
      EXPECT_EQ(m.cols(), 32);
      EXPECT_TRUE(m.allFinite());
    }
  }
}

TEST(Fuse, DuplicatedAudioFramesDoNotChangeUniformCase) {
  // Repeating every audio frame keeps the attention-weighted average fixed.
  std::mt19937_64 rng(2);
  NluModel model(SmallConfig(IntegrationMode::kBaseline), Shared().vocab, 4);
  const MatrixF txt = Random(3, 32, rng);
  const MatrixF aud = Random(4, 32, rng);
  MatrixF twice(8, 32);
  twice << aud, aud;
  const MatrixF a = model.Encode(txt, aud, std::nullopt);
  const MatrixF b = model.Encode(txt, twice, std::nullopt);
  EXPECT_LT((a - b).cwiseAbs().maxCoeff(), 1e-4f);
}

TEST(Fuse, MissingScoreThrows) {
  NluModel model(SmallConfig(IntegrationMode::kAppendFusion), Shared().vocab, 5);
  EXPECT_THROW(model.Encode(MatrixF::Ones(2, 32), MatrixF::Ones(3, 32), std::nullopt),
               MissingScore);
}

TEST(Fuse, MulModeBlindsOneModality) {
  std::mt19937_64 rng(3);
  NluModel model(SmallConfig(IntegrationMode::kMulFusion), Shared().vocab, 6);
  const MatrixF txt = Random(4, 32, rng);
  const MatrixF aud = Random(6, 32, rng);
  EXPECT_EQ(model.Encode(txt, aud, 1.0), model.Encode(txt, Random(6, 32, rng), 1.0));
  EXPECT_EQ(model.Encode(txt, aud, 0.0), model.Encode(Random(4, 32, rng), aud, 0.0));
  EXPECT_NE(model.Encode(txt, aud, 0.5), model.Encode(txt, Random(6, 32, rng), 0.5));
}

TEST(Pointer, DistributionsSumToOne) {
  const auto& f = Shared();
  for (auto mode : kModes) {
    NluModel model(SmallConfig(mode), f.vocab, 7);
    const auto examples = f.Examples(mcat::UsesScore(mode));
    for (std::size_t i = 0; i < 20; ++i) {
      const auto& ex = examples[i];
      const MatrixF memory = model.Encode(ex.e_txt, ex.e_aud, ex.score);
      const std::vector<int> prev(ex.targets.begin(), ex.targets.begin() + 2);
      const auto s = model.Step(prev, memory, ex.hyp_ids, ex.score);
      EXPECT_NEAR(s.g_v.sum(), 1.0, 1e-5);
      EXPECT_NEAR(s.a_v.sum(), 1.0, 1e-5);
      EXPECT_NEAR(s.c_dist.sum(), 1.0, 1e-5);
      EXPECT_NEAR(s.o_v.sum(), 1.0, 1e-5);
      EXPECT_GT(s.p_copy, 0.0f);
      EXPECT_LT(s.p_copy, 1.0f);
    }
  }
}

TEST(Pointer, ForcedGateSelectsOneDistribution) {
  const auto& f = Shared();
  NluModel model(SmallConfig(IntegrationMode::kAppendFusionDec), f.vocab, 8);
  const auto ex = f.Examples(true)[0];
  auto& bias = model.params().Find("decoder.gate.bias")->value;
  const MatrixF memory = model.Encode(ex.e_txt, ex.e_aud, ex.score);
  bias.setConstant(1e4f);
  auto s = model.Step({}, memory, ex.hyp_ids, ex.score);
  EXPECT_EQ(s.p_copy, 1.0f);
  EXPECT_EQ(s.o_v, s.c_dist);
  bias.setConstant(-1e4f);
  s = model.Step({}, memory, ex.hyp_ids, ex.score);
  EXPECT_EQ(s.p_copy, 0.0f);
  EXPECT_EQ(s.o_v, s.g_v);
}

TEST(Model, SameSeedSameLoss) {
  const auto& f = Shared();
  const auto ex = f.Examples(true)[3];
  NluModel a(SmallConfig(IntegrationMode::kAppendFusionDec), f.vocab, 9);
  NluModel b(SmallConfig(IntegrationMode::kAppendFusionDec), f.vocab, 9);
  NluModel c(SmallConfig(IntegrationMode::kAppendFusionDec), f.vocab, 10);
  EXPECT_EQ(a.Loss(ex), b.Loss(ex));
  EXPECT_NE(a.Loss(ex), c.Loss(ex));
  EXPECT_EQ(a.GreedyDecodeIds(ex.e_txt, ex.e_aud, ex.hyp_ids, ex.score),
            b.GreedyDecodeIds(ex.e_txt, ex.e_aud, ex.hyp_ids, ex.score));
}

TEST(Model, DecodeLengthIsBounded) {
  const auto& f = Shared();
  NluModel model(SmallConfig(IntegrationMode::kBaseline), f.vocab, 11);
  const auto examples = f.Examples(false);
  for (std::size_t i = 0; i < 40; ++i) {
    const auto& ex = examples[i];
    EXPECT_LE(model.GreedyDecodeIds(ex.e_txt, ex.e_aud, ex.hyp_ids, std::nullopt).size(), 64u);
  }
}

TEST(Model, OverfitsOneUtterance) {
  const auto& f = Shared();
  std::size_t pick = 0;
  while (f.data[pick].utt.parse.root().children.empty()) ++pick;
  const auto& rec = f.data[pick];
  const auto ex = f.Examples(true)[pick];
  NluModel model(SmallConfig(IntegrationMode::kAppendFusionDec), f.vocab, 12);
  NluTrainConfig tc;
  tc.epochs = 200;
  tc.batch_size = 1;
  tc.patience = 0;
  const auto r = model.Train({ex}, {}, tc);
  EXPECT_LE(r.steps, 200);
  EXPECT_LT(r.train_loss.back(), 0.1 * r.train_loss.front());
  const auto out = model.GreedyDecode(rec.asr.e_txt, rec.asr.e_aud, rec.asr.hyp_words, ex.score);
  EXPECT_TRUE(semtext::ExactMatch(out, rec.utt.parse.ToString()))
      << out << " vs " << rec.utt.parse.ToString();
}

TEST(Model, LossDecreasesOverEpochs) {
  const auto& f = Shared();
  const auto examples = f.Examples(false);
  const std::vector<NluExample> train(examples.begin(), examples.begin() + 200);
  NluModel model(SmallConfig(IntegrationMode::kBaseline), f.vocab, 13);
  NluTrainConfig tc;
  tc.epochs = 5;
  tc.patience = 0;
  const auto r = model.Train(train, {}, tc);
  ASSERT_EQ(r.train_loss.size(), 5u);
  EXPECT_LT(r.train_loss[4], r.train_loss[0]);
}

TEST(Model, SaveLoadRoundTrip) {
  const auto& f = Shared();
  const auto ex = f.Examples(true)[1];
  NluModel model(SmallConfig(IntegrationMode::kMulFusion), f.vocab, 14);
  const auto dir = std::filesystem::temp_directory_path() / "slu_nlu_test";
  std::filesystem::create_directories(dir);
  model.Save(dir / "m", "h1");
  const auto back = NluModel::Load(dir / "m", "h1");
  EXPECT_EQ(back.Loss(ex), model.Loss(ex));
  EXPECT_THROW(NluModel::Load(dir / "m", "h2"), ConfigError);
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace slu::deliberation
