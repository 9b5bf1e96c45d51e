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

#ifndef SLU_SCOREENC_ENCODER_H_
#define SLU_SCOREENC_ENCODER_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "slu/mcat/score.h"
#include "slu/nn/graph.h"
#include "slu/nn/layers.h"
#include "slu/nn/loss.h"
#include "slu/nn/params.h"
#include "slu/simasr/asr.h"

namespace slu::scoreenc {

using nn::Graph;
using nn::Var;

struct ScoreEncoderConfig {
  int input_dim = 32;
  int lstm_dim = 16;
  int heads = 1;
  // Upper bound on the parameter count, checked at construction.
  std::size_t budget = 20000;
};

void ValidateScoreEncoderConfig(const ScoreEncoderConfig& cfg);

enum class Objective { kWeightedBce, kRegression, kFocal };
std::string_view ObjectiveName(Objective objective);
Objective ParseObjective(std::string_view name);

struct ScoreTrainConfig {
  Objective objective = Objective::kWeightedBce;
  double w1 = 0.3;  // weight of label 1 (correct hypothesis)
  double w0 = 0.7;  // weight of label 0
  int epochs = 8;
  int batch_size = 32;
  double lr = 3e-3;
  double clip_norm = 1.0;
  uint64_t seed = 1;
};

struct ScoreMetrics {
  double accuracy = 0.0;
  double precision = 0.0;  // of label 1
  double recall = 0.0;
  double auc = 0.0;
  std::size_t n = 0;
};

struct ScoreTrainResult {
  std::vector<double> train_loss;
  ScoreMetrics heldout;
  bool unbalanced_warning = false;
};

// Per-modality LSTM, attention queried by a linear lift of hyp_logprob, and
// a linear + sigmoid head over [s_aud, s_txt].
template <typename Real>
struct ScoreNetwork {
  ScoreEncoderConfig config;
  nn::Lstm<Real> lstm_txt, lstm_aud;
  nn::Linear<Real> lift;
  nn::MultiHeadAttention<Real> attn_txt, attn_aud;
  nn::Linear<Real> head;

  static ScoreNetwork Create(nn::ParamStore<Real>& store, const ScoreEncoderConfig& cfg) {
    ValidateScoreEncoderConfig(cfg);
    ScoreNetwork n;
    n.config = cfg;
    const int h = cfg.lstm_dim;
    n.lstm_txt = nn::Lstm<Real>::Create(store, "score.lstm_txt", cfg.input_dim, h);
    n.lstm_aud = nn::Lstm<Real>::Create(store, "score.lstm_aud", cfg.input_dim, h);
    n.lift = nn::Linear<Real>::Create(store, "score.lift", 1, h);
    n.attn_txt = nn::MultiHeadAttention<Real>::Create(store, "score.attn_txt", h, h, h, cfg.heads);
    n.attn_aud = nn::MultiHeadAttention<Real>::Create(store, "score.attn_aud", h, h, h, cfg.heads);
    n.head = nn::Linear<Real>::Create(store, "score.head", 2 * h, 1);
    return n;
  }

  struct Output {
    Var score;  // 1 × 1 probability
    Var s_txt, s_aud, attn_txt, attn_aud;
  };

  Output Forward(Graph<Real>& g, double hyp_logprob, const Matrix<Real>& e_txt,
                 const Matrix<Real>& e_aud) const {
    if (e_txt.rows() < 1 || e_aud.rows() < 1) throw ShapeMismatch("empty score encoder input");
    Matrix<Real> lp(1, 1);
    lp(0, 0) = static_cast<Real>(hyp_logprob);
    Var q = lift.Apply(g, g.Constant(lp));
    Var ht = lstm_txt.Apply(g, g.Constant(e_txt));
    Var ha = lstm_aud.Apply(g, g.Constant(e_aud));
    auto rt = attn_txt.Apply(g, q, ht, ht);
    auto ra = attn_aud.Apply(g, q, ha, ha);
    std::vector<Var> parts{ra.context, rt.context};
    Var p = g.Sigmoid(head.Apply(g, g.ConcatCols(parts)));
    return Output{p, rt.context, ra.context, rt.attn, ra.attn};
  }

  Var Loss(Graph<Real>& g, double hyp_logprob, const Matrix<Real>& e_txt, const Matrix<Real>& e_aud,
           int label, double w1, double w0) const {
    Output out = Forward(g, hyp_logprob, e_txt, e_aud);
    return g.WeightedBce(out.score, label, w1, w0, static_cast<Real>(nn::kLogClamp));
  }

  Var Loss(Graph<Real>& g, const simasr::Record& r, double w1, double w0) const {
    return Loss(g, r.asr.hyp_logprob, r.asr.e_txt.template cast<Real>(),
                r.asr.e_aud.template cast<Real>(), r.asr.label, w1, w0);
  }
};

class ScoreEncoder {
 public:
  ScoreEncoder(ScoreEncoderConfig config, uint64_t init_seed);

  const ScoreEncoderConfig& config() const { return config_; }
  nn::ParamStore<float>& params() { return store_; }
  const nn::ParamStore<float>& params() const { return store_; }
  const ScoreNetwork<float>& network() const { return net_; }
  std::size_t NumParameters() const { return store_.NumParameters(); }

  mcat::ConfidenceScore Score(double hyp_logprob, const MatrixF& e_txt, const MatrixF& e_aud) const;
  std::vector<double> ScoreAll(const simasr::Dataset& data) const;

  // Weighted BCE with Adam; metrics on `heldout`. Throws EmptyDataset,
  // NotImplemented for objectives other than weighted BCE.
  ScoreTrainResult Train(const simasr::Dataset& train, const simasr::Dataset& heldout,
                         const ScoreTrainConfig& tc);

  void Save(const std::filesystem::path& prefix, const std::string& config_hash,
            const nlohmann::json& extra = {}) const;
  static ScoreEncoder Load(const std::filesystem::path& prefix, const std::string& config_hash = "");

  // Stable id of the current parameters.
  std::string Id(const std::string& config_hash) const;

 private:
  ScoreEncoderConfig config_;
  nn::ParamStore<float> store_;
  ScoreNetwork<float> net_;
};

// Binary metrics with prediction score >= threshold as label 1. AUC uses
// the rank statistic with ties counted half.
ScoreMetrics ComputeMetrics(std::span<const double> scores, std::span<const int> labels,
                            double threshold = 0.5);
double EvalScoreThreshold(std::span<const double> scores, std::span<const int> labels,
                          double threshold = 0.5);
double Auc(std::span<const double> scores, std::span<const int> labels);

std::vector<int> Labels(const simasr::Dataset& data);

}  // namespace slu::scoreenc

#endif  // SLU_SCOREENC_ENCODER_H_
