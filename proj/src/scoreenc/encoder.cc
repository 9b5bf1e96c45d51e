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

#include "slu/scoreenc/encoder.h"

#include <algorithm>
#include <iostream>
#include <numeric>

#include "slu/nn/checkpoint.h"
#include "slu/nn/optim.h"
#include "slu/random.h"

namespace slu::scoreenc {

void ValidateScoreEncoderConfig(const ScoreEncoderConfig& cfg) {
  if (cfg.input_dim < 1 || cfg.lstm_dim < 1) throw ConfigError("score encoder dims must be positive");
  if (cfg.heads < 1 || cfg.lstm_dim % cfg.heads != 0)
    throw InvalidHeads(std::to_string(cfg.lstm_dim) + " not divisible by " + std::to_string(cfg.heads));
}

std::string_view ObjectiveName(Objective objective) {
  switch (objective) {
    case Objective::kWeightedBce:
      return "weighted_bce";
    case Objective::kRegression:
      return "regression";
    case Objective::kFocal:
      return "focal";
  }
  return "unknown";
}

Objective ParseObjective(std::string_view name) {
  for (auto o : {Objective::kWeightedBce, Objective::kRegression, Objective::kFocal}) {
    if (ObjectiveName(o) == name) return o;
  }
  throw ConfigError("unknown score objective '" + std::string(name) + "'");
}

ScoreEncoder::ScoreEncoder(ScoreEncoderConfig config, uint64_t init_seed)
    : config_(config), store_(init_seed) {
  net_ = ScoreNetwork<float>::Create(store_, config_);
  if (store_.NumParameters() > config_.budget) {
    throw ConfigError("score encoder has " + std::to_string(store_.NumParameters()) +
                      " parameters, budget is " + std::to_string(config_.budget));
  }
}

mcat::ConfidenceScore ScoreEncoder::Score(double hyp_logprob, const MatrixF& e_txt,
                                          const MatrixF& e_aud) const {
  Graph<float> g(false);
  auto out = net_.Forward(g, hyp_logprob, e_txt, e_aud);
  return mcat::ConfidenceScore(g.scalar(out.score), mcat::ScoreSource::kEncoder);
}

std::vector<double> ScoreEncoder::ScoreAll(const simasr::Dataset& data) const {
  std::vector<double> out;
  out.reserve(data.size());
  for (const auto& r : data) out.push_back(Score(r.asr.hyp_logprob, r.asr.e_txt, r.asr.e_aud).value());
  return out;
}

ScoreTrainResult ScoreEncoder::Train(const simasr::Dataset& train, const simasr::Dataset& heldout,
                                     const ScoreTrainConfig& tc) {
  if (tc.objective != Objective::kWeightedBce) {
    throw NotImplemented("score objective '" + std::string(ObjectiveName(tc.objective)) + "'");
  }
  if (train.empty()) throw EmptyDataset("no score encoder training records");
  if (tc.batch_size < 1 || tc.epochs < 1) throw ConfigError("epochs and batch_size must be >= 1");
  ScoreTrainResult result;
  if (simasr::LabelZeroFraction(train) < 0.10) {
    result.unbalanced_warning = true;
    std::cerr << "warning: UnbalancedDataset: label-0 fraction below 10%\n";
  }
  nn::Adam<float> adam(store_, nn::AdamOptions{tc.lr, 0.9, 0.999, 1e-8, tc.clip_norm});
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  for (int epoch = 1; epoch <= tc.epochs; ++epoch) {
    Rng rng(DeriveSeed(tc.seed, "score-shuffle", static_cast<uint64_t>(epoch)));
    std::shuffle(order.begin(), order.end(), rng);
    double total = 0.0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(tc.batch_size)) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(tc.batch_size));
      const float inv = 1.0f / static_cast<float>(end - start);
      store_.ZeroGrad();
      for (std::size_t k = start; k < end; ++k) {
        Graph<float> g;
        Var loss = net_.Loss(g, train[order[k]], tc.w1, tc.w0);
        total += g.scalar(loss);
        g.Backward(g.Scale(loss, inv));
      }
      adam.Step();
    }
    result.train_loss.push_back(total / static_cast<double>(train.size()));
  }
  store_.ZeroGrad();
  if (!heldout.empty()) {
    const auto scores = ScoreAll(heldout);
    const auto labels = Labels(heldout);
    result.heldout = ComputeMetrics(scores, labels);
  }
  return result;
}

void ScoreEncoder::Save(const std::filesystem::path& prefix, const std::string& config_hash,
                        const nlohmann::json& extra) const {
  nlohmann::json meta = extra.is_object() ? extra : nlohmann::json::object();
  meta["kind"] = "score_encoder";
  meta["score_config"] = {{"input_dim", config_.input_dim},
                          {"lstm_dim", config_.lstm_dim},
                          {"heads", config_.heads},
                          {"budget", config_.budget}};
  nn::SaveCheckpoint(prefix, store_, config_hash, meta);
}

ScoreEncoder ScoreEncoder::Load(const std::filesystem::path& prefix, const std::string& config_hash) {
  nn::Checkpoint ck = nn::LoadCheckpoint(prefix, config_hash);
  if (ck.metadata.value("kind", "") != "score_encoder")
    throw IoError(prefix.string() + " is not a score encoder checkpoint");
  const auto& j = ck.metadata.at("score_config");
  ScoreEncoderConfig cfg;
  cfg.input_dim = j.at("input_dim").get<int>();
  cfg.lstm_dim = j.at("lstm_dim").get<int>();
  cfg.heads = j.at("heads").get<int>();
  cfg.budget = j.at("budget").get<std::size_t>();
  ScoreEncoder enc(cfg, ck.params.seed());
  enc.store_.CopyValuesFrom(ck.params);
  return enc;
}

std::string ScoreEncoder::Id(const std::string& config_hash) const {
  return nn::CheckpointId(store_, config_hash);
}

double Auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw ShapeMismatch("scores and labels differ in length");
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  // Mid-ranks over tie groups.
  double pos_rank_sum = 0.0;
  std::size_t n_pos = 0;
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j < idx.size() && scores[idx[j]] == scores[idx[i]]) ++j;
    const double mid = 0.5 * static_cast<double>(i + j + 1);
    for (std::size_t k = i; k < j; ++k) {
      if (labels[idx[k]] == 1) {
        pos_rank_sum += mid;
        ++n_pos;
      }
    }
    i = j;
  }
  const std::size_t n_neg = scores.size() - n_pos;
  if (n_pos == 0 || n_neg == 0) return 0.5;
  const double np = static_cast<double>(n_pos);
  return (pos_rank_sum - np * (np + 1) / 2) / (np * static_cast<double>(n_neg));
}

ScoreMetrics ComputeMetrics(std::span<const double> scores, std::span<const int> labels,
                            double threshold) {
  if (scores.size() != labels.size()) throw ShapeMismatch("scores and labels differ in length");
  ScoreMetrics m;
  m.n = scores.size();
  if (m.n == 0) return m;
  std::size_t tp = 0, fp = 0, fn = 0, correct = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const int pred = scores[i] >= threshold ? 1 : 0;
    correct += pred == labels[i];
    tp += pred == 1 && labels[i] == 1;
    fp += pred == 1 && labels[i] == 0;
    fn += pred == 0 && labels[i] == 1;
  }
  m.accuracy = static_cast<double>(correct) / static_cast<double>(m.n);
  m.precision = tp + fp ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
  m.recall = tp + fn ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
  m.auc = Auc(scores, labels);
  return m;
}

double EvalScoreThreshold(std::span<const double> scores, std::span<const int> labels,
                          double threshold) {
  return ComputeMetrics(scores, labels, threshold).accuracy;
}

std::vector<int> Labels(const simasr::Dataset& data) {
  std::vector<int> out;
  out.reserve(data.size());
  for (const auto& r : data) out.push_back(r.asr.label);
  return out;
}

}  // namespace slu::scoreenc
