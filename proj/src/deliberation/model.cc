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

#include "slu/deliberation/model.h"

#include <algorithm>
#include <numeric>

#include "slu/nn/checkpoint.h"
#include "slu/nn/optim.h"
#include "slu/random.h"

namespace slu::deliberation {

void ValidateNluConfig(const NluConfig& cfg) {
  if (cfg.input_dim < 1 || cfg.dim < 1 || cfg.ff_dim < 1)
    throw ConfigError("NLU dimensions must be positive");
  if (cfg.pool_layers < 0) throw ConfigError("pool_layers must be >= 0");
  if (cfg.max_decode_len < 1) throw ConfigError("max_decode_len must be >= 1");
  for (int h : {cfg.fusion_heads, cfg.pool_heads, cfg.decoder_heads, cfg.pointer_heads}) {
    if (h < 1 || cfg.dim % h != 0)
      throw InvalidHeads(std::to_string(cfg.dim) + " not divisible by " + std::to_string(h));
  }
}

NluVocab::NluVocab(const semtext::Ontology& ontology, const std::vector<std::string>& words) {
  tokens_ = {"<s>", "</s>", "]"};
  for (auto& s : ontology.Symbols()) tokens_.push_back(s);
  for (auto& w : words) tokens_.push_back(w);
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (!index_.emplace(tokens_[i], static_cast<int>(i)).second)
      throw ConfigError("duplicate vocabulary token '" + tokens_[i] + "'");
  }
}

int NluVocab::Index(std::string_view token) const {
  auto it = index_.find(token);
  if (it == index_.end()) throw UnknownToken("'" + std::string(token) + "'");
  return it->second;
}

std::vector<int> NluVocab::Encode(const TokenSeq& tokens) const {
  std::vector<int> ids;
  ids.reserve(tokens.size());
  for (const auto& t : tokens) ids.push_back(Index(t));
  return ids;
}

NluModel::NluModel(NluConfig config, NluVocab vocab, uint64_t init_seed)
    : config_(config), vocab_(std::move(vocab)), store_(init_seed) {
  net_ = NluNetwork<float>::Create(store_, config_, vocab_.size());
}

MatrixF NluModel::Encode(const MatrixF& e_txt, const MatrixF& e_aud,
                         const std::optional<double>& score) const {
  Graph<float> g(false);
  return g.value(net_.Encode(g, e_txt, e_aud, score));
}

DecodeStep NluModel::Step(const std::vector<int>& prev_targets, const MatrixF& memory,
                          const std::vector<int>& hyp_ids,
                          const std::optional<double>& score) const {
  Graph<float> g(false);
  std::vector<int> inputs{NluVocab::kBos};
  inputs.insert(inputs.end(), prev_targets.begin(), prev_targets.end());
  DecodeTrace t = net_.Decode(g, g.Constant(memory), inputs, hyp_ids, score);
  const Eigen::Index last = static_cast<Eigen::Index>(inputs.size()) - 1;
  DecodeStep s;
  s.d_v = g.value(t.d_v).row(last);
  s.g_v = g.value(t.g_v).row(last);
  s.a_v = g.value(t.a_v).row(last);
  s.c_ctx = g.value(t.c_ctx).row(last);
  s.c_dist = g.value(t.c_dist).row(last);
  s.o_v = g.value(t.o_v).row(last);
  s.p_copy = g.value(t.p_copy)(last, 0);
  return s;
}

std::vector<int> NluModel::GreedyDecodeIds(const MatrixF& e_txt, const MatrixF& e_aud,
                                           const std::vector<int>& hyp_ids,
                                           const std::optional<double>& score) const {
  const MatrixF memory = Encode(e_txt, e_aud, score);
  std::vector<int> out;
  while (static_cast<int>(out.size()) < config_.max_decode_len) {
    DecodeStep s = Step(out, memory, hyp_ids, score);
    Eigen::Index best = 0;
    s.o_v.row(0).maxCoeff(&best);
    if (best == NluVocab::kEos) break;
    out.push_back(static_cast<int>(best));
  }
  return out;
}

std::string NluModel::GreedyDecode(const MatrixF& e_txt, const MatrixF& e_aud,
                                   const TokenSeq& hyp_words,
                                   const std::optional<double>& score) const {
  TokenSeq tokens;
  for (int id : GreedyDecodeIds(e_txt, e_aud, vocab_.Encode(hyp_words), score))
    tokens.push_back(vocab_.token(id));
  return semtext::Join(tokens);
}

float NluModel::Loss(const NluExample& example) const {
  Graph<float> g(false);
  return g.scalar(net_.Loss(g, example));
}

double NluModel::MeanLoss(const std::vector<NluExample>& examples) const {
  if (examples.empty()) return 0.0;
  double total = 0.0;
  for (const auto& ex : examples) total += Loss(ex);
  return total / static_cast<double>(examples.size());
}

NluTrainResult NluModel::Train(const std::vector<NluExample>& train,
                               const std::vector<NluExample>& valid, const NluTrainConfig& tc,
                               const std::function<void(int, double, double)>& on_epoch) {
  if (train.empty()) throw EmptyDataset("no NLU training examples");
  if (tc.batch_size < 1 || tc.epochs < 1) throw ConfigError("epochs and batch_size must be >= 1");
  nn::Adam<float> adam(store_, nn::AdamOptions{tc.lr, 0.9, 0.999, 1e-8, tc.clip_norm});
  NluTrainResult result;
  std::optional<nn::ParamStore<float>> best;
  double best_valid = 0.0;
  int since_best = 0;
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  for (int epoch = 1; epoch <= tc.epochs; ++epoch) {
    Rng rng(DeriveSeed(tc.seed, "nlu-shuffle", static_cast<uint64_t>(epoch)));
    std::shuffle(order.begin(), order.end(), rng);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(tc.batch_size)) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(tc.batch_size));
      const float inv = 1.0f / static_cast<float>(end - start);
      store_.ZeroGrad();
      for (std::size_t k = start; k < end; ++k) {
        Graph<float> g;
        Var loss = net_.Loss(g, train[order[k]]);
        epoch_loss += g.scalar(loss);
        g.Backward(g.Scale(loss, inv));
      }
      adam.Step();
      ++result.steps;
    }
    result.train_loss.push_back(epoch_loss / static_cast<double>(train.size()));
    double v = 0.0;
    if (!valid.empty()) {
      v = MeanLoss(valid);
      result.valid_loss.push_back(v);
      if (!best || v < best_valid) {
        best_valid = v;
        best = store_.Clone();
        result.best_epoch = epoch;
        since_best = 0;
      } else {
        ++since_best;
      }
    }
    if (on_epoch) on_epoch(epoch, result.train_loss.back(), v);
    if (!valid.empty() && since_best >= tc.patience) break;
  }
  if (best) store_.CopyValuesFrom(*best);
  store_.ZeroGrad();
  return result;
}

nlohmann::json NluConfigToJson(const NluConfig& cfg) {
  return {{"input_dim", cfg.input_dim},
          {"dim", cfg.dim},
          {"fusion_heads", cfg.fusion_heads},
          {"pool_layers", cfg.pool_layers},
          {"pool_heads", cfg.pool_heads},
          {"decoder_heads", cfg.decoder_heads},
          {"pointer_heads", cfg.pointer_heads},
          {"ff_dim", cfg.ff_dim},
          {"max_decode_len", cfg.max_decode_len},
          {"literal_eq5_softmax", cfg.literal_eq5_softmax},
          {"mode", std::string(mcat::ModeName(cfg.mode))}};
}

NluConfig NluConfigFromJson(const nlohmann::json& j) {
  NluConfig cfg;
  cfg.input_dim = j.value("input_dim", cfg.input_dim);
  cfg.dim = j.value("dim", cfg.dim);
  cfg.fusion_heads = j.value("fusion_heads", cfg.fusion_heads);
  cfg.pool_layers = j.value("pool_layers", cfg.pool_layers);
  cfg.pool_heads = j.value("pool_heads", cfg.pool_heads);
  cfg.decoder_heads = j.value("decoder_heads", cfg.decoder_heads);
  cfg.pointer_heads = j.value("pointer_heads", cfg.pointer_heads);
  cfg.ff_dim = j.value("ff_dim", cfg.ff_dim);
  cfg.max_decode_len = j.value("max_decode_len", cfg.max_decode_len);
  cfg.literal_eq5_softmax = j.value("literal_eq5_softmax", cfg.literal_eq5_softmax);
  cfg.mode = mcat::ParseMode(j.value("mode", std::string("baseline")));
  ValidateNluConfig(cfg);
  return cfg;
}

void NluModel::Save(const std::filesystem::path& prefix, const std::string& config_hash,
                    const nlohmann::json& extra) const {
  nlohmann::json meta = extra.is_object() ? extra : nlohmann::json::object();
  meta["kind"] = "nlu";
  meta["mcat_mode"] = std::string(mcat::ModeName(config_.mode));
  meta["nlu_config"] = NluConfigToJson(config_);
  meta["vocab"] = vocab_.tokens();
  nn::SaveCheckpoint(prefix, store_, config_hash, meta);
}

NluModel NluModel::Load(const std::filesystem::path& prefix, const std::string& config_hash) {
  nn::Checkpoint ck = nn::LoadCheckpoint(prefix, config_hash);
  if (ck.metadata.value("kind", "") != "nlu") throw IoError(prefix.string() + " is not an NLU checkpoint");
  NluConfig cfg = NluConfigFromJson(ck.metadata.at("nlu_config"));
  const auto tokens = ck.metadata.at("vocab").get<std::vector<std::string>>();
  if (tokens.size() < 3) throw IoError("checkpoint vocabulary too small");
  semtext::Ontology ontology;
  std::vector<std::string> words;
  for (std::size_t i = 3; i < tokens.size(); ++i) {
    const auto& t = tokens[i];
    if (t.rfind("[IN:", 0) == 0) ontology.intents.insert(t.substr(4));
    else if (t.rfind("[SL:", 0) == 0) ontology.slots.insert(t.substr(4));
    else words.push_back(t);
  }
  NluModel model(cfg, NluVocab(ontology, words), ck.params.seed());
  if (model.vocab().tokens() != tokens) throw IoError("checkpoint vocabulary order mismatch");
  model.store_.CopyValuesFrom(ck.params);
  return model;
}

}  // namespace slu::deliberation
