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

#ifndef SLU_DELIBERATION_MODEL_H_
#define SLU_DELIBERATION_MODEL_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "slu/deliberation/nlu.h"
#include "slu/nn/params.h"

namespace slu::deliberation {

struct NluTrainConfig {
  int epochs = 30;
  int batch_size = 32;
  double lr = 1e-3;
  double clip_norm = 1.0;
  // Early stop after this many epochs without a valid-loss improvement.
  int patience = 5;
  uint64_t seed = 1;
};

struct NluTrainResult {
  std::vector<double> train_loss;  // per epoch
  std::vector<double> valid_loss;  // per epoch, empty without a valid set
  int best_epoch = 0;              // 1-based; 0 if never validated
  long steps = 0;
};

// Values of one decoder step, all as row vectors.
struct DecodeStep {
  MatrixF d_v, g_v, a_v, c_ctx, c_dist, o_v;
  float p_copy = 0.0f;
};

class NluModel {
 public:
  NluModel(NluConfig config, NluVocab vocab, uint64_t init_seed);

  const NluConfig& config() const { return config_; }
  const NluVocab& vocab() const { return vocab_; }
  nn::ParamStore<float>& params() { return store_; }
  const nn::ParamStore<float>& params() const { return store_; }
  const NluNetwork<float>& network() const { return net_; }
  std::size_t NumParameters() const { return store_.NumParameters(); }

  // Pooled memory, U × dim.
  MatrixF Encode(const MatrixF& e_txt, const MatrixF& e_aud,
                 const std::optional<double>& score) const;

  // Decoder step after `prev_targets` (BOS is prepended internally).
  DecodeStep Step(const std::vector<int>& prev_targets, const MatrixF& memory,
                  const std::vector<int>& hyp_ids, const std::optional<double>& score) const;

  // Argmax decoding from BOS until EOS or max_decode_len tokens.
  std::vector<int> GreedyDecodeIds(const MatrixF& e_txt, const MatrixF& e_aud,
                                   const std::vector<int>& hyp_ids,
                                   const std::optional<double>& score) const;
  std::string GreedyDecode(const MatrixF& e_txt, const MatrixF& e_aud, const TokenSeq& hyp_words,
                           const std::optional<double>& score) const;

  float Loss(const NluExample& example) const;
  double MeanLoss(const std::vector<NluExample>& examples) const;

  // Teacher-forced NLL with Adam. Restores the best-validation parameters
  // when `valid` is non-empty. Throws EmptyDataset.
  NluTrainResult Train(const std::vector<NluExample>& train, const std::vector<NluExample>& valid,
                       const NluTrainConfig& tc,
                       const std::function<void(int, double, double)>& on_epoch = {});

  // Saves via the checkpoint format with the mode and vocabulary in the
  // metadata, plus `extra` metadata.
  void Save(const std::filesystem::path& prefix, const std::string& config_hash,
            const nlohmann::json& extra = {}) const;
  static NluModel Load(const std::filesystem::path& prefix, const std::string& config_hash = "");

 private:
  NluConfig config_;
  NluVocab vocab_;
  nn::ParamStore<float> store_;
  NluNetwork<float> net_;
};

nlohmann::json NluConfigToJson(const NluConfig& cfg);
NluConfig NluConfigFromJson(const nlohmann::json& j);

}  // namespace slu::deliberation

#endif  // SLU_DELIBERATION_MODEL_H_
