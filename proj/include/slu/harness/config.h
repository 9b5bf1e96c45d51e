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

#ifndef SLU_HARNESS_CONFIG_H_
#define SLU_HARNESS_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "slu/deliberation/model.h"
#include "slu/harness/pipeline.h"
#include "slu/scoreenc/encoder.h"
#include "slu/simasr/asr.h"

namespace slu::harness {

// Channel error rates of one simulated recognizer size.
struct NoisePreset {
  std::string name;
  double p_sub = 0.0;
  double p_del = 0.0;
  double p_ins = 0.0;
};

std::vector<NoisePreset> DefaultPresets();

struct RunConfig {
  simasr::SimConfig sim;
  simasr::SplitSizes splits;
  uint64_t corpus_seed = 11;

  deliberation::NluConfig nlu;
  deliberation::NluTrainConfig nlu_train;

  scoreenc::ScoreEncoderConfig score_encoder;
  scoreenc::ScoreTrainConfig score_train;
  double balance_target = 0.5;

  // Single-model commands (train-nlu, evaluate).
  ScoreKind score_source = ScoreKind::kNone;
  double constant_score = 1.0;
  double flip_ratio = 0.0;

  // Score-aware mode of the flip curve and of the sweep's oracle and MCAT rows.
  mcat::IntegrationMode mcat_mode = mcat::IntegrationMode::kAppendFusionDec;

  std::vector<uint64_t> seeds = {1, 2, 3};
  std::vector<mcat::IntegrationMode> modes = {
      mcat::IntegrationMode::kBaseline, mcat::IntegrationMode::kMulFusion,
      mcat::IntegrationMode::kAppendFusion, mcat::IntegrationMode::kAppendFusionDec};
  std::vector<double> flip_ratios = {0.0, 0.05, 0.13, 0.25, 0.5, 0.75, 1.0};
  std::vector<NoisePreset> presets = DefaultPresets();

  std::filesystem::path out_dir = "runs";
  // Shared directory for trained models keyed by cell hash; empty disables.
  std::filesystem::path cache_dir;
};

// Throws ConfigError on invalid values.
void ValidateRunConfig(const RunConfig& cfg);

// The JSON and TOML schemas are identical; unknown keys are rejected.
nlohmann::json ToJson(const RunConfig& cfg);
RunConfig FromJson(const nlohmann::json& j);

// Reads a .toml or .json file (by extension; other extensions try JSON).
// Throws ConfigError on parse or validation errors.
RunConfig LoadRunConfig(const std::filesystem::path& path);

// ToJson without out_dir and cache_dir.
nlohmann::json ResultConfigJson(const RunConfig& cfg);

// Hex FNV-1a of the canonical JSON dump.
std::string HashJson(const nlohmann::json& j);
// Hash of ResultConfigJson.
std::string ConfigHash(const RunConfig& cfg);

}  // namespace slu::harness

#endif  // SLU_HARNESS_CONFIG_H_
