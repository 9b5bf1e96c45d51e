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

#ifndef SLU_NN_CHECKPOINT_H_
#define SLU_NN_CHECKPOINT_H_

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "slu/nn/params.h"

namespace slu::nn {

// A checkpoint is `<prefix>.json` (manifest: tensor names, shapes, init
// seeds and schemes, config hash, free-form metadata) plus `<prefix>.bin`
// (the tensors as little-endian float32, in manifest order).
struct Checkpoint {
  std::string config_hash;
  nlohmann::json metadata;
  ParamStore<float> params;
};

void SaveCheckpoint(const std::filesystem::path& prefix, const ParamStore<float>& params,
                    const std::string& config_hash, const nlohmann::json& metadata);

// Throws ConfigError if the stored hash differs from `expected_config_hash`
// (unless it is empty) and IoError on unreadable or truncated files.
Checkpoint LoadCheckpoint(const std::filesystem::path& prefix,
                          const std::string& expected_config_hash = "");

// Stable identifier of a checkpoint's contents (hash of manifest and blob).
std::string CheckpointId(const ParamStore<float>& params, const std::string& config_hash);

}  // namespace slu::nn

#endif  // SLU_NN_CHECKPOINT_H_
