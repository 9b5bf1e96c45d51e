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

#include "slu/nn/checkpoint.h"

#include <fstream>
#include <sstream>

#include "slu/binary_io.h"
#include "slu/errors.h"
#include "slu/random.h"

namespace slu::nn {
namespace {

constexpr const char* kFormat = "slu-checkpoint-v1";

std::filesystem::path WithSuffix(const std::filesystem::path& prefix, const char* suffix) {
  return std::filesystem::path(prefix.string() + suffix);
}

InitScheme SchemeFromName(const std::string& name) {
  if (name == "uniform_fan_in") return InitScheme::kUniformFanIn;
  if (name == "ones") return InitScheme::kOnes;
  if (name == "zeros") return InitScheme::kZeros;
  throw IoError("unknown init scheme '" + name + "'");
}

nlohmann::json TensorTable(const ParamStore<float>& params) {
  nlohmann::json tensors = nlohmann::json::array();
  uint64_t offset = 0;
  for (const auto& p : params.params()) {
    tensors.push_back({{"name", p.name},
                       {"shape", {p.value.rows(), p.value.cols()}},
                       {"init", InitSchemeName(p.init.scheme)},
                       {"fan_in", p.init.fan_in},
                       {"seed", p.init.seed},
                       {"offset", offset}});
    offset += static_cast<uint64_t>(p.value.size());
  }
  return tensors;
}

}  // namespace

std::string CheckpointId(const ParamStore<float>& params, const std::string& config_hash) {
  std::ostringstream blob;
  for (const auto& p : params.params()) {
    for (Eigen::Index i = 0; i < p.value.size(); ++i) WriteLE<float>(blob, p.value.data()[i]);
  }
  const uint64_t h = HashString(TensorTable(params).dump() + config_hash + blob.str());
  return ToHex(h);
}

void SaveCheckpoint(const std::filesystem::path& prefix, const ParamStore<float>& params,
                    const std::string& config_hash, const nlohmann::json& metadata) {
  if (prefix.has_parent_path()) std::filesystem::create_directories(prefix.parent_path());
  nlohmann::json manifest = {{"format", kFormat},
                             {"config_hash", config_hash},
                             {"num_parameters", params.NumParameters()},
                             {"store_seed", params.seed()},
                             {"checkpoint_id", CheckpointId(params, config_hash)},
                             {"tensors", TensorTable(params)},
                             {"metadata", metadata}};
  std::ofstream json_out(WithSuffix(prefix, ".json"));
  if (!json_out) throw IoError("cannot write " + WithSuffix(prefix, ".json").string());
  json_out << manifest.dump(2) << "\n";

  std::ofstream bin(WithSuffix(prefix, ".bin"), std::ios::binary);
  if (!bin) throw IoError("cannot write " + WithSuffix(prefix, ".bin").string());
  for (const auto& p : params.params()) {
    for (Eigen::Index i = 0; i < p.value.size(); ++i) WriteLE<float>(bin, p.value.data()[i]);
  }
}

Checkpoint LoadCheckpoint(const std::filesystem::path& prefix,
                          const std::string& expected_config_hash) {
  std::ifstream json_in(WithSuffix(prefix, ".json"));
  if (!json_in) throw IoError("cannot read " + WithSuffix(prefix, ".json").string());
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(json_in);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("bad checkpoint manifest: ") + e.what());
  }
  if (manifest.value("format", "") != kFormat) throw IoError("not a checkpoint manifest");
  const std::string hash = manifest.at("config_hash").get<std::string>();
  if (!expected_config_hash.empty() && hash != expected_config_hash)
    throw ConfigError("checkpoint config hash " + hash + " != expected " + expected_config_hash);

  std::ifstream bin(WithSuffix(prefix, ".bin"), std::ios::binary);
  if (!bin) throw IoError("cannot read " + WithSuffix(prefix, ".bin").string());
  Checkpoint ckpt{hash, manifest.value("metadata", nlohmann::json::object()),
                  ParamStore<float>(manifest.value("store_seed", uint64_t{0}))};
  for (const auto& t : manifest.at("tensors")) {
    const long rows = t.at("shape").at(0).get<long>();
    const long cols = t.at("shape").at(1).get<long>();
    Matrix<float> m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = ReadLE<float>(bin);
    ParamInit init{SchemeFromName(t.at("init").get<std::string>()), t.at("fan_in").get<int>(),
                   t.at("seed").get<uint64_t>()};
    ckpt.params.Adopt(t.at("name").get<std::string>(), std::move(m), init);
  }
  if (bin.peek() != std::char_traits<char>::eof()) throw IoError("trailing bytes in checkpoint blob");
  return ckpt;
}

}  // namespace slu::nn
