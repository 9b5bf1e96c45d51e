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

#include "slu/simasr/dataset_io.h"

#include <cstring>
#include <fstream>
#include <map>
#include <memory>
#include <string>

#include <nlohmann/json.hpp>

#include "slu/binary_io.h"
#include "slu/errors.h"

namespace slu::simasr {
namespace {

constexpr char kMagic[8] = {'S', 'L', 'U', 'E', 'M', 'B', '0', '1'};
constexpr uint32_t kVersion = 1;

nlohmann::json MatrixToJson(const MatrixF& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

MatrixF MatrixFromJson(const nlohmann::json& j) {
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = rows ? static_cast<Eigen::Index>(j.at(0).size()) : 0;
  MatrixF m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    if (static_cast<Eigen::Index>(j[r].size()) != cols) throw IoError("ragged inline matrix");
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = j[r][c].get<float>();
  }
  return m;
}

struct IndexEntry {
  uint64_t offset = 0;
  uint32_t u = 0, t = 0, d = 0;
};

std::filesystem::path SidecarPath(const std::filesystem::path& path) {
  return std::filesystem::path(path.string() + ".emb");
}

void WriteSidecar(const std::filesystem::path& path, const Dataset& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(kMagic, sizeof(kMagic));
  WriteLE<uint32_t>(out, kVersion);
  WriteLE<uint64_t>(out, data.size());
  uint64_t offset = 0;
  for (const auto& r : data) {
    WriteLE<uint32_t>(out, static_cast<uint32_t>(r.utt.id.size()));
    out.write(r.utt.id.data(), static_cast<std::streamsize>(r.utt.id.size()));
    WriteLE<uint64_t>(out, offset);
    WriteLE<uint32_t>(out, static_cast<uint32_t>(r.asr.e_txt.rows()));
    WriteLE<uint32_t>(out, static_cast<uint32_t>(r.asr.e_aud.rows()));
    WriteLE<uint32_t>(out, static_cast<uint32_t>(r.asr.e_txt.cols()));
    offset += static_cast<uint64_t>(r.asr.e_txt.size() + r.asr.e_aud.size());
  }
  for (const auto& r : data) {
    for (Eigen::Index i = 0; i < r.asr.e_txt.size(); ++i) WriteLE<float>(out, r.asr.e_txt.data()[i]);
    for (Eigen::Index i = 0; i < r.asr.e_aud.size(); ++i) WriteLE<float>(out, r.asr.e_aud.data()[i]);
  }
}

class Sidecar {
 public:
  explicit Sidecar(const std::filesystem::path& path) : in_(path, std::ios::binary) {
    if (!in_) throw IoError("cannot read " + path.string());
    char magic[sizeof(kMagic)];
    if (!in_.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
      throw IoError("bad sidecar magic in " + path.string());
    if (ReadLE<uint32_t>(in_) != kVersion) throw IoError("unsupported sidecar version");
    const uint64_t count = ReadLE<uint64_t>(in_);
    for (uint64_t i = 0; i < count; ++i) {
      std::string id(ReadLE<uint32_t>(in_), '\0');
      if (!in_.read(id.data(), static_cast<std::streamsize>(id.size())))
        throw IoError("truncated sidecar index");
      IndexEntry e;
      e.offset = ReadLE<uint64_t>(in_);
      e.u = ReadLE<uint32_t>(in_);
      e.t = ReadLE<uint32_t>(in_);
      e.d = ReadLE<uint32_t>(in_);
      index_.emplace(std::move(id), e);
    }
    data_start_ = in_.tellg();
  }

  void Load(const std::string& id, MatrixF& e_txt, MatrixF& e_aud) {
    auto it = index_.find(id);
    if (it == index_.end()) throw IoError("record '" + id + "' missing from sidecar");
    const IndexEntry& e = it->second;
    in_.seekg(data_start_ + static_cast<std::streamoff>(e.offset * sizeof(float)));
    e_txt.resize(e.u, e.d);
    e_aud.resize(e.t, e.d);
    for (Eigen::Index i = 0; i < e_txt.size(); ++i) e_txt.data()[i] = ReadLE<float>(in_);
    for (Eigen::Index i = 0; i < e_aud.size(); ++i) e_aud.data()[i] = ReadLE<float>(in_);
  }

 private:
  std::ifstream in_;
  std::map<std::string, IndexEntry> index_;
  std::streampos data_start_;
};

}  // namespace

void WriteDataset(const std::filesystem::path& path, const Dataset& data,
                  EmbeddingStorage storage) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  const std::string sidecar_name = SidecarPath(path.filename()).string();
  for (const auto& r : data) {
    nlohmann::json j = {{"id", r.utt.id},
                        {"domain", r.utt.domain},
                        {"ref_words", r.utt.ref_words},
                        {"parse_string", r.utt.parse.ToString()},
                        {"hyp_words", r.asr.hyp_words},
                        {"hyp_logprob", r.asr.hyp_logprob},
                        {"label", r.asr.label}};
    if (storage == EmbeddingStorage::kSidecar) {
      j["e_txt_path"] = sidecar_name;
      j["e_aud_path"] = sidecar_name;
    } else {
      j["e_txt"] = MatrixToJson(r.asr.e_txt);
      j["e_aud"] = MatrixToJson(r.asr.e_aud);
    }
    out << j.dump() << "\n";
  }
  if (storage == EmbeddingStorage::kSidecar) WriteSidecar(SidecarPath(path), data);
}

Dataset ReadDataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  Dataset out;
  std::map<std::string, std::unique_ptr<Sidecar>> sidecars;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
      Record r{Utterance{j.at("id").get<std::string>(), j.at("domain").get<std::string>(),
                         j.at("ref_words").get<TokenSeq>(),
                         semtext::Deserialize(semtext::Tokenize(j.at("parse_string").get<std::string>()))},
               AsrOutput{}};
      r.asr.hyp_words = j.at("hyp_words").get<TokenSeq>();
      r.asr.hyp_logprob = j.at("hyp_logprob").get<double>();
      r.asr.label = j.at("label").get<int>();
      if (j.contains("e_txt")) {
        r.asr.e_txt = MatrixFromJson(j.at("e_txt"));
        r.asr.e_aud = MatrixFromJson(j.at("e_aud"));
      } else if (j.contains("e_txt_path")) {
        const std::string name = j.at("e_txt_path").get<std::string>();
        auto& sc = sidecars[name];
        if (!sc) sc = std::make_unique<Sidecar>(path.parent_path() / name);
        sc->Load(r.utt.id, r.asr.e_txt, r.asr.e_aud);
      }
      out.push_back(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      throw IoError(path.string() + ": " + e.what());
    }
  }
  return out;
}

}  // namespace slu::simasr
