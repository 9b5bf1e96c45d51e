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

#include "slu/harness/config.h"

#include <fstream>
#include <set>
#include <sstream>

#define TOML_EXCEPTIONS 1
#include <toml.hpp>

#include "slu/random.h"

namespace slu::harness {
namespace {

using nlohmann::json;

// Reads fields of one JSON object and rejects keys never asked for.
class Section {
 public:
  Section(const json& j, std::string name) : j_(j), name_(std::move(name)) {
    if (!j_.is_object()) throw ConfigError("'" + name_ + "' must be a table");
  }
  // Throws on keys that no Get/Child call asked for.
  void Done() const {
    for (const auto& [k, v] : j_.items()) {
      if (!seen_.contains(k)) throw ConfigError("unknown key '" + name_ + "." + k + "'");
    }
  }

  template <typename T>
  void Get(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception& e) {
      throw ConfigError("bad value for '" + name_ + "." + key + "': " + e.what());
    }
  }

  const json* Child(const char* key) {
    seen_.insert(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }

 private:
  const json& j_;
  std::string name_;
  std::set<std::string> seen_;
};

json TomlToJson(const toml::node& node) {
  if (auto* t = node.as_table()) {
    json out = json::object();
    for (const auto& [k, v] : *t) out[std::string(k.str())] = TomlToJson(v);
    return out;
  }
  if (auto* a = node.as_array()) {
    json out = json::array();
    for (const auto& v : *a) out.push_back(TomlToJson(v));
    return out;
  }
  if (auto* s = node.as_string()) return s->get();
  if (auto* i = node.as_integer()) return i->get();
  if (auto* f = node.as_floating_point()) return f->get();
  if (auto* b = node.as_boolean()) return b->get();
  throw ConfigError("unsupported TOML value type");
}

}  // namespace

std::vector<NoisePreset> DefaultPresets() {
  return {{"high_noise", 0.042, 0.0105, 0.0105},
          {"mid_noise", 0.03, 0.0075, 0.0075},
          {"low_noise", 0.0225, 0.0058, 0.0058}};
}

void ValidateRunConfig(const RunConfig& cfg) {
  simasr::ValidateSimConfig(cfg.sim);
  deliberation::ValidateNluConfig(cfg.nlu);
  scoreenc::ValidateScoreEncoderConfig(cfg.score_encoder);
  if (cfg.nlu.input_dim != cfg.sim.dim) throw ConfigError("nlu.input_dim must equal sim.dim");
  if (cfg.score_encoder.input_dim != cfg.sim.dim)
    throw ConfigError("score_encoder.input_dim must equal sim.dim");
  if (cfg.splits.train < 1 || cfg.splits.valid < 0 || cfg.splits.test < 1)
    throw ConfigError("split sizes must be positive");
  if (cfg.nlu_train.epochs < 1 || cfg.nlu_train.batch_size < 1 || cfg.nlu_train.lr <= 0)
    throw ConfigError("invalid nlu_train settings");
  if (cfg.score_train.epochs < 1 || cfg.score_train.batch_size < 1 || cfg.score_train.lr <= 0)
    throw ConfigError("invalid score_train settings");
  if (!(cfg.balance_target > 0.0 && cfg.balance_target < 1.0))
    throw ConfigError("balance_target must be in (0,1)");
  if (!(cfg.constant_score >= 0.0 && cfg.constant_score <= 1.0))
    throw ConfigError("constant_score must be in [0,1]");
  if (!(cfg.flip_ratio >= 0.0 && cfg.flip_ratio <= 1.0)) throw ConfigError("flip_ratio must be in [0,1]");
  if (cfg.seeds.empty()) throw ConfigError("seeds must not be empty");
  if (cfg.modes.empty()) throw ConfigError("modes must not be empty");
  for (double r : cfg.flip_ratios) {
    if (!(r >= 0.0 && r <= 1.0)) throw ConfigError("flip ratios must be in [0,1]");
  }
  if (!mcat::UsesScore(cfg.mcat_mode)) throw ConfigError("mcat_mode must use the score");
  if (cfg.presets.empty()) throw ConfigError("presets must not be empty");
  for (const auto& p : cfg.presets) {
    if (p.name.empty()) throw ConfigError("preset without a name");
    simasr::SimConfig s = cfg.sim;
    s.p_sub = p.p_sub;
    s.p_del = p.p_del;
    s.p_ins = p.p_ins;
    simasr::ValidateSimConfig(s);
  }
}

json ToJson(const RunConfig& c) {
  json presets = json::array();
  for (const auto& p : c.presets) {
    presets.push_back({{"name", p.name}, {"p_sub", p.p_sub}, {"p_del", p.p_del}, {"p_ins", p.p_ins}});
  }
  std::vector<std::string> modes;
  for (auto m : c.modes) modes.emplace_back(mcat::ModeName(m));
  json nlu = deliberation::NluConfigToJson(c.nlu);
  nlu.erase("mode");
  return {
      {"sim",
       {{"p_sub", c.sim.p_sub},
        {"p_del", c.sim.p_del},
        {"p_ins", c.sim.p_ins},
        {"dim", c.sim.dim},
        {"frames_min", c.sim.frames_min},
        {"frames_max", c.sim.frames_max},
        {"sigma_aud", c.sim.sigma_aud},
        {"alpha", c.sim.alpha},
        {"beta", c.sim.beta},
        {"sigma_lp", c.sim.sigma_lp},
        {"seed", c.sim.seed}}},
      {"splits", {{"train", c.splits.train}, {"valid", c.splits.valid}, {"test", c.splits.test}}},
      {"corpus_seed", c.corpus_seed},
      {"nlu", nlu},
      {"nlu_train",
       {{"epochs", c.nlu_train.epochs},
        {"batch_size", c.nlu_train.batch_size},
        {"lr", c.nlu_train.lr},
        {"clip_norm", c.nlu_train.clip_norm},
        {"patience", c.nlu_train.patience}}},
      {"score_encoder",
       {{"lstm_dim", c.score_encoder.lstm_dim},
        {"heads", c.score_encoder.heads},
        {"budget", c.score_encoder.budget}}},
      {"score_train",
       {{"objective", std::string(scoreenc::ObjectiveName(c.score_train.objective))},
        {"w1", c.score_train.w1},
        {"w0", c.score_train.w0},
        {"epochs", c.score_train.epochs},
        {"batch_size", c.score_train.batch_size},
        {"lr", c.score_train.lr},
        {"clip_norm", c.score_train.clip_norm},
        {"balance_target", c.balance_target}}},
      {"experiment",
       {{"mode", std::string(mcat::ModeName(c.nlu.mode))},
        {"score_source", std::string(ScoreKindName(c.score_source))},
        {"constant_score", c.constant_score},
        {"flip_ratio", c.flip_ratio},
        {"mcat_mode", std::string(mcat::ModeName(c.mcat_mode))},
        {"seeds", c.seeds},
        {"modes", modes},
        {"flip_ratios", c.flip_ratios},
        {"presets", presets}}},
      {"out_dir", c.out_dir.string()},
      {"cache_dir", c.cache_dir.string()},
  };
}

RunConfig FromJson(const json& j) {
  RunConfig c;
  Section root(j, "config");
  if (const json* s = root.Child("sim")) {
    Section sec(*s, "sim");
    sec.Get("p_sub", c.sim.p_sub);
    sec.Get("p_del", c.sim.p_del);
    sec.Get("p_ins", c.sim.p_ins);
    sec.Get("dim", c.sim.dim);
    sec.Get("frames_min", c.sim.frames_min);
    sec.Get("frames_max", c.sim.frames_max);
    sec.Get("sigma_aud", c.sim.sigma_aud);
    sec.Get("alpha", c.sim.alpha);
    sec.Get("beta", c.sim.beta);
    sec.Get("sigma_lp", c.sim.sigma_lp);
    sec.Get("seed", c.sim.seed);
    sec.Done();
  }
  if (const json* s = root.Child("splits")) {
    Section sec(*s, "splits");
    sec.Get("train", c.splits.train);
    sec.Get("valid", c.splits.valid);
    sec.Get("test", c.splits.test);
    sec.Done();
  }
  root.Get("corpus_seed", c.corpus_seed);
  c.nlu.input_dim = c.sim.dim;
  if (const json* s = root.Child("nlu")) {
    Section sec(*s, "nlu");
    sec.Get("input_dim", c.nlu.input_dim);
    sec.Get("dim", c.nlu.dim);
    sec.Get("fusion_heads", c.nlu.fusion_heads);
    sec.Get("pool_layers", c.nlu.pool_layers);
    sec.Get("pool_heads", c.nlu.pool_heads);
    sec.Get("decoder_heads", c.nlu.decoder_heads);
    sec.Get("pointer_heads", c.nlu.pointer_heads);
    sec.Get("ff_dim", c.nlu.ff_dim);
    sec.Get("max_decode_len", c.nlu.max_decode_len);
    sec.Get("literal_eq5_softmax", c.nlu.literal_eq5_softmax);
    sec.Done();
  }
  if (const json* s = root.Child("nlu_train")) {
    Section sec(*s, "nlu_train");
    sec.Get("epochs", c.nlu_train.epochs);
    sec.Get("batch_size", c.nlu_train.batch_size);
    sec.Get("lr", c.nlu_train.lr);
    sec.Get("clip_norm", c.nlu_train.clip_norm);
    sec.Get("patience", c.nlu_train.patience);
    sec.Done();
  }
  c.score_encoder.input_dim = c.sim.dim;
  if (const json* s = root.Child("score_encoder")) {
    Section sec(*s, "score_encoder");
    sec.Get("lstm_dim", c.score_encoder.lstm_dim);
    sec.Get("heads", c.score_encoder.heads);
    sec.Get("budget", c.score_encoder.budget);
    sec.Done();
  }
  if (const json* s = root.Child("score_train")) {
    Section sec(*s, "score_train");
    std::string objective(scoreenc::ObjectiveName(c.score_train.objective));
    sec.Get("objective", objective);
    c.score_train.objective = scoreenc::ParseObjective(objective);
    sec.Get("w1", c.score_train.w1);
    sec.Get("w0", c.score_train.w0);
    sec.Get("epochs", c.score_train.epochs);
    sec.Get("batch_size", c.score_train.batch_size);
    sec.Get("lr", c.score_train.lr);
    sec.Get("clip_norm", c.score_train.clip_norm);
    sec.Get("balance_target", c.balance_target);
    sec.Done();
  }
  if (const json* s = root.Child("experiment")) {
    Section sec(*s, "experiment");
    std::string mode(mcat::ModeName(c.nlu.mode));
    sec.Get("mode", mode);
    c.nlu.mode = mcat::ParseMode(mode);
    std::string source(ScoreKindName(c.score_source));
    sec.Get("score_source", source);
    c.score_source = ParseScoreKind(source);
    sec.Get("constant_score", c.constant_score);
    sec.Get("flip_ratio", c.flip_ratio);
    std::string mcat_mode(mcat::ModeName(c.mcat_mode));
    sec.Get("mcat_mode", mcat_mode);
    c.mcat_mode = mcat::ParseMode(mcat_mode);
    sec.Get("seeds", c.seeds);
    std::vector<std::string> modes;
    sec.Get("modes", modes);
    if (!modes.empty()) {
      c.modes.clear();
      for (const auto& m : modes) c.modes.push_back(mcat::ParseMode(m));
    }
    sec.Get("flip_ratios", c.flip_ratios);
    if (const json* ps = sec.Child("presets")) {
      if (!ps->is_array()) throw ConfigError("experiment.presets must be an array");
      c.presets.clear();
      for (const auto& p : *ps) {
        NoisePreset np;
        Section ps_sec(p, "experiment.presets[]");
        ps_sec.Get("name", np.name);
        ps_sec.Get("p_sub", np.p_sub);
        ps_sec.Get("p_del", np.p_del);
        ps_sec.Get("p_ins", np.p_ins);
        c.presets.push_back(np);
        ps_sec.Done();
      }
    }
    sec.Done();
  }
  std::string out_dir = c.out_dir.string(), cache_dir = c.cache_dir.string();
  root.Get("out_dir", out_dir);
  root.Get("cache_dir", cache_dir);
  c.out_dir = out_dir;
  c.cache_dir = cache_dir;
  root.Done();
  ValidateRunConfig(c);
  return c;
}

RunConfig LoadRunConfig(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  json j;
  if (path.extension() == ".toml") {
    try {
      j = TomlToJson(toml::parse(buf.str(), path.string()));
    } catch (const toml::parse_error& e) {
      throw ConfigError(path.string() + ": " + std::string(e.description()));
    }
  } else {
    try {
      j = json::parse(buf.str());
    } catch (const json::exception& e) {
      throw ConfigError(path.string() + ": " + e.what());
    }
  }
  return FromJson(j);
}

std::string HashJson(const json& j) { return ToHex(HashString(j.dump())); }

json ResultConfigJson(const RunConfig& cfg) {
  json j = ToJson(cfg);
  j.erase("out_dir");
  j.erase("cache_dir");
  return j;
}

std::string ConfigHash(const RunConfig& cfg) { return HashJson(ResultConfigJson(cfg)); }

}  // namespace slu::harness
