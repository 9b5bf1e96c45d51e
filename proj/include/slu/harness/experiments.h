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

#ifndef SLU_HARNESS_EXPERIMENTS_H_
#define SLU_HARNESS_EXPERIMENTS_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "slu/deliberation/model.h"
#include "slu/harness/config.h"
#include "slu/harness/pipeline.h"
#include "slu/scoreenc/encoder.h"
#include "slu/simasr/asr.h"
#include "slu/simasr/grammar.h"

namespace slu::harness {

// Per-utterance outcome of one evaluation.
struct UtteranceResult {
  std::string id;
  int label = 0;
  int em = 0;
  std::optional<double> score_used;
  std::string prediction;
};

struct CellResult {
  std::string mode;
  std::string preset;
  std::string score_source;
  uint64_t seed = 0;
  std::optional<double> flip_ratio;
  std::vector<UtteranceResult> utterances;

  std::size_t n_err() const;
  std::size_t n_ok() const;
  double em_all() const;
  double em_err_subset() const;
  double em_ok_subset() const;
};

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation; 0 for one value
};
MeanStd Summarize(const std::vector<double>& values);

struct ExperimentResult {
  std::vector<CellResult> cells;

  // Cells with the given mode, preset and score source, in seed order.
  std::vector<const CellResult*> Select(const std::string& mode, const std::string& preset,
                                        const std::string& score_source) const;
  MeanStd EmAll(const std::string& mode, const std::string& preset,
                const std::string& score_source) const;
  MeanStd EmErr(const std::string& mode, const std::string& preset,
                const std::string& score_source) const;
  MeanStd EmOk(const std::string& mode, const std::string& preset,
               const std::string& score_source) const;
};

struct FlipPoint {
  double ratio = 0.0;
  MeanStd em;
  MeanStd baseline_em;
  double scores_accuracy = 0.0;
};

struct FlipCurve {
  std::vector<FlipPoint> points;
  ExperimentResult cells;  // baseline cells and one cell per (ratio, seed)
  // Interpolated ratio where the curve meets the baseline mean; empty when
  // it never drops to the baseline within the probed ratios.
  std::optional<double> breakeven;
};

// Corpus, recognizer and trained-model access for one configuration. Models
// are cached in memory and, with a cache directory, on disk by cell hash.
class Workbench {
 public:
  explicit Workbench(RunConfig config);

  const RunConfig& config() const { return config_; }
  const simasr::GrammarConfig& grammar() const { return grammar_; }
  const deliberation::NluVocab& vocab() const { return vocab_; }

  // The configured channel is used for an empty preset name.
  const simasr::FrozenAsr& Asr(const std::string& preset = "");
  const simasr::Corpus& Corpus(const std::string& preset = "");

  std::vector<std::optional<double>> Scores(ScoreKind kind, const simasr::Dataset& data,
                                            const scoreenc::ScoreEncoder* encoder = nullptr) const;

  const scoreenc::ScoreEncoder& Encoder(const std::string& preset, uint64_t seed);
  // `train_scores` selects the scores of hypothesis examples during training.
  const deliberation::NluModel& Nlu(const std::string& preset, mcat::IntegrationMode mode,
                                    ScoreKind train_scores, uint64_t seed);

  CellResult Evaluate(const deliberation::NluModel& model, const simasr::Dataset& data,
                      const std::vector<std::optional<double>>& scores) const;

  // Progress lines go here; empty discards them.
  void SetLog(std::function<void(const std::string&)> log) { log_ = std::move(log); }
  void Log(const std::string& line) const;

  // Checkpoint ids and cache keys of every model used so far.
  const nlohmann::json& Artifacts() const { return artifacts_; }

 private:
  struct PresetData {
    std::unique_ptr<simasr::FrozenAsr> asr;
    std::unique_ptr<simasr::Corpus> corpus;
  };
  simasr::SimConfig PresetSim(const std::string& preset) const;
  PresetData& Preset(const std::string& preset);
  std::filesystem::path CachePath(const std::string& key) const;

  RunConfig config_;
  simasr::GrammarConfig grammar_;
  deliberation::NluVocab vocab_;
  std::map<std::string, PresetData> presets_;
  std::map<std::string, std::unique_ptr<deliberation::NluModel>> nlu_;
  std::map<std::string, std::unique_ptr<scoreenc::ScoreEncoder>> encoders_;
  std::function<void(const std::string&)> log_;
  nlohmann::json artifacts_ = nlohmann::json::object();
};

// Every mode in config.modes, trained and evaluated with continuous oracle
// scores, one cell per seed.
ExperimentResult RunIntegrationStudy(Workbench& bench);

// Baseline cells plus the MCAT mode trained with binary oracle scores and
// evaluated with a flipped share of them.
FlipCurve RunFlipCurve(Workbench& bench);

// Per preset: baseline, oracle-score and encoder-score (MCAT) rows.
ExperimentResult RunQualitySweep(Workbench& bench);

// Linear interpolation of the first crossing of `em` below `baseline`.
std::optional<double> Breakeven(const std::vector<double>& ratios, const std::vector<double>& em,
                                double baseline);

// Result files. Each begins with `# config <json>` and `# config_hash <hex>`
// comment lines; run-location fields are left out so the bytes depend only
// on the configuration and seeds.
void WriteCellsCsv(const std::filesystem::path& path, const ExperimentResult& result,
                   const RunConfig& config);
void WriteSummaryCsv(const std::filesystem::path& path, const ExperimentResult& result,
                     const RunConfig& config);
void WriteFlipCsv(const std::filesystem::path& path, const FlipCurve& curve, const RunConfig& config);
void WriteFlipSvg(const std::filesystem::path& path, const FlipCurve& curve);
void WriteUtterances(const std::filesystem::path& path, const ExperimentResult& result);

// manifest.json: config, its hash, seeds, library versions and artifacts.
void WriteManifest(const std::filesystem::path& dir, const std::string& command,
                   const RunConfig& config, const nlohmann::json& artifacts,
                   const nlohmann::json& extra = {});

}  // namespace slu::harness

#endif  // SLU_HARNESS_EXPERIMENTS_H_
