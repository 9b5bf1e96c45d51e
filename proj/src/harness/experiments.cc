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

#include "slu/harness/experiments.h"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <tuple>

#include <toml.hpp>

#include "slu/mcat/score.h"
#include "slu/nn/checkpoint.h"
#include "slu/random.h"
#include "slu/semtext/metrics.h"
#include "slu/version.h"

namespace slu::harness {

using deliberation::NluModel;
using mcat::IntegrationMode;
using nlohmann::json;

namespace {

std::string Fixed(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

std::ofstream OpenOut(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

void WriteConfigHeader(std::ostream& out, const RunConfig& config) {
  out << "# config " << ResultConfigJson(config).dump() << "\n";
  out << "# config_hash " << ConfigHash(config) << "\n";
}

double Ratio(std::size_t num, std::size_t den) {
  return den ? static_cast<double>(num) / static_cast<double>(den) : 0.0;
}

std::string ModeStr(IntegrationMode m) { return std::string(mcat::ModeName(m)); }

}  // namespace

std::size_t CellResult::n_err() const {
  return static_cast<std::size_t>(std::count_if(utterances.begin(), utterances.end(),
                                                [](const UtteranceResult& u) { return u.label == 0; }));
}

std::size_t CellResult::n_ok() const { return utterances.size() - n_err(); }

double CellResult::em_all() const {
  std::size_t hits = 0;
  for (const auto& u : utterances) hits += static_cast<std::size_t>(u.em);
  return Ratio(hits, utterances.size());
}

double CellResult::em_err_subset() const {
  std::size_t hits = 0;
  for (const auto& u : utterances) hits += u.label == 0 ? static_cast<std::size_t>(u.em) : 0;
  return Ratio(hits, n_err());
}

double CellResult::em_ok_subset() const {
  std::size_t hits = 0;
  for (const auto& u : utterances) hits += u.label == 1 ? static_cast<std::size_t>(u.em) : 0;
  return Ratio(hits, n_ok());
}

MeanStd Summarize(const std::vector<double>& values) {
  MeanStd out;
  if (values.empty()) return out;
  double sum = 0.0;
  for (double v : values) sum += v;
  out.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - out.mean) * (v - out.mean);
    out.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return out;
}

std::vector<const CellResult*> ExperimentResult::Select(const std::string& mode,
                                                        const std::string& preset,
                                                        const std::string& score_source) const {
  std::vector<const CellResult*> out;
  for (const auto& c : cells) {
    if (c.mode == mode && c.preset == preset && c.score_source == score_source && !c.flip_ratio)
      out.push_back(&c);
  }
  std::sort(out.begin(), out.end(), [](const CellResult* a, const CellResult* b) { return a->seed < b->seed; });
  return out;
}

MeanStd ExperimentResult::EmAll(const std::string& mode, const std::string& preset,
                                const std::string& score_source) const {
  std::vector<double> v;
  for (const auto* c : Select(mode, preset, score_source)) v.push_back(c->em_all());
  return Summarize(v);
}

MeanStd ExperimentResult::EmErr(const std::string& mode, const std::string& preset,
                                const std::string& score_source) const {
  std::vector<double> v;
  for (const auto* c : Select(mode, preset, score_source)) v.push_back(c->em_err_subset());
  return Summarize(v);
}

MeanStd ExperimentResult::EmOk(const std::string& mode, const std::string& preset,
                               const std::string& score_source) const {
  std::vector<double> v;
  for (const auto* c : Select(mode, preset, score_source)) v.push_back(c->em_ok_subset());
  return Summarize(v);
}

Workbench::Workbench(RunConfig config)
    : config_(std::move(config)),
      grammar_(simasr::DefaultGrammar()),
      vocab_(MakeNluVocab(grammar_)) {
  ValidateRunConfig(config_);
}

void Workbench::Log(const std::string& line) const {
  if (log_) log_(line);
}

simasr::SimConfig Workbench::PresetSim(const std::string& preset) const {
  simasr::SimConfig sim = config_.sim;
  if (preset.empty()) return sim;
  for (const auto& p : config_.presets) {
    if (p.name == preset) {
      sim.p_sub = p.p_sub;
      sim.p_del = p.p_del;
      sim.p_ins = p.p_ins;
      return sim;
    }
  }
  throw ConfigError("unknown preset '" + preset + "'");
}

Workbench::PresetData& Workbench::Preset(const std::string& preset) {
  auto it = presets_.find(preset);
  if (it != presets_.end()) return it->second;
  PresetData d;
  d.asr = std::make_unique<simasr::FrozenAsr>(simasr::GrammarVocabulary(grammar_), PresetSim(preset));
  return presets_.emplace(preset, std::move(d)).first->second;
}

const simasr::FrozenAsr& Workbench::Asr(const std::string& preset) { return *Preset(preset).asr; }

const simasr::Corpus& Workbench::Corpus(const std::string& preset) {
  PresetData& d = Preset(preset);
  if (!d.corpus) {
    Log("building corpus" + (preset.empty() ? std::string() : " for " + preset));
    d.corpus = std::make_unique<simasr::Corpus>(
        simasr::BuildCorpus(grammar_, *d.asr, config_.splits, config_.corpus_seed));
  }
  return *d.corpus;
}

std::vector<std::optional<double>> Workbench::Scores(ScoreKind kind, const simasr::Dataset& data,
                                                     const scoreenc::ScoreEncoder* encoder) const {
  std::vector<std::optional<double>> out(data.size());
  switch (kind) {
    case ScoreKind::kNone:
      break;
    case ScoreKind::kOracle:
      for (std::size_t i = 0; i < data.size(); ++i) out[i] = OracleScoreOf(data[i]);
      break;
    case ScoreKind::kOracleBinary:
      for (std::size_t i = 0; i < data.size(); ++i) out[i] = static_cast<double>(data[i].asr.label);
      break;
    case ScoreKind::kEncoder: {
      if (!encoder) throw ConfigError("encoder scores need a trained score encoder");
      const auto s = encoder->ScoreAll(data);
      for (std::size_t i = 0; i < data.size(); ++i) out[i] = s[i];
      break;
    }
    case ScoreKind::kConstant:
      for (auto& s : out) s = config_.constant_score;
      break;
  }
  return out;
}

std::filesystem::path Workbench::CachePath(const std::string& key) const {
  if (config_.cache_dir.empty()) return {};
  return config_.cache_dir / key;
}

const scoreenc::ScoreEncoder& Workbench::Encoder(const std::string& preset, uint64_t seed) {
  const json full = ToJson(config_);
  json sim = full.at("sim");
  const auto ps = PresetSim(preset);
  sim["p_sub"] = ps.p_sub;
  sim["p_del"] = ps.p_del;
  sim["p_ins"] = ps.p_ins;
  const json cell = {{"kind", "score_encoder"},     {"sim", sim},
                     {"splits", full.at("splits")}, {"corpus_seed", config_.corpus_seed},
                     {"score_encoder", full.at("score_encoder")},
                     {"score_train", full.at("score_train")},
                     {"seed", seed},                {"version", kVersion}};
  const std::string key = "score-" + HashJson(cell);
  if (auto it = encoders_.find(key); it != encoders_.end()) return *it->second;

  const auto path = CachePath(key);
  std::unique_ptr<scoreenc::ScoreEncoder> enc;
  if (!path.empty() && std::filesystem::exists(path.string() + ".json")) {
    enc = std::make_unique<scoreenc::ScoreEncoder>(scoreenc::ScoreEncoder::Load(path, key));
    Log("loaded score encoder " + key);
  } else {
    const auto& asr = Asr(preset);
    const auto& corpus = Corpus(preset);
    const auto train = simasr::BalanceAugment(corpus.train, config_.balance_target, asr,
                                              DeriveSeed(seed, "balance-train"));
    const auto valid = simasr::BalanceAugment(corpus.valid, config_.balance_target, asr,
                                              DeriveSeed(seed, "balance-valid"));
    enc = std::make_unique<scoreenc::ScoreEncoder>(config_.score_encoder, DeriveSeed(seed, "score-init"));
    scoreenc::ScoreTrainConfig tc = config_.score_train;
    tc.seed = seed;
    const auto r = enc->Train(train, valid, tc);
    Log("trained score encoder " + key + " (" + (preset.empty() ? "default" : preset) +
        ", seed " + std::to_string(seed) + "): valid accuracy " + Fixed(r.heldout.accuracy, 3) +
        ", auc " + Fixed(r.heldout.auc, 3));
    if (!path.empty()) enc->Save(path, key, {{"cell", cell}});
  }
  artifacts_[key] = {{"kind", "score_encoder"},
                     {"preset", preset.empty() ? "default" : preset},
                     {"seed", seed},
                     {"checkpoint_id", enc->Id(key)}};
  return *encoders_.emplace(key, std::move(enc)).first->second;
}

const NluModel& Workbench::Nlu(const std::string& preset, IntegrationMode mode, ScoreKind train_scores,
                               uint64_t seed) {
  if (!mcat::UsesScore(mode)) train_scores = ScoreKind::kNone;
  if (mcat::UsesScore(mode) && train_scores == ScoreKind::kNone)
    throw ConfigError(ModeStr(mode) + " needs a score source");
  const json full = ToJson(config_);
  json sim = full.at("sim");
  const auto ps = PresetSim(preset);
  sim["p_sub"] = ps.p_sub;
  sim["p_del"] = ps.p_del;
  sim["p_ins"] = ps.p_ins;
  deliberation::NluConfig nc = config_.nlu;
  nc.mode = mode;
  json cell = {{"kind", "nlu"},
               {"sim", sim},
               {"splits", full.at("splits")},
               {"corpus_seed", config_.corpus_seed},
               {"nlu", deliberation::NluConfigToJson(nc)},
               {"nlu_train", full.at("nlu_train")},
               {"train_scores", std::string(ScoreKindName(train_scores))},
               {"seed", seed},
               {"version", kVersion}};
  if (train_scores == ScoreKind::kConstant) cell["constant_score"] = config_.constant_score;
  if (train_scores == ScoreKind::kEncoder) {
    cell["score_encoder"] = full.at("score_encoder");
    cell["score_train"] = full.at("score_train");
  }
  const std::string key = "nlu-" + HashJson(cell);
  if (auto it = nlu_.find(key); it != nlu_.end()) return *it->second;

  const auto path = CachePath(key);
  std::unique_ptr<NluModel> model;
  const std::string label = ModeStr(mode) + "/" + std::string(ScoreKindName(train_scores)) + " (" +
                            (preset.empty() ? "default" : preset) + ", seed " + std::to_string(seed) + ")";
  if (!path.empty() && std::filesystem::exists(path.string() + ".json")) {
    model = std::make_unique<NluModel>(NluModel::Load(path, key));
    Log("loaded nlu " + label);
  } else {
    const scoreenc::ScoreEncoder* enc =
        train_scores == ScoreKind::kEncoder ? &Encoder(preset, seed) : nullptr;
    const auto& corpus = Corpus(preset);
    const auto train = MakeUnionExamples(corpus.train, Asr(preset), vocab_,
                                         Scores(train_scores, corpus.train, enc));
    const auto valid = MakeHypExamples(corpus.valid, vocab_, Scores(train_scores, corpus.valid, enc));
    model = std::make_unique<NluModel>(nc, vocab_, DeriveSeed(seed, "nlu-init"));
    deliberation::NluTrainConfig tc = config_.nlu_train;
    tc.seed = seed;
    const auto r = model->Train(train, valid, tc, [&](int epoch, double tl, double vl) {
      Log("  " + label + " epoch " + std::to_string(epoch) + " train " + Fixed(tl, 4) + " valid " +
          Fixed(vl, 4));
    });
    Log("trained nlu " + label + ", best epoch " + std::to_string(r.best_epoch));
    if (!path.empty()) model->Save(path, key, {{"cell", cell}});
  }
  artifacts_[key] = {{"kind", "nlu"},
                     {"mode", ModeStr(mode)},
                     {"train_scores", std::string(ScoreKindName(train_scores))},
                     {"preset", preset.empty() ? "default" : preset},
                     {"seed", seed},
                     {"checkpoint_id", nn::CheckpointId(model->params(), key)}};
  return *nlu_.emplace(key, std::move(model)).first->second;
}

CellResult Workbench::Evaluate(const NluModel& model, const simasr::Dataset& data,
                               const std::vector<std::optional<double>>& scores) const {
  if (scores.size() != data.size()) throw ShapeMismatch("one score per record expected");
  const bool uses = mcat::UsesScore(model.config().mode);
  CellResult cell;
  cell.mode = ModeStr(model.config().mode);
  cell.utterances.reserve(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto& r = data[i];
    const std::optional<double> s = uses ? scores[i] : std::nullopt;
    UtteranceResult u;
    u.id = r.utt.id;
    u.label = r.asr.label;
    u.prediction = model.GreedyDecode(r.asr.e_txt, r.asr.e_aud, r.asr.hyp_words, s);
    u.em = semtext::ExactMatch(u.prediction, r.utt.parse.ToString()) ? 1 : 0;
    u.score_used = s;
    cell.utterances.push_back(std::move(u));
  }
  return cell;
}

namespace {

CellResult Tag(CellResult cell, const std::string& preset, ScoreKind source, uint64_t seed) {
  cell.preset = preset;
  cell.score_source = std::string(ScoreKindName(source));
  cell.seed = seed;
  return cell;
}

std::string Em(const CellResult& c) {
  return "em " + Fixed(c.em_all(), 4) + " err " + Fixed(c.em_err_subset(), 4) + " ok " +
         Fixed(c.em_ok_subset(), 4);
}

}  // namespace

ExperimentResult RunIntegrationStudy(Workbench& bench) {
  ExperimentResult result;
  const auto& test = bench.Corpus().test;
  for (IntegrationMode mode : bench.config().modes) {
    const ScoreKind source = mcat::UsesScore(mode) ? ScoreKind::kOracle : ScoreKind::kNone;
    const auto scores = bench.Scores(source, test);
    for (uint64_t seed : bench.config().seeds) {
      const auto& model = bench.Nlu("", mode, source, seed);
      result.cells.push_back(Tag(bench.Evaluate(model, test, scores), "default", source, seed));
      bench.Log(ModeStr(mode) + " seed " + std::to_string(seed) + ": " + Em(result.cells.back()));
    }
  }
  return result;
}

std::optional<double> Breakeven(const std::vector<double>& ratios, const std::vector<double>& em,
                                double baseline) {
  if (ratios.size() != em.size()) throw ShapeMismatch("ratios and EMs differ in length");
  for (std::size_t i = 0; i < ratios.size(); ++i) {
    if (em[i] > baseline) continue;
    if (i == 0) return ratios[0];
    const double t = (em[i - 1] - baseline) / (em[i - 1] - em[i]);
    return ratios[i - 1] + t * (ratios[i] - ratios[i - 1]);
  }
  return std::nullopt;
}

FlipCurve RunFlipCurve(Workbench& bench) {
  const auto& cfg = bench.config();
  FlipCurve curve;
  const auto& test = bench.Corpus().test;
  std::vector<double> labels;
  for (const auto& r : test) labels.push_back(static_cast<double>(r.asr.label));

  std::vector<double> base_em;
  for (uint64_t seed : cfg.seeds) {
    const auto& model = bench.Nlu("", IntegrationMode::kBaseline, ScoreKind::kNone, seed);
    curve.cells.cells.push_back(
        Tag(bench.Evaluate(model, test, bench.Scores(ScoreKind::kNone, test)), "default",
            ScoreKind::kNone, seed));
    base_em.push_back(curve.cells.cells.back().em_all());
    bench.Log("baseline seed " + std::to_string(seed) + ": " + Em(curve.cells.cells.back()));
  }
  const MeanStd base = Summarize(base_em);

  std::vector<double> ratios = cfg.flip_ratios;
  std::sort(ratios.begin(), ratios.end());
  ratios.erase(std::unique(ratios.begin(), ratios.end()), ratios.end());
  std::vector<double> means;
  for (double ratio : ratios) {
    std::vector<double> em;
    double accuracy = 0.0;
    for (uint64_t seed : cfg.seeds) {
      const auto& model = bench.Nlu("", cfg.mcat_mode, ScoreKind::kOracleBinary, seed);
      const auto flipped = mcat::FlipScores(
          labels, ratio, DeriveSeed(seed, "flip", static_cast<uint64_t>(std::llround(ratio * 1e6))));
      std::vector<std::optional<double>> scores(flipped.begin(), flipped.end());
      std::size_t agree = 0;
      for (std::size_t i = 0; i < labels.size(); ++i) agree += flipped[i] == labels[i];
      accuracy += Ratio(agree, labels.size());
      CellResult cell = Tag(bench.Evaluate(model, test, scores), "default", ScoreKind::kOracleBinary, seed);
      cell.flip_ratio = ratio;
      em.push_back(cell.em_all());
      bench.Log("flip " + Fixed(ratio, 2) + " seed " + std::to_string(seed) + ": " + Em(cell));
      curve.cells.cells.push_back(std::move(cell));
    }
    FlipPoint p;
    p.ratio = ratio;
    p.em = Summarize(em);
    p.baseline_em = base;
    p.scores_accuracy = accuracy / static_cast<double>(cfg.seeds.size());
    means.push_back(p.em.mean);
    curve.points.push_back(p);
  }
  curve.breakeven = Breakeven(ratios, means, base.mean);
  return curve;
}

ExperimentResult RunQualitySweep(Workbench& bench) {
  const auto& cfg = bench.config();
  ExperimentResult result;
  for (const auto& preset : cfg.presets) {
    const auto& test = bench.Corpus(preset.name).test;
    const auto oracle = bench.Scores(ScoreKind::kOracle, test);
    for (uint64_t seed : cfg.seeds) {
      const auto& base = bench.Nlu(preset.name, IntegrationMode::kBaseline, ScoreKind::kNone, seed);
      result.cells.push_back(Tag(bench.Evaluate(base, test, bench.Scores(ScoreKind::kNone, test)),
                                 preset.name, ScoreKind::kNone, seed));
      const auto& with_oracle = bench.Nlu(preset.name, cfg.mcat_mode, ScoreKind::kOracle, seed);
      result.cells.push_back(
          Tag(bench.Evaluate(with_oracle, test, oracle), preset.name, ScoreKind::kOracle, seed));
      const auto& enc = bench.Encoder(preset.name, seed);
      const auto& mcat = bench.Nlu(preset.name, cfg.mcat_mode, ScoreKind::kEncoder, seed);
      result.cells.push_back(Tag(bench.Evaluate(mcat, test, bench.Scores(ScoreKind::kEncoder, test, &enc)),
                                 preset.name, ScoreKind::kEncoder, seed));
      const auto n = result.cells.size();
      bench.Log(preset.name + " seed " + std::to_string(seed) + ": baseline " +
                Fixed(result.cells[n - 3].em_all(), 4) + " oracle " + Fixed(result.cells[n - 2].em_all(), 4) +
                " mcat " + Fixed(result.cells[n - 1].em_all(), 4));
    }
  }
  return result;
}

void WriteCellsCsv(const std::filesystem::path& path, const ExperimentResult& result,
                   const RunConfig& config) {
  auto out = OpenOut(path);
  WriteConfigHeader(out, config);
  out << "mode,preset,seed,em_all,em_err_subset,em_ok_subset,n_err,n_ok,score_source,flip_ratio\n";
  for (const auto& c : result.cells) {
    out << c.mode << ',' << c.preset << ',' << c.seed << ',' << Fixed(c.em_all()) << ','
        << Fixed(c.em_err_subset()) << ',' << Fixed(c.em_ok_subset()) << ',' << c.n_err() << ','
        << c.n_ok() << ',' << c.score_source << ',' << (c.flip_ratio ? Fixed(*c.flip_ratio, 4) : "")
        << '\n';
  }
}

void WriteSummaryCsv(const std::filesystem::path& path, const ExperimentResult& result,
                     const RunConfig& config) {
  auto out = OpenOut(path);
  WriteConfigHeader(out, config);
  out << "mode,preset,score_source,n_seeds,em_all_mean,em_all_std,em_err_subset_mean,"
         "em_err_subset_std,em_ok_subset_mean,em_ok_subset_std\n";
  std::vector<std::tuple<std::string, std::string, std::string>> groups;
  for (const auto& c : result.cells) {
    if (c.flip_ratio) continue;
    auto g = std::make_tuple(c.mode, c.preset, c.score_source);
    if (std::find(groups.begin(), groups.end(), g) == groups.end()) groups.push_back(g);
  }
  for (const auto& [mode, preset, source] : groups) {
    const auto all = result.EmAll(mode, preset, source);
    const auto err = result.EmErr(mode, preset, source);
    const auto ok = result.EmOk(mode, preset, source);
    out << mode << ',' << preset << ',' << source << ',' << result.Select(mode, preset, source).size()
        << ',' << Fixed(all.mean) << ',' << Fixed(all.std) << ',' << Fixed(err.mean) << ','
        << Fixed(err.std) << ',' << Fixed(ok.mean) << ',' << Fixed(ok.std) << '\n';
  }
}

void WriteFlipCsv(const std::filesystem::path& path, const FlipCurve& curve, const RunConfig& config) {
  auto out = OpenOut(path);
  WriteConfigHeader(out, config);
  out << "# breakeven_ratio " << (curve.breakeven ? Fixed(*curve.breakeven, 4) : "none") << "\n";
  out << "ratio,em_mean,em_std,baseline_em_mean,baseline_em_std,scores_accuracy\n";
  for (const auto& p : curve.points) {
    out << Fixed(p.ratio, 4) << ',' << Fixed(p.em.mean) << ',' << Fixed(p.em.std) << ','
        << Fixed(p.baseline_em.mean) << ',' << Fixed(p.baseline_em.std) << ','
        << Fixed(p.scores_accuracy) << '\n';
  }
}

void WriteFlipSvg(const std::filesystem::path& path, const FlipCurve& curve) {
  if (curve.points.empty()) return;
  const double w = 480, h = 320, left = 60, right = 20, top = 20, bottom = 50;
  double lo = 1.0, hi = 0.0;
  for (const auto& p : curve.points) {
    lo = std::min({lo, p.em.mean - p.em.std, p.baseline_em.mean});
    hi = std::max({hi, p.em.mean + p.em.std, p.baseline_em.mean});
  }
  lo = std::max(0.0, lo - 0.02);
  hi = std::min(1.0, hi + 0.02);
  if (hi <= lo) hi = lo + 0.01;
  auto x = [&](double r) { return left + r * (w - left - right); };
  auto y = [&](double v) { return top + (hi - v) / (hi - lo) * (h - top - bottom); };
  auto out = OpenOut(path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<line x1=\"" << left << "\" y1=\"" << h - bottom << "\" x2=\"" << w - right << "\" y2=\""
      << h - bottom << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << h - bottom
      << "\" stroke=\"black\"/>\n";
  for (double r : {0.0, 0.25, 0.5, 0.75, 1.0}) {
    out << "<text x=\"" << x(r) << "\" y=\"" << h - bottom + 18 << "\" font-size=\"11\" "
        << "text-anchor=\"middle\">" << Fixed(r * 100, 0) << "%</text>\n";
  }
  for (int k = 0; k <= 4; ++k) {
    const double v = lo + (hi - lo) * k / 4.0;
    out << "<text x=\"" << left - 6 << "\" y=\"" << y(v) + 4 << "\" font-size=\"11\" "
        << "text-anchor=\"end\">" << Fixed(v * 100, 1) << "</text>\n";
  }
  out << "<text x=\"" << (left + w - right) / 2 << "\" y=\"" << h - 12
      << "\" font-size=\"12\" text-anchor=\"middle\">flip ratio</text>\n";
  const double b = curve.points.front().baseline_em.mean;
  out << "<line x1=\"" << x(0) << "\" y1=\"" << y(b) << "\" x2=\"" << x(1) << "\" y2=\"" << y(b)
      << "\" stroke=\"gray\" stroke-dasharray=\"5,4\"/>\n";
  out << "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"2\" points=\"";
  for (const auto& p : curve.points) out << x(p.ratio) << ',' << y(p.em.mean) << ' ';
  out << "\"/>\n";
  for (const auto& p : curve.points) {
    out << "<circle cx=\"" << x(p.ratio) << "\" cy=\"" << y(p.em.mean) << "\" r=\"3\" fill=\"steelblue\"/>\n";
  }
  out << "</svg>\n";
}

void WriteUtterances(const std::filesystem::path& path, const ExperimentResult& result) {
  auto out = OpenOut(path);
  for (const auto& c : result.cells) {
    for (const auto& u : c.utterances) {
      json j = {{"mode", c.mode},   {"preset", c.preset}, {"score_source", c.score_source},
                {"seed", c.seed},   {"id", u.id},         {"label", u.label},
                {"em", u.em},       {"score_used", nullptr}, {"prediction", u.prediction}};
      if (u.score_used) j["score_used"] = *u.score_used;
      if (c.flip_ratio) j["flip_ratio"] = *c.flip_ratio;
      out << j.dump() << '\n';
    }
  }
}

void WriteManifest(const std::filesystem::path& dir, const std::string& command, const RunConfig& config,
                   const json& artifacts, const json& extra) {
  json versions = {
      {"slu", kVersion},
      {"checkpoint_format", "slu-checkpoint-v1"},
      {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                    std::to_string(EIGEN_MINOR_VERSION)},
      {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                            std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                            std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
      {"tomlplusplus", std::to_string(TOML_LIB_MAJOR) + "." + std::to_string(TOML_LIB_MINOR) + "." +
                           std::to_string(TOML_LIB_PATCH)}};
  json m = {{"command", command},
            {"config", ToJson(config)},
            {"config_hash", ConfigHash(config)},
            {"seeds", config.seeds},
            {"versions", versions},
            {"artifacts", artifacts}};
  if (extra.is_object()) {
    for (const auto& [k, v] : extra.items()) {
      if (k == "versions") {
        for (const auto& [vk, vv] : v.items()) m["versions"][vk] = vv;
      } else {
        m[k] = v;
      }
    }
  }
  auto out = OpenOut(dir / "manifest.json");
  out << m.dump(2) << '\n';
}

}  // namespace slu::harness
