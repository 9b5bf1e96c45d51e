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

// Command-line front end: corpus generation, training, evaluation and the
// three experiment runners.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "slu/errors.h"
#include "slu/harness/config.h"
#include "slu/harness/experiments.h"
#include "slu/harness/gradcheck_suite.h"
#include "slu/harness/pipeline.h"
#include "slu/mcat/score.h"
#include "slu/nn/checkpoint.h"
#include "slu/simasr/dataset_io.h"

namespace {

using namespace slu;
using nlohmann::json;

constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;

struct CommonOptions {
  std::string config;
  std::optional<uint64_t> seed;
  std::string out;
  std::string cache;
  std::string data;
  std::string model;
  std::string score_encoder;
  bool inline_embeddings = false;
  bool quiet = false;
};

harness::RunConfig LoadConfig(const CommonOptions& o) {
  harness::RunConfig cfg;
  if (!o.config.empty()) cfg = harness::LoadRunConfig(o.config);
  if (o.seed) cfg.seeds = {*o.seed};
  if (!o.out.empty()) cfg.out_dir = o.out;
  if (!o.cache.empty()) cfg.cache_dir = o.cache;
  harness::ValidateRunConfig(cfg);
  return cfg;
}

std::string Fmt(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

void Manifest(const harness::RunConfig& cfg, const std::string& command, const json& artifacts,
              json extra = json::object()) {
  extra["versions"] = {{"cli11", CLI11_VERSION}};
  harness::WriteManifest(cfg.out_dir, command, cfg, artifacts, extra);
}

harness::Workbench MakeBench(const harness::RunConfig& cfg, bool quiet) {
  harness::Workbench bench(cfg);
  if (!quiet) {
    const auto start = std::chrono::steady_clock::now();
    bench.SetLog([start](const std::string& line) {
      const double t = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      std::cerr << "[" << Fmt(t, 1) << "s] " << line << "\n";
    });
  }
  return bench;
}

simasr::Corpus CorpusFor(harness::Workbench& bench, const CommonOptions& o) {
  if (o.data.empty()) return bench.Corpus();
  const std::filesystem::path dir = o.data;
  return simasr::Corpus{simasr::ReadDataset(dir / "train.jsonl"), simasr::ReadDataset(dir / "valid.jsonl"),
                        simasr::ReadDataset(dir / "test.jsonl")};
}

int GenCorpus(const CommonOptions& o) {
  const auto cfg = LoadConfig(o);
  auto bench = MakeBench(cfg, o.quiet);
  const auto& corpus = bench.Corpus();
  const auto storage =
      o.inline_embeddings ? simasr::EmbeddingStorage::kInline : simasr::EmbeddingStorage::kSidecar;
  simasr::WriteDataset(cfg.out_dir / "train.jsonl", corpus.train, storage);
  simasr::WriteDataset(cfg.out_dir / "valid.jsonl", corpus.valid, storage);
  simasr::WriteDataset(cfg.out_dir / "test.jsonl", corpus.test, storage);
  json stats = json::object();
  for (const auto& [name, d] : {std::pair{"train", &corpus.train}, std::pair{"valid", &corpus.valid},
                                std::pair{"test", &corpus.test}}) {
    stats[name] = {{"records", d->size()}, {"label0_fraction", simasr::LabelZeroFraction(*d)}};
  }
  Manifest(cfg, "gen-corpus", json::object(), {{"splits", stats}});
  std::cout << "wrote " << corpus.train.size() << "/" << corpus.valid.size() << "/" << corpus.test.size()
            << " records to " << cfg.out_dir.string() << "\n";
  return 0;
}

int TrainScoreEncoder(const CommonOptions& o) {
  const auto cfg = LoadConfig(o);
  auto bench = MakeBench(cfg, o.quiet);
  const auto corpus = CorpusFor(bench, o);
  const uint64_t seed = cfg.seeds.front();
  const auto& asr = bench.Asr();
  const auto train =
      simasr::BalanceAugment(corpus.train, cfg.balance_target, asr, DeriveSeed(seed, "balance-train"));
  const auto heldout =
      simasr::BalanceAugment(corpus.test, cfg.balance_target, asr, DeriveSeed(seed, "balance-test"));
  scoreenc::ScoreEncoder enc(cfg.score_encoder, DeriveSeed(seed, "score-init"));
  auto tc = cfg.score_train;
  tc.seed = seed;
  const auto r = enc.Train(train, heldout, tc);
  const std::string hash = harness::ConfigHash(cfg);
  enc.Save(cfg.out_dir / "score_encoder", hash);
  {
    std::ofstream out(cfg.out_dir / "score_metrics.csv", std::ios::binary);
    out << "# config_hash " << hash << "\n";
    out << "seed,parameters,accuracy,precision,recall,auc,n_heldout,unbalanced_warning\n";
    out << seed << ',' << enc.NumParameters() << ',' << Fmt(r.heldout.accuracy, 6) << ','
        << Fmt(r.heldout.precision, 6) << ',' << Fmt(r.heldout.recall, 6) << ',' << Fmt(r.heldout.auc, 6)
        << ',' << r.heldout.n << ',' << (r.unbalanced_warning ? 1 : 0) << '\n';
  }
  Manifest(cfg, "train-score-encoder", {{"score_encoder", enc.Id(hash)}});
  std::cout << "score encoder: " << enc.NumParameters() << " parameters, held-out accuracy "
            << Fmt(r.heldout.accuracy) << ", auc " << Fmt(r.heldout.auc) << "\n";
  return 0;
}

std::optional<scoreenc::ScoreEncoder> MaybeEncoder(const harness::RunConfig& cfg, const CommonOptions& o) {
  if (cfg.score_source != harness::ScoreKind::kEncoder) return std::nullopt;
  if (o.score_encoder.empty()) throw ConfigError("score_source 'encoder' needs --score-encoder");
  return scoreenc::ScoreEncoder::Load(o.score_encoder);
}

int TrainNlu(const CommonOptions& o) {
  const auto cfg = LoadConfig(o);
  auto bench = MakeBench(cfg, o.quiet);
  const auto corpus = CorpusFor(bench, o);
  const uint64_t seed = cfg.seeds.front();
  const bool uses = mcat::UsesScore(cfg.nlu.mode);
  const auto kind = uses ? cfg.score_source : harness::ScoreKind::kNone;
  if (uses && kind == harness::ScoreKind::kNone)
    throw ConfigError(std::string(mcat::ModeName(cfg.nlu.mode)) + " needs a score_source");
  const auto enc = MaybeEncoder(cfg, o);
  const scoreenc::ScoreEncoder* enc_ptr = enc ? &*enc : nullptr;
  const auto train = harness::MakeUnionExamples(corpus.train, bench.Asr(), bench.vocab(),
                                                bench.Scores(kind, corpus.train, enc_ptr));
  const auto valid =
      harness::MakeHypExamples(corpus.valid, bench.vocab(), bench.Scores(kind, corpus.valid, enc_ptr));
  deliberation::NluModel model(cfg.nlu, bench.vocab(), DeriveSeed(seed, "nlu-init"));
  auto tc = cfg.nlu_train;
  tc.seed = seed;
  std::vector<std::tuple<int, double, double>> log;
  const auto r = model.Train(train, valid, tc, [&](int e, double tl, double vl) {
    log.emplace_back(e, tl, vl);
    if (!o.quiet) std::cerr << "epoch " << e << " train " << Fmt(tl) << " valid " << Fmt(vl) << "\n";
  });
  const std::string hash = harness::ConfigHash(cfg);
  model.Save(cfg.out_dir / "nlu", hash, {{"score_source", std::string(harness::ScoreKindName(kind))}});
  {
    std::ofstream out(cfg.out_dir / "train_log.csv", std::ios::binary);
    out << "# config " << harness::ResultConfigJson(cfg).dump() << "\n";
    out << "# config_hash " << hash << "\n";
    out << "epoch,train_loss,valid_loss\n";
    for (const auto& [e, tl, vl] : log) out << e << ',' << Fmt(tl, 6) << ',' << Fmt(vl, 6) << '\n';
  }
  Manifest(cfg, "train-nlu", {{"nlu", nn::CheckpointId(model.params(), hash)}},
           {{"best_epoch", r.best_epoch}, {"steps", r.steps}});
  std::cout << "nlu " << mcat::ModeName(cfg.nlu.mode) << ": " << model.NumParameters()
            << " parameters, best epoch " << r.best_epoch << "\n";
  return 0;
}

int Evaluate(const CommonOptions& o) {
  const auto cfg = LoadConfig(o);
  if (o.model.empty()) throw ConfigError("evaluate needs --model");
  auto bench = MakeBench(cfg, o.quiet);
  const auto corpus = CorpusFor(bench, o);
  const auto model = deliberation::NluModel::Load(o.model);
  const bool uses = mcat::UsesScore(model.config().mode);
  auto kind = uses ? cfg.score_source : harness::ScoreKind::kNone;
  if (uses && kind == harness::ScoreKind::kNone)
    throw ConfigError(std::string(mcat::ModeName(model.config().mode)) + " needs a score_source");
  const auto enc = MaybeEncoder(cfg, o);
  auto scores = bench.Scores(kind, corpus.test, enc ? &*enc : nullptr);
  if (cfg.flip_ratio > 0.0) {
    if (kind != harness::ScoreKind::kOracleBinary)
      throw ConfigError("flip_ratio needs score_source 'oracle_binary'");
    std::vector<double> raw;
    for (const auto& s : scores) raw.push_back(*s);
    const auto flipped = mcat::FlipScores(raw, cfg.flip_ratio, DeriveSeed(cfg.seeds.front(), "flip-eval"));
    for (std::size_t i = 0; i < scores.size(); ++i) scores[i] = flipped[i];
  }
  harness::ExperimentResult result;
  auto cell = bench.Evaluate(model, corpus.test, scores);
  cell.preset = "default";
  cell.score_source = std::string(harness::ScoreKindName(kind));
  cell.seed = cfg.seeds.front();
  if (cfg.flip_ratio > 0.0) cell.flip_ratio = cfg.flip_ratio;
  result.cells.push_back(std::move(cell));
  harness::WriteCellsCsv(cfg.out_dir / "results.csv", result, cfg);
  harness::WriteUtterances(cfg.out_dir / "utterances.jsonl", result);
  Manifest(cfg, "evaluate", {{"nlu", nn::CheckpointId(model.params(), "")}},
           {{"model", o.model}});
  const auto& c = result.cells.front();
  std::cout << c.mode << ": em " << Fmt(c.em_all()) << " err " << Fmt(c.em_err_subset()) << " ("
            << c.n_err() << ") ok " << Fmt(c.em_ok_subset()) << " (" << c.n_ok() << ")\n";
  return 0;
}

void PrintSummary(const harness::ExperimentResult& result) {
  std::vector<std::tuple<std::string, std::string, std::string>> seen;
  for (const auto& c : result.cells) {
    auto key = std::make_tuple(c.mode, c.preset, c.score_source);
    if (c.flip_ratio || std::find(seen.begin(), seen.end(), key) != seen.end()) continue;
    seen.push_back(key);
    const auto all = result.EmAll(c.mode, c.preset, c.score_source);
    const auto err = result.EmErr(c.mode, c.preset, c.score_source);
    const auto ok = result.EmOk(c.mode, c.preset, c.score_source);
    std::cout << c.preset << " " << c.mode << "/" << c.score_source << ": em " << Fmt(all.mean) << "±"
              << Fmt(all.std) << " err " << Fmt(err.mean) << "±" << Fmt(err.std) << " ok " << Fmt(ok.mean)
              << "±" << Fmt(ok.std) << "\n";
  }
}

int ExpIntegration(const CommonOptions& o) {
  const auto cfg = LoadConfig(o);
  auto bench = MakeBench(cfg, o.quiet);
  const auto result = harness::RunIntegrationStudy(bench);
  harness::WriteCellsCsv(cfg.out_dir / "integration.csv", result, cfg);
  harness::WriteSummaryCsv(cfg.out_dir / "integration_summary.csv", result, cfg);
  harness::WriteUtterances(cfg.out_dir / "utterances.jsonl", result);
  Manifest(cfg, "exp-integration", bench.Artifacts());
  PrintSummary(result);
  return 0;
}

int ExpFlip(const CommonOptions& o) {
  const auto cfg = LoadConfig(o);
  auto bench = MakeBench(cfg, o.quiet);
  const auto curve = harness::RunFlipCurve(bench);
  harness::WriteFlipCsv(cfg.out_dir / "flip_curve.csv", curve, cfg);
  harness::WriteCellsCsv(cfg.out_dir / "flip_cells.csv", curve.cells, cfg);
  harness::WriteFlipSvg(cfg.out_dir / "flip_curve.svg", curve);
  harness::WriteUtterances(cfg.out_dir / "utterances.jsonl", curve.cells);
  json breakeven = curve.breakeven ? json(*curve.breakeven) : json(nullptr);
  Manifest(cfg, "exp-flip", bench.Artifacts(), {{"breakeven_ratio", breakeven}});
  for (const auto& p : curve.points) {
    std::cout << "flip " << Fmt(p.ratio, 2) << ": em " << Fmt(p.em.mean) << "±" << Fmt(p.em.std)
              << " (baseline " << Fmt(p.baseline_em.mean) << ")\n";
  }
  std::cout << "breakeven ratio: " << (curve.breakeven ? Fmt(*curve.breakeven) : "none") << "\n";
  return 0;
}

int ExpSweep(const CommonOptions& o) {
  const auto cfg = LoadConfig(o);
  auto bench = MakeBench(cfg, o.quiet);
  const auto result = harness::RunQualitySweep(bench);
  harness::WriteCellsCsv(cfg.out_dir / "sweep.csv", result, cfg);
  harness::WriteSummaryCsv(cfg.out_dir / "sweep_summary.csv", result, cfg);
  harness::WriteUtterances(cfg.out_dir / "utterances.jsonl", result);
  Manifest(cfg, "exp-sweep", bench.Artifacts());
  PrintSummary(result);
  return 0;
}

int GradCheck(const CommonOptions& o) {
  const uint64_t seed = o.seed.value_or(1);
  bool ok = true;
  for (const auto& c : harness::RunGradCheckSuite(seed)) {
    ok = ok && c.report.passed;
    std::printf("%-30s max_rel_error %.3e  coords %6zu  %s\n", c.name.c_str(), c.report.max_rel_error,
                c.report.coords_checked, c.report.passed ? "ok" : "FAIL");
  }
  return ok ? 0 : kExitRuntime;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Confidence-aware spoken language understanding toolkit"};
  app.require_subcommand(1);
  CommonOptions o;
  uint64_t seed = 0;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "TOML or JSON configuration file")->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "Run a single seed");
    sub->add_option("--out", o.out, "Output directory");
    sub->add_flag("--quiet", o.quiet, "No progress output");
  };
  auto* gen = app.add_subcommand("gen-corpus", "Write train/valid/test JSON Lines");
  add_common(gen);
  gen->add_flag("--inline-embeddings", o.inline_embeddings, "Store embeddings inside the JSON records");
  auto* tse = app.add_subcommand("train-score-encoder", "Train the confidence score encoder");
  add_common(tse);
  tse->add_option("--data", o.data, "Directory written by gen-corpus");
  auto* tn = app.add_subcommand("train-nlu", "Train one NLU model with the union strategy");
  add_common(tn);
  tn->add_option("--data", o.data, "Directory written by gen-corpus");
  tn->add_option("--score-encoder", o.score_encoder, "Checkpoint prefix for encoder scores");
  auto* ev = app.add_subcommand("evaluate", "Exact match of a trained NLU model on the test split");
  add_common(ev);
  ev->add_option("--data", o.data, "Directory written by gen-corpus");
  ev->add_option("--model", o.model, "NLU checkpoint prefix")->required();
  ev->add_option("--score-encoder", o.score_encoder, "Checkpoint prefix for encoder scores");
  auto* ei = app.add_subcommand("exp-integration", "Compare the integration modes with oracle scores");
  auto* ef = app.add_subcommand("exp-flip", "Flipped-score curve against the baseline");
  auto* es = app.add_subcommand("exp-sweep", "Baseline, oracle and encoder rows per noise preset");
  for (auto* sub : {ei, ef, es}) {
    add_common(sub);
    sub->add_option("--cache", o.cache, "Directory for trained models shared across runs");
  }
  auto* gc = app.add_subcommand("gradcheck", "Finite-difference check of every layer and loss");
  gc->add_option("--seed", seed, "Seed of the random shapes and parameters");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }
  for (auto* sub : app.get_subcommands()) {
    if (sub->count("--seed")) o.seed = seed;
  }

  try {
    auto* sub = app.get_subcommands().front();
    const std::string name = sub->get_name();
    if (name == "gen-corpus") return GenCorpus(o);
    if (name == "train-score-encoder") return TrainScoreEncoder(o);
    if (name == "train-nlu") return TrainNlu(o);
    if (name == "evaluate") return Evaluate(o);
    if (name == "exp-integration") return ExpIntegration(o);
    if (name == "exp-flip") return ExpFlip(o);
    if (name == "exp-sweep") return ExpSweep(o);
    if (name == "gradcheck") return GradCheck(o);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const InvalidHeads& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitConfig;
}
