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

// Acceptance run: one PASS/FAIL line per criterion. Exits non-zero if any
// criterion fails.

#include <sys/wait.h>

#include <CLI11.hpp>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "slu/deliberation/model.h"
#include "slu/deliberation/nlu.h"
#include "slu/harness/config.h"
#include "slu/harness/experiments.h"
#include "slu/harness/gradcheck_suite.h"
#include "slu/harness/pipeline.h"
#include "slu/random.h"
#include "slu/scoreenc/encoder.h"
#include "slu/semtext/metrics.h"
#include "slu/simasr/grammar.h"

namespace {

namespace fs = std::filesystem;
using slu::MatrixD;
using slu::MatrixF;
using slu::mcat::IntegrationMode;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string Fmt(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

std::string Sci(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2e", v);
  return buf;
}

std::string Pts(double v) { return Fmt(100.0 * v, 2); }

template <typename M>
M RandomMatrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  M m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = static_cast<typename M::Scalar>(n(rng));
  return m;
}

// ---------------------------------------------------------------------------

std::size_t BruteEdits(const slu::semtext::TokenSeq& a, std::size_t i,
                       const slu::semtext::TokenSeq& b, std::size_t j) {
  if (i == a.size()) return b.size() - j;
  if (j == b.size()) return a.size() - i;
  return std::min({BruteEdits(a, i + 1, b, j) + 1, BruteEdits(a, i, b, j + 1) + 1,
                   BruteEdits(a, i + 1, b, j + 1) + (a[i] == b[j] ? 0 : 1)});
}

Outcome MetricOracle() {
  std::vector<slu::semtext::TokenSeq> seqs{{}};
  std::size_t begin = 0;
  for (int len = 1; len <= 4; ++len) {
    const std::size_t end = seqs.size();
    for (std::size_t k = begin; k < end; ++k) {
      for (const char* s : {"a", "b", "c"}) {
        auto t = seqs[k];
        t.emplace_back(s);
        seqs.push_back(t);
      }
    }
    begin = end;
  }
  std::size_t pairs = 0, mismatches = 0;
  for (const auto& r : seqs) {
    if (r.empty()) continue;
    for (const auto& h : seqs) {
      const auto w = slu::semtext::WordErrorRate(r, h);
      mismatches += w.errors != BruteEdits(r, 0, h, 0) || w.ref_length != r.size();
      ++pairs;
    }
  }
  using slu::semtext::ExactMatch;
  int em_fail = 0;
  em_fail += !ExactMatch("[IN:X Foo ]", "[in:x foo ]");
  em_fail += !ExactMatch("[IN:X foo, bar. ]", "[IN:X foo bar ]");
  em_fail += ExactMatch("[IN:X a ]", "[IN:X b ]");
  for (const char* s : {"", "[IN:X ]", "Hello, World!", "[IN:A [SL:B c ] ]"}) em_fail += !ExactMatch(s, s);
  return {mismatches == 0 && em_fail == 0,
          std::to_string(pairs) + " pairs, " + std::to_string(mismatches) + " WER mismatches, " +
              std::to_string(em_fail) + " EM case failures"};
}

// ---------------------------------------------------------------------------

Outcome DistributionInvariants() {
  const auto grammar = slu::simasr::DefaultGrammar();
  const int vocab = slu::harness::MakeNluVocab(grammar).size();
  std::mt19937_64 rng(2024);
  double worst = 0.0;
  std::size_t rows = 0;
  bool p_copy_ok = true;
  auto check_rows = [&](const MatrixD& m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      worst = std::max(worst, std::abs(m.row(i).sum() - 1.0));
      ++rows;
    }
  };
  const IntegrationMode modes[] = {IntegrationMode::kBaseline, IntegrationMode::kMulFusion,
                                   IntegrationMode::kAppendFusion, IntegrationMode::kAppendFusionDec};
  std::vector<std::unique_ptr<slu::nn::ParamStore<double>>> stores;
  std::vector<slu::deliberation::NluNetwork<double>> nets;
  for (auto mode : modes) {
    slu::deliberation::NluConfig cfg;
    cfg.mode = mode;
    stores.push_back(std::make_unique<slu::nn::ParamStore<double>>(slu::DeriveSeed(7, "acc2", nets.size())));
    nets.push_back(slu::deliberation::NluNetwork<double>::Create(*stores.back(), cfg, vocab));
  }
  slu::nn::ParamStore<double> score_store(99);
  auto score_net = slu::scoreenc::ScoreNetwork<double>::Create(score_store, {});
  std::uniform_int_distribution<int> len_u(1, 12), len_t(1, 40), tok(0, vocab - 1), len_y(1, 10);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  for (int pass = 0; pass < 1000; ++pass) {
    const auto& net = nets[static_cast<std::size_t>(pass % 4)];
    const int d = net.config.input_dim;
    const MatrixD txt = RandomMatrix<MatrixD>(len_u(rng), d, rng);
    const MatrixD aud = RandomMatrix<MatrixD>(len_t(rng), d, rng);
    std::vector<int> hyp(static_cast<std::size_t>(txt.rows())), inputs{0};
    for (auto& h : hyp) h = tok(rng);
    for (int k = len_y(rng); k > 0; --k) inputs.push_back(tok(rng));
    const std::optional<double> score =
        slu::mcat::UsesScore(net.config.mode) ? std::optional<double>(unit(rng)) : std::nullopt;

    slu::nn::Graph<double> g(false);
    // Every attention layer on inputs of its own widths.
    auto probe = [&](const slu::nn::MultiHeadAttention<double>& attn, Eigen::Index q_len,
                     Eigen::Index kv_len, bool causal) {
      auto q = g.Constant(RandomMatrix<MatrixD>(q_len, attn.query.in_dim(), rng, 3.0));
      auto kv = g.Constant(RandomMatrix<MatrixD>(kv_len, attn.key.in_dim(), rng, 3.0));
      check_rows(g.value(attn.Apply(g, q, kv, kv, causal).attn));
    };
    probe(net.fusion, txt.rows(), aud.rows(), false);
    for (const auto& layer : net.pool) probe(layer.self_attn, txt.rows(), txt.rows(), false);
    probe(net.decoder.self_attn, static_cast<Eigen::Index>(inputs.size()),
          static_cast<Eigen::Index>(inputs.size()), true);
    probe(net.decoder.cross_attn, static_cast<Eigen::Index>(inputs.size()), txt.rows(), false);

    auto memory = net.Encode(g, txt, aud, score);
    const auto t = net.Decode(g, memory, inputs, hyp, score);
    check_rows(g.value(t.a_v));
    check_rows(g.value(t.g_v));
    check_rows(g.value(t.c_dist));
    check_rows(g.value(t.o_v));
    const MatrixD p = g.value(t.p_copy);
    p_copy_ok = p_copy_ok && (p.array() > 0.0).all() && (p.array() < 1.0).all();

    const auto s = score_net.Forward(g, -5.0 * unit(rng), txt, aud);
    check_rows(g.value(s.attn_txt));
    check_rows(g.value(s.attn_aud));
    const double sc = g.scalar(s.score);
    p_copy_ok = p_copy_ok && sc > 0.0 && sc < 1.0;
  }
  return {worst <= 1e-6 && p_copy_ok,
          std::to_string(rows) + " rows, max |sum-1| " + Sci(worst) +
              (p_copy_ok ? ", p_copy in (0,1)" : ", p_copy outside (0,1)")};
}

// ---------------------------------------------------------------------------

Outcome GradientVerification() {
  const auto cases = slu::harness::RunGradCheckSuite(1);
  double worst = 0.0;
  std::string worst_name;
  std::size_t coords = 0;
  for (const auto& c : cases) {
    coords += c.report.coords_checked;
    if (c.report.max_rel_error >= worst) {
      worst = c.report.max_rel_error;
      worst_name = c.name;
    }
  }
  return {worst < 1e-4, std::to_string(cases.size()) + " cases, " + std::to_string(coords) +
                            " coordinates, max rel err " + Sci(worst) + " (" + worst_name + ")"};
}

// ---------------------------------------------------------------------------

Outcome PointerEndpoints() {
  const auto grammar = slu::simasr::DefaultGrammar();
  const slu::simasr::FrozenAsr asr(slu::simasr::GrammarVocabulary(grammar), slu::simasr::SimConfig{});
  const auto vocab = slu::harness::MakeNluVocab(grammar);
  const auto data = slu::simasr::BuildSplit(grammar, asr, 20, 5, "test");
  std::vector<std::optional<double>> scores;
  for (const auto& r : data) scores.push_back(slu::harness::OracleScoreOf(r));
  const auto examples = slu::harness::MakeHypExamples(data, vocab, scores);
  int checked = 0, failed = 0;
  for (auto mode : {IntegrationMode::kBaseline, IntegrationMode::kAppendFusionDec}) {
    slu::deliberation::NluConfig cfg;
    cfg.mode = mode;
    slu::deliberation::NluModel model(cfg, vocab, 17);
    auto& bias = model.params().Find("decoder.gate.bias")->value;
    for (const auto& ex : examples) {
      const std::optional<double> score = slu::mcat::UsesScore(mode) ? ex.score : std::nullopt;
      const MatrixF memory = model.Encode(ex.e_txt, ex.e_aud, score);
      const std::vector<int> prev(ex.targets.begin(), ex.targets.end() - 1);
      for (float b : {1e4f, -1e4f}) {
        bias.setConstant(b);
        const auto s = model.Step(prev, memory, ex.hyp_ids, score);
        const bool ok = b > 0 ? (s.p_copy == 1.0f && s.o_v == s.c_dist)
                              : (s.p_copy == 0.0f && s.o_v == s.g_v);
        failed += !ok;
        ++checked;
      }
    }
  }
  return {failed == 0, std::to_string(checked) + " forced steps, " + std::to_string(failed) +
                           " not bit-identical to the selected distribution"};
}

// ---------------------------------------------------------------------------

Outcome IntegrationOrdering(const slu::harness::ExperimentResult& r) {
  const auto base_err = r.EmErr("baseline", "default", "none");
  const auto base_all = r.EmAll("baseline", "default", "none");
  const auto dec_err = r.EmErr("append_fusion_dec", "default", "oracle");
  const double gap = dec_err.mean - base_err.mean;
  bool overall_ok = true;
  std::string detail = "err-subset EM baseline " + Pts(base_err.mean) + " -> append_fusion_dec " +
                       Pts(dec_err.mean) + " (gap " + Pts(gap) + ", need >= 3.00); overall baseline " +
                       Pts(base_all.mean);
  for (const char* mode : {"mul_fusion", "append_fusion", "append_fusion_dec"}) {
    const auto all = r.EmAll(mode, "default", "oracle");
    overall_ok = overall_ok && all.mean >= base_all.mean - 0.01;
    detail += std::string(", ") + mode + " " + Pts(all.mean);
  }
  return {gap >= 0.03 && overall_ok, detail};
}

Outcome FlipOrdering(const slu::harness::FlipCurve& c) {
  if (c.points.empty()) return {false, "no flip points"};
  const double base = c.points.front().baseline_em.mean;
  const auto& first = c.points.front();
  const auto& last = c.points.back();
  bool monotone = true;
  std::string curve;
  for (std::size_t i = 0; i < c.points.size(); ++i) {
    if (i > 0 && c.points[i].em.mean > c.points[i - 1].em.mean + 0.01) monotone = false;
    curve += (i ? " " : "") + Fmt(c.points[i].ratio, 2) + ":" + Pts(c.points[i].em.mean);
  }
  const bool ok = first.ratio == 0.0 && last.ratio == 1.0 && first.em.mean > base &&
                  last.em.mean < base - 0.02 && monotone;
  std::string be = "none";
  if (c.breakeven) be = Fmt(*c.breakeven, 3) + " (score accuracy " + Fmt(1.0 - *c.breakeven, 3) + ")";
  return {ok, "baseline " + Pts(base) + ", curve " + curve + (monotone ? "" : " [not monotone]") +
                  ", breakeven ratio " + be};
}

Outcome SweepTrend(const slu::harness::ExperimentResult& r,
                   const std::vector<slu::harness::NoisePreset>& presets) {
  const std::string noisy = presets.front().name;
  const std::string clean = presets.back().name;
  auto row = [&](const std::string& p, const char* mode, const char* src) {
    return r.EmAll(mode, p, src).mean;
  };
  std::string detail;
  for (const auto& p : presets) {
    detail += p.name + " base/mcat/oracle " + Pts(row(p.name, "baseline", "none")) + "/" +
              Pts(row(p.name, "append_fusion_dec", "encoder")) + "/" +
              Pts(row(p.name, "append_fusion_dec", "oracle")) + "; ";
  }
  const double b = row(noisy, "baseline", "none");
  const double m = row(noisy, "append_fusion_dec", "encoder");
  const double o = row(noisy, "append_fusion_dec", "oracle");
  const double gain_noisy = o - b;
  const double gain_clean = row(clean, "append_fusion_dec", "oracle") - row(clean, "baseline", "none");
  detail += "oracle gain " + noisy + " " + Pts(gain_noisy) + " vs " + clean + " " + Pts(gain_clean);
  return {o >= m && m >= b && gain_noisy > gain_clean, detail};
}

// ---------------------------------------------------------------------------

Outcome ScoreEncoderQuality(slu::harness::Workbench& bench) {
  const auto& cfg = bench.config();
  const uint64_t seed = cfg.seeds.front();
  const auto& asr = bench.Asr();
  const auto balanced = slu::simasr::BalanceAugment(bench.Corpus().test, cfg.balance_target, asr,
                                                    slu::DeriveSeed(seed, "balance-test"));
  const auto labels = slu::scoreenc::Labels(balanced);
  const auto& trained = bench.Encoder("", seed);
  const double acc = slu::scoreenc::EvalScoreThreshold(trained.ScoreAll(balanced), labels, 0.5);
  const slu::scoreenc::ScoreEncoder untrained(cfg.score_encoder, slu::DeriveSeed(seed, "score-init"));
  const double auc0 = slu::scoreenc::Auc(untrained.ScoreAll(balanced), labels);

  const auto& e = cfg.score_encoder;
  const std::size_t d = static_cast<std::size_t>(e.input_dim);
  const std::size_t h = static_cast<std::size_t>(e.lstm_dim);
  const std::size_t expected = 2 * (d * 4 * h + h * 4 * h + 4 * h) + 2 * h + 2 * 4 * (h * h + h) + 2 * h + 1;
  const std::size_t n = trained.NumParameters();
  const double label0 = slu::simasr::LabelZeroFraction(balanced);
  return {acc >= 0.80 && n == expected && n <= 20000 && std::abs(auc0 - 0.5) <= 0.1,
          "held-out accuracy " + Fmt(acc, 3) + " on " + std::to_string(balanced.size()) +
              " balanced records (label-0 " + Fmt(label0, 3) + "), parameters " + std::to_string(n) +
              " (expected " + std::to_string(expected) + ", budget 20000), untrained AUC " + Fmt(auc0, 3)};
}

// ---------------------------------------------------------------------------

Outcome ModalityBlinding() {
  const auto grammar = slu::simasr::DefaultGrammar();
  slu::deliberation::NluConfig cfg;
  cfg.mode = IntegrationMode::kMulFusion;
  const slu::deliberation::NluModel model(cfg, slu::harness::MakeNluVocab(grammar), 23);
  std::mt19937_64 rng(23);
  std::uniform_int_distribution<int> len(1, 15);
  int trials = 0, failed = 0;
  for (int k = 0; k < 100; ++k) {
    const int u = len(rng), t = len(rng) + 2;
    const MatrixF txt = RandomMatrix<MatrixF>(u, cfg.input_dim, rng);
    const MatrixF aud = RandomMatrix<MatrixF>(t, cfg.input_dim, rng);
    failed += model.Encode(txt, aud, 1.0) != model.Encode(txt, RandomMatrix<MatrixF>(t, cfg.input_dim, rng), 1.0);
    failed += model.Encode(txt, aud, 0.0) != model.Encode(RandomMatrix<MatrixF>(u, cfg.input_dim, rng), aud, 0.0);
    trials += 2;
  }
  return {failed == 0, std::to_string(trials) + " comparisons, " + std::to_string(failed) + " differed"};
}

// ---------------------------------------------------------------------------

int RunCli(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string(SLU_CLI_PATH) + " " + args + " >> '" + log.string() + "' 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string ReadAll(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome CliDeterminism(const fs::path& work) {
  fs::remove_all(work);
  fs::create_directories(work);
  std::ofstream(work / "tiny.toml") << "corpus_seed = 3\n\n[splits]\ntrain = 160\nvalid = 40\ntest = 80\n\n"
                                       "[nlu_train]\nepochs = 2\n\n[score_train]\nepochs = 1\n\n"
                                       "[experiment]\nseeds = [1, 2]\nflip_ratios = [0.0, 0.5, 1.0]\n"
                                       "score_source = \"oracle\"\nmode = \"append_fusion_dec\"\n";
  const std::string cfg = "--quiet --config '" + (work / "tiny.toml").string() + "'";
  const fs::path log = work / "cli.log";
  int failures = 0;
  for (const char* run : {"a", "b"}) {
    const fs::path out = work / run;
    const auto o = [&](const char* sub) { return " --out '" + (out / sub).string() + "'"; };
    const auto data = " --data '" + (out / "data").string() + "'";
    failures += RunCli("gen-corpus " + cfg + o("data"), log) != 0;
    failures += RunCli("train-score-encoder " + cfg + data + o("score"), log) != 0;
    failures += RunCli("train-nlu " + cfg + data + o("nlu"), log) != 0;
    failures += RunCli("evaluate " + cfg + data + " --model '" + (out / "nlu" / "nlu").string() + "'" +
                           o("eval"), log) != 0;
    failures += RunCli("exp-integration " + cfg + o("integration"), log) != 0;
    failures += RunCli("exp-flip " + cfg + o("flip"), log) != 0;
    failures += RunCli("exp-sweep " + cfg + o("sweep"), log) != 0;
    failures += RunCli("exp-flip " + cfg + " --seed 2" + o("flip_seed2"), log) != 0;
  }
  if (failures) return {false, std::to_string(failures) + " CLI invocations failed, see " + log.string()};
  std::size_t compared = 0, differing = 0;
  std::string first_diff;
  for (const auto& entry : fs::recursive_directory_iterator(work / "a")) {
    const auto ext = entry.path().extension();
    if (!entry.is_regular_file() || (ext != ".csv" && ext != ".jsonl")) continue;
    const auto rel = fs::relative(entry.path(), work / "a");
    ++compared;
    if (ReadAll(entry.path()) != ReadAll(work / "b" / rel)) {
      ++differing;
      if (first_diff.empty()) first_diff = rel.string();
    }
  }
  return {compared > 0 && differing == 0,
          std::to_string(compared) + " result files compared across two invocations, " +
              std::to_string(differing) + " differ" + (first_diff.empty() ? "" : " (" + first_diff + ")")};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  fs::path out = "acceptance";
  fs::path cache;
  std::vector<int> only;
  app.add_option("--out", out, "Directory for result files");
  app.add_option("--cache", cache, "Trained-model cache shared across runs");
  app.add_option("--only", only, "Run only these criteria")->delimiter(',');
  CLI11_PARSE(app, argc, argv);
  fs::create_directories(out);
  const std::set<int> selected(only.begin(), only.end());
  auto wanted = [&](int k) { return selected.empty() || selected.contains(k); };

  std::map<int, Outcome> outcomes;
  std::map<int, double> seconds;
  auto run = [&](int k, const std::function<Outcome()>& fn) {
    if (!wanted(k)) return;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      outcomes[k] = fn();
    } catch (const std::exception& e) {
      outcomes[k] = {false, std::string("exception: ") + e.what()};
    }
    seconds[k] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cerr << "[criterion " << k << " done in " << Fmt(seconds[k], 1) << " s]\n";
  };

  run(1, MetricOracle);
  run(2, DistributionInvariants);
  run(3, GradientVerification);
  run(4, PointerEndpoints);
  run(9, ModalityBlinding);

  slu::harness::RunConfig cfg;
  cfg.out_dir = out;
  cfg.cache_dir = cache;
  slu::harness::Workbench bench(cfg);
  bench.SetLog([](const std::string& line) { std::cerr << "  " << line << "\n"; });
  run(5, [&] {
    const auto r = slu::harness::RunIntegrationStudy(bench);
    slu::harness::WriteCellsCsv(out / "integration.csv", r, cfg);
    slu::harness::WriteSummaryCsv(out / "integration_summary.csv", r, cfg);
    return IntegrationOrdering(r);
  });
  run(6, [&] {
    const auto c = slu::harness::RunFlipCurve(bench);
    slu::harness::WriteFlipCsv(out / "flip_curve.csv", c, cfg);
    slu::harness::WriteCellsCsv(out / "flip_cells.csv", c.cells, cfg);
    slu::harness::WriteFlipSvg(out / "flip_curve.svg", c);
    return FlipOrdering(c);
  });
  run(7, [&] {
    const auto r = slu::harness::RunQualitySweep(bench);
    slu::harness::WriteCellsCsv(out / "sweep.csv", r, cfg);
    slu::harness::WriteSummaryCsv(out / "sweep_summary.csv", r, cfg);
    return SweepTrend(r, cfg.presets);
  });
  run(8, [&] { return ScoreEncoderQuality(bench); });
  run(10, [&] { return CliDeterminism(out / "cli"); });

  const char* names[] = {"",
                         "metric oracle equivalence",
                         "distribution invariants",
                         "gradient verification",
                         "pointer endpoints",
                         "integration-study ordering",
                         "flip-curve ordering",
                         "quality-sweep trend",
                         "score encoder quality",
                         "MUL-mode modality blinding",
                         "CLI determinism"};
  bool all = true;
  std::ofstream summary(out / "acceptance.txt");
  for (const auto& [k, o] : outcomes) {
    std::ostringstream line;
    line << "criterion " << k << " [" << (o.pass ? "PASS" : "FAIL") << "] " << names[k] << ": "
         << o.detail << " (" << Fmt(seconds[k], 1) << " s)";
    std::cout << line.str() << std::endl;
    summary << line.str() << "\n";
    all = all && o.pass;
  }
  return all ? 0 : 1;
}
