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

#include "slu/harness/pipeline.h"

#include <algorithm>

#include "slu/semtext/metrics.h"

namespace slu::harness {

using deliberation::NluExample;
using deliberation::NluVocab;

std::string_view ScoreKindName(ScoreKind kind) {
  switch (kind) {
    case ScoreKind::kNone:
      return "none";
    case ScoreKind::kOracle:
      return "oracle";
    case ScoreKind::kOracleBinary:
      return "oracle_binary";
    case ScoreKind::kEncoder:
      return "encoder";
    case ScoreKind::kConstant:
      return "constant";
  }
  return "unknown";
}

ScoreKind ParseScoreKind(std::string_view name) {
  for (auto k : {ScoreKind::kNone, ScoreKind::kOracle, ScoreKind::kOracleBinary,
                 ScoreKind::kEncoder, ScoreKind::kConstant}) {
    if (ScoreKindName(k) == name) return k;
  }
  throw ConfigError("unknown score source '" + std::string(name) + "'");
}

NluVocab MakeNluVocab(const simasr::GrammarConfig& grammar) {
  return NluVocab(simasr::GrammarOntology(grammar), simasr::GrammarVocabulary(grammar).words());
}

double OracleScoreOf(const simasr::Record& record) {
  return mcat::OracleScore(semtext::Wer(record.utt.ref_words, record.asr.hyp_words)).value();
}

std::vector<int> TargetIds(const NluVocab& vocab, const semtext::SemanticParse& parse) {
  std::vector<int> ids = vocab.Encode(semtext::Linearize(parse));
  ids.push_back(NluVocab::kEos);
  return ids;
}

namespace {
void CheckScores(const simasr::Dataset& data, const std::vector<std::optional<double>>& scores) {
  if (scores.size() != data.size()) throw ShapeMismatch("one score per record expected");
}
}  // namespace

std::vector<NluExample> MakeHypExamples(const simasr::Dataset& data, const NluVocab& vocab,
                                        const std::vector<std::optional<double>>& scores) {
  CheckScores(data, scores);
  std::vector<NluExample> out;
  out.reserve(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto& r = data[i];
    out.push_back(NluExample{r.asr.e_txt, r.asr.e_aud, vocab.Encode(r.asr.hyp_words), scores[i],
                             TargetIds(vocab, r.utt.parse)});
  }
  return out;
}

std::vector<NluExample> MakeUnionExamples(const simasr::Dataset& data, const simasr::FrozenAsr& asr,
                                          const NluVocab& vocab,
                                          const std::vector<std::optional<double>>& scores) {
  CheckScores(data, scores);
  std::vector<NluExample> out;
  out.reserve(2 * data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto& r = data[i];
    auto targets = TargetIds(vocab, r.utt.parse);
    std::optional<double> ref_score;
    if (scores[i]) ref_score = 1.0;
    out.push_back(NluExample{asr.EmbedText(r.utt.ref_words), r.asr.e_aud,
                             vocab.Encode(r.utt.ref_words), ref_score, targets});
    out.push_back(NluExample{r.asr.e_txt, r.asr.e_aud, vocab.Encode(r.asr.hyp_words), scores[i],
                             std::move(targets)});
  }
  return out;
}

}  // namespace slu::harness
