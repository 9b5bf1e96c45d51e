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

#ifndef SLU_HARNESS_PIPELINE_H_
#define SLU_HARNESS_PIPELINE_H_

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "slu/deliberation/model.h"
#include "slu/simasr/asr.h"

namespace slu::harness {

// Where the confidence score of a hypothesis comes from.
enum class ScoreKind { kNone, kOracle, kOracleBinary, kEncoder, kConstant };

std::string_view ScoreKindName(ScoreKind kind);
// Throws ConfigError.
ScoreKind ParseScoreKind(std::string_view name);

deliberation::NluVocab MakeNluVocab(const simasr::GrammarConfig& grammar);

// Continuous oracle score 1 - min(1, WER).
double OracleScoreOf(const simasr::Record& record);

std::vector<int> TargetIds(const deliberation::NluVocab& vocab, const semtext::SemanticParse& parse);

// One example per record, from the recognizer hypothesis.
std::vector<deliberation::NluExample> MakeHypExamples(
    const simasr::Dataset& data, const deliberation::NluVocab& vocab,
    const std::vector<std::optional<double>>& scores);

// Union strategy: each record yields a reference-text example (score 1 when
// scores are used) followed by its hypothesis example.
std::vector<deliberation::NluExample> MakeUnionExamples(
    const simasr::Dataset& data, const simasr::FrozenAsr& asr,
    const deliberation::NluVocab& vocab, const std::vector<std::optional<double>>& scores);

}  // namespace slu::harness

#endif  // SLU_HARNESS_PIPELINE_H_
