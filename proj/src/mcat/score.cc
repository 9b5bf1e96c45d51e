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

#include "slu/mcat/score.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "slu/random.h"

namespace slu::mcat {

std::string_view ScoreSourceName(ScoreSource source) {
  switch (source) {
    case ScoreSource::kOracle:
      return "oracle";
    case ScoreSource::kEncoder:
      return "encoder";
    case ScoreSource::kConstant:
      return "constant";
    case ScoreSource::kFlippedOracle:
      return "flipped_oracle";
  }
  return "unknown";
}

ConfidenceScore::ConfidenceScore(double value, ScoreSource source)
    : value_(value), source_(source) {
  internal::CheckUnitInterval(value);
}

ConfidenceScore OracleScore(double wer) {
  if (!(wer >= 0.0)) throw NegativeWer("WER must be non-negative");
  return ConfidenceScore(1.0 - std::min(1.0, wer), ScoreSource::kOracle);
}

std::string_view ModeName(IntegrationMode mode) {
  switch (mode) {
    case IntegrationMode::kBaseline:
      return "baseline";
    case IntegrationMode::kMulFusion:
      return "mul_fusion";
    case IntegrationMode::kAppendFusion:
      return "append_fusion";
    case IntegrationMode::kAppendFusionDec:
      return "append_fusion_dec";
  }
  return "unknown";
}

IntegrationMode ParseMode(std::string_view name) {
  for (auto m : {IntegrationMode::kBaseline, IntegrationMode::kMulFusion,
                 IntegrationMode::kAppendFusion, IntegrationMode::kAppendFusionDec}) {
    if (ModeName(m) == name) return m;
  }
  if (name == "none") return IntegrationMode::kBaseline;
  if (name == "mul") return IntegrationMode::kMulFusion;
  throw ConfigError("unknown integration mode '" + std::string(name) + "'");
}

std::vector<double> FlipScores(std::span<const double> binary_scores, double ratio,
                               uint64_t seed) {
  if (!(ratio >= 0.0 && ratio <= 1.0)) throw DomainError("flip ratio outside [0,1]");
  for (double s : binary_scores) {
    if (s != 0.0 && s != 1.0) throw NonBinaryScore("score " + std::to_string(s) + " is not 0 or 1");
  }
  std::vector<double> out(binary_scores.begin(), binary_scores.end());
  const auto n = out.size();
  const auto count = static_cast<std::size_t>(std::floor(ratio * static_cast<double>(n) + 1e-9));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  for (std::size_t k = 0; k < count; ++k) out[order[k]] = 1.0 - out[order[k]];
  return out;
}

}  // namespace slu::mcat
