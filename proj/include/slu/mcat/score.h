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

#ifndef SLU_MCAT_SCORE_H_
#define SLU_MCAT_SCORE_H_

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "slu/errors.h"
#include "slu/matrix.h"

namespace slu::mcat {

enum class ScoreSource { kOracle, kEncoder, kConstant, kFlippedOracle };

std::string_view ScoreSourceName(ScoreSource source);

// Modality confidence: near 1 trusts the text hypothesis, near 0 the audio.
class ConfidenceScore {
 public:
  // Throws DomainError unless 0 <= value <= 1.
  ConfidenceScore(double value, ScoreSource source);

  double value() const { return value_; }
  ScoreSource source() const { return source_; }

 private:
  double value_;
  ScoreSource source_;
};

// 1 - min(1, wer). Throws NegativeWer.
ConfidenceScore OracleScore(double wer);

enum class IntegrationMode { kBaseline, kMulFusion, kAppendFusion, kAppendFusionDec };

// "baseline", "mul_fusion", "append_fusion", "append_fusion_dec".
std::string_view ModeName(IntegrationMode mode);
// Throws ConfigError on an unknown name.
IntegrationMode ParseMode(std::string_view name);

inline bool UsesScore(IntegrationMode m) { return m != IntegrationMode::kBaseline; }
inline bool AppendsToFusion(IntegrationMode m) {
  return m == IntegrationMode::kAppendFusion || m == IntegrationMode::kAppendFusionDec;
}
inline bool AppendsToGate(IntegrationMode m) { return m == IntegrationMode::kAppendFusionDec; }

namespace internal {
inline void CheckUnitInterval(double score) {
  if (!(score >= 0.0 && score <= 1.0)) throw DomainError("score outside [0,1]");
}
}  // namespace internal

// (score · e_txt, (1 - score) · e_aud)
template <typename Real>
std::pair<Matrix<Real>, Matrix<Real>> IntegrateMul(const Matrix<Real>& e_txt,
                                                   const Matrix<Real>& e_aud, double score) {
  internal::CheckUnitInterval(score);
  const Real s = static_cast<Real>(score);
  return {e_txt * s, e_aud * (Real(1) - s)};
}

// Appends `score` as one extra feature column to every timestep of both.
template <typename Real>
std::pair<Matrix<Real>, Matrix<Real>> IntegrateAppendFusion(const Matrix<Real>& e_txt,
                                                            const Matrix<Real>& e_aud,
                                                            double score) {
  internal::CheckUnitInterval(score);
  auto append = [score](const Matrix<Real>& m) {
    Matrix<Real> out(m.rows(), m.cols() + 1);
    out.leftCols(m.cols()) = m;
    out.col(m.cols()).setConstant(static_cast<Real>(score));
    return out;
  };
  return {append(e_txt), append(e_aud)};
}

// Inverts a uniformly random floor(ratio·n)-subset of binary scores.
// Throws NonBinaryScore on non-binary input and DomainError on a ratio
// outside [0,1].
std::vector<double> FlipScores(std::span<const double> binary_scores, double ratio, uint64_t seed);

}  // namespace slu::mcat

#endif  // SLU_MCAT_SCORE_H_
