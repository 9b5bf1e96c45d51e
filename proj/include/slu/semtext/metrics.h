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

#ifndef SLU_SEMTEXT_METRICS_H_
#define SLU_SEMTEXT_METRICS_H_

#include <cstddef>
#include <string>
#include <string_view>

#include "slu/semtext/parse.h"

namespace slu::semtext {

// Lowercases, drops ASCII punctuation other than the structural characters
// '[', ']', ':' and '_', collapses whitespace runs and trims.
std::string NormalizeForMatch(std::string_view text);

// Exact Match: string equality after NormalizeForMatch on both sides.
bool ExactMatch(std::string_view hyp, std::string_view ref);

// Minimum number of substitutions, insertions and deletions turning `ref`
// into `hyp`.
std::size_t EditDistance(const TokenSeq& ref, const TokenSeq& hyp);

// Word error rate as an exact ratio. May exceed 1.
struct WerRatio {
  std::size_t errors = 0;
  std::size_t ref_length = 0;

  double value() const {
    return static_cast<double>(errors) / static_cast<double>(ref_length);
  }
};

// Throws EmptyReference when `ref` is empty.
WerRatio WordErrorRate(const TokenSeq& ref, const TokenSeq& hyp);
double Wer(const TokenSeq& ref, const TokenSeq& hyp);

}  // namespace slu::semtext

#endif  // SLU_SEMTEXT_METRICS_H_
