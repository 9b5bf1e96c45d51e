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

#include "slu/semtext/metrics.h"

#include <algorithm>
#include <cctype>
#include <vector>

#include "slu/errors.h"

namespace slu::semtext {
namespace {

bool IsDroppedPunct(char c) {
  if (!std::ispunct(static_cast<unsigned char>(c))) return false;
  return c != '[' && c != ']' && c != ':' && c != '_';
}

}  // namespace

std::string NormalizeForMatch(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      pending_space = !out.empty();
      continue;
    }
    if (IsDroppedPunct(c)) continue;
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

bool ExactMatch(std::string_view hyp, std::string_view ref) {
  return NormalizeForMatch(hyp) == NormalizeForMatch(ref);
}

std::size_t EditDistance(const TokenSeq& ref, const TokenSeq& hyp) {
  // Single-row Levenshtein DP.
  std::vector<std::size_t> row(hyp.size() + 1);
  for (std::size_t j = 0; j <= hyp.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= ref.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= hyp.size(); ++j) {
      std::size_t up = row[j];
      std::size_t sub = diag + (ref[i - 1] == hyp[j - 1] ? 0 : 1);
      row[j] = std::min({sub, up + 1, row[j - 1] + 1});
      diag = up;
    }
  }
  return row[hyp.size()];
}

WerRatio WordErrorRate(const TokenSeq& ref, const TokenSeq& hyp) {
  if (ref.empty()) throw EmptyReference("reference has no words");
  return WerRatio{EditDistance(ref, hyp), ref.size()};
}

double Wer(const TokenSeq& ref, const TokenSeq& hyp) { return WordErrorRate(ref, hyp).value(); }

}  // namespace slu::semtext
