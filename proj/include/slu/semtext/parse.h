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

#ifndef SLU_SEMTEXT_PARSE_H_
#define SLU_SEMTEXT_PARSE_H_

#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace slu::semtext {

using TokenSeq = std::vector<std::string>;

inline constexpr std::string_view kIntentPrefix = "[IN:";
inline constexpr std::string_view kSlotPrefix = "[SL:";
inline constexpr std::string_view kClose = "]";

// One node of a TOP-style tree. Intent children are slots, nested intents or
// words; slot children are words or nested intents.
struct ParseNode {
  enum class Kind { kIntent, kSlot, kWord };

  Kind kind = Kind::kWord;
  // Intent/slot label without its bracket prefix, or the word itself.
  std::string label;
  std::vector<ParseNode> children;

  static ParseNode Intent(std::string label, std::vector<ParseNode> children = {});
  static ParseNode Slot(std::string label, std::vector<ParseNode> children = {});
  static ParseNode Word(std::string word);

  bool operator==(const ParseNode&) const = default;
};

// Restricts which labels deserialize() accepts after an opening bracket.
// An empty ontology accepts any well-formed label.
struct Ontology {
  std::set<std::string> intents;
  std::set<std::string> slots;

  bool empty() const { return intents.empty() && slots.empty(); }
  // Bracket-opening symbols, e.g. "[IN:CREATE_ALARM", in sorted order.
  std::vector<std::string> Symbols() const;
};

class SemanticParse {
 public:
  // Throws MalformedParse if `root` violates the tree invariants.
  explicit SemanticParse(ParseNode root);

  const ParseNode& root() const { return root_; }
  // Leaf words in left-to-right order.
  TokenSeq LeafWords() const;
  std::string ToString() const;

  bool operator==(const SemanticParse&) const = default;

 private:
  ParseNode root_;
};

// Bracketed token sequence, e.g. [IN:X [SL:Y w1 w2 ] ] as 6 tokens.
TokenSeq Linearize(const SemanticParse& parse);

// Inverse of Linearize. Throws MalformedParse on unbalanced brackets, a
// non-ontology symbol after '[', an empty label, or trailing tokens.
SemanticParse Deserialize(const TokenSeq& tokens, const Ontology& ontology = {});

// Whitespace tokenization and single-space joining.
TokenSeq Tokenize(std::string_view text);
std::string Join(const TokenSeq& tokens);

// Canonical string form: Join(Linearize(Deserialize(Tokenize(text)))).
std::string Canonicalize(std::string_view text, const Ontology& ontology = {});

}  // namespace slu::semtext

#endif  // SLU_SEMTEXT_PARSE_H_
