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

#include "slu/semtext/parse.h"

#include <cctype>
#include <utility>

#include "slu/errors.h"

namespace slu::semtext {
namespace {

bool IsLabel(std::string_view label) {
  if (label.empty()) return false;
  for (char c : label) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) return false;
  }
  return true;
}

bool IsWord(std::string_view word) {
  if (word.empty() || word == kClose || word.front() == '[') return false;
  for (char c : word) {
    if (std::isspace(static_cast<unsigned char>(c))) return false;
  }
  return true;
}

void Validate(const ParseNode& node, ParseNode::Kind parent) {
  using Kind = ParseNode::Kind;
  switch (node.kind) {
    case Kind::kWord:
      if (!IsWord(node.label)) throw MalformedParse("invalid word '" + node.label + "'");
      if (!node.children.empty()) throw MalformedParse("word with children");
      return;
    case Kind::kIntent:
      if (!IsLabel(node.label)) throw MalformedParse("empty or invalid intent label");
      if (parent == Kind::kIntent) throw MalformedParse("intent directly inside intent");
      break;
    case Kind::kSlot:
      if (!IsLabel(node.label)) throw MalformedParse("empty or invalid slot label");
      if (parent != Kind::kIntent) throw MalformedParse("slot outside an intent");
      break;
  }
  for (const auto& child : node.children) Validate(child, node.kind);
}

void CollectWords(const ParseNode& node, TokenSeq& out) {
  if (node.kind == ParseNode::Kind::kWord) {
    out.push_back(node.label);
    return;
  }
  for (const auto& child : node.children) CollectWords(child, out);
}

void Emit(const ParseNode& node, TokenSeq& out) {
  switch (node.kind) {
    case ParseNode::Kind::kWord:
      out.push_back(node.label);
      return;
    case ParseNode::Kind::kIntent:
      out.push_back(std::string(kIntentPrefix) + node.label);
      break;
    case ParseNode::Kind::kSlot:
      out.push_back(std::string(kSlotPrefix) + node.label);
      break;
  }
  for (const auto& child : node.children) Emit(child, out);
  out.emplace_back(kClose);
}

class Reader {
 public:
  Reader(const TokenSeq& tokens, const Ontology& ontology)
      : tokens_(tokens), ontology_(ontology) {}

  ParseNode ReadRoot() {
    if (tokens_.empty()) throw MalformedParse("empty token sequence");
    ParseNode root = ReadBracket();
    if (pos_ != tokens_.size()) throw MalformedParse("tokens after the root bracket");
    return root;
  }

 private:
  ParseNode ReadBracket() {
    const std::string& open = tokens_[pos_];
    ParseNode node;
    std::string_view label;
    if (open.starts_with(kIntentPrefix)) {
      node.kind = ParseNode::Kind::kIntent;
      label = std::string_view(open).substr(kIntentPrefix.size());
      if (!ontology_.empty() && !ontology_.intents.contains(std::string(label)))
        throw MalformedParse("non-ontology intent '" + open + "'");
    } else if (open.starts_with(kSlotPrefix)) {
      node.kind = ParseNode::Kind::kSlot;
      label = std::string_view(open).substr(kSlotPrefix.size());
      if (!ontology_.empty() && !ontology_.slots.contains(std::string(label)))
        throw MalformedParse("non-ontology slot '" + open + "'");
    } else {
      throw MalformedParse("expected an ontology symbol, got '" + open + "'");
    }
    if (!IsLabel(label)) throw MalformedParse("empty label in '" + open + "'");
    node.label = std::string(label);
    ++pos_;
    while (true) {
      if (pos_ >= tokens_.size()) throw MalformedParse("unbalanced brackets");
      const std::string& tok = tokens_[pos_];
      if (tok == kClose) {
        ++pos_;
        return node;
      }
      if (!tok.empty() && tok.front() == '[') {
        node.children.push_back(ReadBracket());
      } else {
        node.children.push_back(ParseNode::Word(tok));
        ++pos_;
      }
    }
  }

  const TokenSeq& tokens_;
  const Ontology& ontology_;
  std::size_t pos_ = 0;
};

}  // namespace

ParseNode ParseNode::Intent(std::string label, std::vector<ParseNode> children) {
  return ParseNode{Kind::kIntent, std::move(label), std::move(children)};
}

ParseNode ParseNode::Slot(std::string label, std::vector<ParseNode> children) {
  return ParseNode{Kind::kSlot, std::move(label), std::move(children)};
}

ParseNode ParseNode::Word(std::string word) {
  return ParseNode{Kind::kWord, std::move(word), {}};
}

std::vector<std::string> Ontology::Symbols() const {
  std::vector<std::string> out;
  for (const auto& i : intents) out.push_back(std::string(kIntentPrefix) + i);
  for (const auto& s : slots) out.push_back(std::string(kSlotPrefix) + s);
  return out;
}

SemanticParse::SemanticParse(ParseNode root) : root_(std::move(root)) {
  if (root_.kind != ParseNode::Kind::kIntent) throw MalformedParse("root is not an intent");
  // The root has no parent; treat it as if nested in a slot.
  Validate(root_, ParseNode::Kind::kSlot);
}

TokenSeq SemanticParse::LeafWords() const {
  TokenSeq out;
  CollectWords(root_, out);
  return out;
}

std::string SemanticParse::ToString() const { return Join(Linearize(*this)); }

TokenSeq Linearize(const SemanticParse& parse) {
  TokenSeq out;
  Emit(parse.root(), out);
  return out;
}

SemanticParse Deserialize(const TokenSeq& tokens, const Ontology& ontology) {
  Reader reader(tokens, ontology);
  return SemanticParse(reader.ReadRoot());
}

TokenSeq Tokenize(std::string_view text) {
  TokenSeq out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t start = i;
    while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    if (i > start) out.emplace_back(text.substr(start, i - start));
  }
  return out;
}

std::string Join(const TokenSeq& tokens) {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out.push_back(' ');
    out += tokens[i];
  }
  return out;
}

std::string Canonicalize(std::string_view text, const Ontology& ontology) {
  return Join(Linearize(Deserialize(Tokenize(text), ontology)));
}

}  // namespace slu::semtext
