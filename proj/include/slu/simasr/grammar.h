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

#ifndef SLU_SIMASR_GRAMMAR_H_
#define SLU_SIMASR_GRAMMAR_H_

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "slu/semtext/parse.h"

namespace slu::simasr {

using semtext::TokenSeq;

// A slot value is a run of min_words..max_words words drawn from `words`.
struct SlotSpec {
  std::string name;
  std::vector<std::string> words;
  int min_words = 1;
  int max_words = 1;
};

// One domain carries one intent. Templates are carrier phrases in which
// `{SLOT}` placeholders are replaced by slot values.
struct DomainSpec {
  std::string domain;
  std::string intent;
  std::vector<SlotSpec> slots;
  std::vector<std::string> templates;
};

struct GrammarConfig {
  std::vector<DomainSpec> domains;
  int min_utterance_words = 2;
  int max_utterance_words = 12;
};

// Eight task-oriented domains, one intent and two slots each, over a
// 150-word vocabulary.
GrammarConfig DefaultGrammar();

// Throws InvalidGrammar on unknown placeholders, empty word lists, invalid
// symbols or inconsistent length bounds.
void ValidateGrammar(const GrammarConfig& grammar);

// The finite word vocabulary, sorted.
class Vocabulary {
 public:
  Vocabulary() = default;
  explicit Vocabulary(std::vector<std::string> words);

  std::size_t size() const { return words_.size(); }
  const std::vector<std::string>& words() const { return words_; }
  const std::string& word(int index) const { return words_[static_cast<std::size_t>(index)]; }
  bool Contains(std::string_view word) const;
  // Throws UnknownToken.
  int Index(std::string_view word) const;

 private:
  std::vector<std::string> words_;
  std::map<std::string, int, std::less<>> index_;
};

// Every carrier and slot word mentioned by the grammar.
Vocabulary GrammarVocabulary(const GrammarConfig& grammar);

semtext::Ontology GrammarOntology(const GrammarConfig& grammar);

}  // namespace slu::simasr

#endif  // SLU_SIMASR_GRAMMAR_H_
