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

#include "slu/simasr/grammar.h"

#include <algorithm>
#include <set>

#include "slu/errors.h"

namespace slu::simasr {
namespace {

std::vector<std::string> Split(std::string_view s) { return semtext::Tokenize(s); }

SlotSpec Slot(std::string name, std::string_view words, int min_words = 1, int max_words = 1) {
  return SlotSpec{std::move(name), Split(words), min_words, max_words};
}

bool IsPlaceholder(std::string_view tok) {
  return tok.size() > 2 && tok.front() == '{' && tok.back() == '}';
}

}  // namespace

GrammarConfig DefaultGrammar() {
  GrammarConfig g;
  g.domains = {
      {"alarm",
       "CREATE_ALARM",
       {Slot("DATE_TIME", "tomorrow tonight monday friday seven eight noon", 1, 2),
        Slot("ALARM_NAME", "workout school medicine gym laundry")},
       {"set an alarm for {DATE_TIME}", "wake me up {DATE_TIME}",
        "set an alarm called {ALARM_NAME} for {DATE_TIME}", "create a {ALARM_NAME} alarm"}},
      {"messaging",
       "SEND_MESSAGE",
       {Slot("RECIPIENT", "mom dad sarah john emily grandma"),
        Slot("CONTENT_EXACT", "running late see you soon love dinner ready home now", 1, 3)},
       {"send a message to {RECIPIENT}", "text {RECIPIENT} {CONTENT_EXACT}",
        "tell {RECIPIENT} that {CONTENT_EXACT}", "message {RECIPIENT} saying {CONTENT_EXACT}"}},
      {"music",
       "PLAY_MUSIC",
       {Slot("MUSIC_ARTIST_NAME", "adele drake beyonce coldplay shakira eminem"),
        Slot("MUSIC_GENRE", "jazz rock country classical pop blues")},
       {"play some {MUSIC_GENRE}", "play {MUSIC_ARTIST_NAME}",
        "play {MUSIC_GENRE} music by {MUSIC_ARTIST_NAME}", "put on {MUSIC_ARTIST_NAME} songs"}},
      {"navigation",
       "GET_DIRECTIONS",
       {Slot("DESTINATION", "airport downtown library hospital station mall park"),
        Slot("METHOD_TRAVEL", "car bus train walking driving")},
       {"directions to {DESTINATION}", "how do i get to {DESTINATION} by {METHOD_TRAVEL}",
        "navigate to {DESTINATION}", "show me the {METHOD_TRAVEL} route to {DESTINATION}"}},
      {"timer",
       "CREATE_TIMER",
       {Slot("DURATION", "five ten twenty thirty minutes seconds hours", 1, 2),
        Slot("TIMER_NAME", "pasta cookie tea egg pizza")},
       {"set a timer for {DURATION}", "start a {TIMER_NAME} timer for {DURATION}",
        "timer {DURATION}", "start a {TIMER_NAME} timer"}},
      {"weather",
       "GET_WEATHER",
       {Slot("LOCATION", "boston paris london seattle chicago tokyo denver"),
        Slot("WEATHER_ATTRIBUTE", "rain snow hot cold sunny windy")},
       {"what is the weather in {LOCATION}", "will it {WEATHER_ATTRIBUTE} in {LOCATION}",
        "is it going to {WEATHER_ATTRIBUTE}", "weather forecast for {LOCATION}"}},
      {"reminder",
       "CREATE_REMINDER",
       {Slot("TODO", "call dentist buy milk pay rent water plants", 1, 2),
        Slot("REMINDER_DATE_TIME", "sunday tuesday evening nine week afternoon", 1, 2)},
       {"remind me to {TODO}", "remind me to {TODO} {REMINDER_DATE_TIME}",
        "set a reminder {REMINDER_DATE_TIME} to {TODO}"}},
      {"event",
       "GET_EVENT",
       {Slot("CATEGORY_EVENT", "concerts festivals comedy theater sports art"),
        Slot("EVENT_TIME", "weekend saturday month tonight later", 1, 2)},
       {"find {CATEGORY_EVENT} events {EVENT_TIME}", "any {CATEGORY_EVENT} happening {EVENT_TIME}",
        "what {CATEGORY_EVENT} is on {EVENT_TIME}", "events {EVENT_TIME}"}},
  };
  return g;
}

void ValidateGrammar(const GrammarConfig& grammar) {
  if (grammar.domains.empty()) throw InvalidGrammar("no domains");
  if (grammar.min_utterance_words < 1 || grammar.max_utterance_words < grammar.min_utterance_words)
    throw InvalidGrammar("bad utterance length bounds");
  semtext::Ontology probe;
  for (const auto& d : grammar.domains) {
    if (d.templates.empty()) throw InvalidGrammar("domain '" + d.domain + "' has no templates");
    // Round-trip the labels through the parse validator.
    std::vector<semtext::ParseNode> slots;
    for (const auto& s : d.slots) {
      if (s.words.empty()) throw InvalidGrammar("slot '" + s.name + "' has no words");
      if (s.min_words < 1 || s.max_words < s.min_words)
        throw InvalidGrammar("slot '" + s.name + "' has bad length bounds");
      std::vector<semtext::ParseNode> words;
      for (const auto& w : s.words) words.push_back(semtext::ParseNode::Word(w));
      slots.push_back(semtext::ParseNode::Slot(s.name, std::move(words)));
    }
    try {
      semtext::SemanticParse(semtext::ParseNode::Intent(d.intent, std::move(slots)));
    } catch (const MalformedParse& e) {
      throw InvalidGrammar(std::string("domain '") + d.domain + "': " + e.what());
    }
    for (const auto& t : d.templates) {
      for (const auto& tok : Split(t)) {
        if (!IsPlaceholder(tok)) continue;
        const std::string name = tok.substr(1, tok.size() - 2);
        bool found = std::any_of(d.slots.begin(), d.slots.end(),
                                 [&](const SlotSpec& s) { return s.name == name; });
        if (!found)
          throw InvalidGrammar("template '" + t + "' references unknown slot '" + name + "'");
      }
    }
  }
}

Vocabulary::Vocabulary(std::vector<std::string> words) : words_(std::move(words)) {
  std::sort(words_.begin(), words_.end());
  words_.erase(std::unique(words_.begin(), words_.end()), words_.end());
  for (std::size_t i = 0; i < words_.size(); ++i) index_.emplace(words_[i], static_cast<int>(i));
}

bool Vocabulary::Contains(std::string_view word) const { return index_.find(word) != index_.end(); }

int Vocabulary::Index(std::string_view word) const {
  auto it = index_.find(word);
  if (it == index_.end()) throw UnknownToken("'" + std::string(word) + "' is not in the vocabulary");
  return it->second;
}

Vocabulary GrammarVocabulary(const GrammarConfig& grammar) {
  std::vector<std::string> words;
  for (const auto& d : grammar.domains) {
    for (const auto& t : d.templates) {
      for (const auto& tok : Split(t)) {
        if (!IsPlaceholder(tok)) words.push_back(tok);
      }
    }
    for (const auto& s : d.slots) words.insert(words.end(), s.words.begin(), s.words.end());
  }
  return Vocabulary(std::move(words));
}

semtext::Ontology GrammarOntology(const GrammarConfig& grammar) {
  semtext::Ontology o;
  for (const auto& d : grammar.domains) {
    o.intents.insert(d.intent);
    for (const auto& s : d.slots) o.slots.insert(s.name);
  }
  return o;
}

}  // namespace slu::simasr
