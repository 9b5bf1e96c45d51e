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

#include "slu/simasr/asr.h"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "slu/errors.h"
#include "slu/nn/layers.h"
#include "slu/random.h"
#include "slu/semtext/metrics.h"

namespace slu::simasr {
namespace {

constexpr int kMaxPositions = 128;

std::string PaddedId(const std::string& prefix, int i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "-%06d", i);
  return prefix + buf;
}

bool IsPlaceholder(const std::string& tok) {
  return tok.size() > 2 && tok.front() == '{' && tok.back() == '}';
}

}  // namespace

void ValidateSimConfig(const SimConfig& cfg) {
  auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (!prob(cfg.p_sub) || !prob(cfg.p_del) || !prob(cfg.p_ins) || cfg.p_sub + cfg.p_del > 1.0)
    throw ConfigError("channel probabilities out of range");
  if (cfg.dim < 2) throw ConfigError("embedding dim must be >= 2");
  if (cfg.frames_min < 1 || cfg.frames_max < cfg.frames_min)
    throw ConfigError("bad frames_per_word range");
  if (cfg.sigma_aud < 0 || cfg.sigma_lp < 0) throw ConfigError("negative sigma");
  if (cfg.alpha < 0 || cfg.beta < 0) throw ConfigError("negative log-prob coefficients");
}

std::vector<Utterance> GenCorpus(const GrammarConfig& grammar, int n, uint64_t seed,
                                 const std::string& id_prefix) {
  if (n < 1) throw ConfigError("corpus size must be >= 1");
  ValidateGrammar(grammar);
  std::vector<Utterance> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    Rng rng(DeriveSeed(seed, "utterance", static_cast<uint64_t>(i)));
    for (int attempt = 0;; ++attempt) {
      if (attempt > 1000) throw InvalidGrammar("cannot satisfy utterance length bounds");
      const auto& dom = grammar.domains[std::uniform_int_distribution<std::size_t>(
          0, grammar.domains.size() - 1)(rng)];
      const auto& tmpl = dom.templates[std::uniform_int_distribution<std::size_t>(
          0, dom.templates.size() - 1)(rng)];
      TokenSeq words;
      std::vector<semtext::ParseNode> slots;
      for (const auto& tok : semtext::Tokenize(tmpl)) {
        if (!IsPlaceholder(tok)) {
          words.push_back(tok);
          continue;
        }
        const std::string name = tok.substr(1, tok.size() - 2);
        const SlotSpec& slot =
            *std::find_if(dom.slots.begin(), dom.slots.end(),
                          [&](const SlotSpec& s) { return s.name == name; });
        const int len = std::uniform_int_distribution<int>(slot.min_words, slot.max_words)(rng);
        std::vector<semtext::ParseNode> leaves;
        for (int k = 0; k < len; ++k) {
          const auto& w =
              slot.words[std::uniform_int_distribution<std::size_t>(0, slot.words.size() - 1)(rng)];
          words.push_back(w);
          leaves.push_back(semtext::ParseNode::Word(w));
        }
        slots.push_back(semtext::ParseNode::Slot(slot.name, std::move(leaves)));
      }
      const int len = static_cast<int>(words.size());
      if (len < grammar.min_utterance_words || len > grammar.max_utterance_words) continue;
      out.push_back(Utterance{PaddedId(id_prefix, i), dom.domain, std::move(words),
                              semtext::SemanticParse(
                                  semtext::ParseNode::Intent(dom.intent, std::move(slots)))});
      break;
    }
  }
  return out;
}

TokenSeq NoiseChannel(const TokenSeq& ref, const SimConfig& cfg, const Vocabulary& vocab,
                      uint64_t seed) {
  if (ref.empty()) throw EmptyReference("noise channel needs a non-empty reference");
  Rng rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int v = static_cast<int>(vocab.size());
  std::uniform_int_distribution<int> any_word(0, v - 1);
  TokenSeq out;
  for (const auto& word : ref) {
    const double r = unit(rng);
    if (r < cfg.p_sub) {
      // Uniform over the vocabulary minus the true word.
      int k = std::uniform_int_distribution<int>(0, v - 2)(rng);
      const int true_index = vocab.Contains(word) ? vocab.Index(word) : v;
      if (k >= true_index) ++k;
      out.push_back(vocab.word(k));
    } else if (r >= cfg.p_sub + cfg.p_del) {
      out.push_back(word);
    }
    if (unit(rng) < cfg.p_ins) out.push_back(vocab.word(any_word(rng)));
  }
  if (out.empty()) out.push_back(vocab.word(any_word(rng)));
  return out;
}

FrozenAsr::FrozenAsr(Vocabulary vocab, SimConfig cfg) : vocab_(std::move(vocab)), cfg_(cfg) {
  ValidateSimConfig(cfg_);
  if (vocab_.size() < 2) throw ConfigError("vocabulary needs at least two words");
  const int d = cfg_.dim;
  Rng rng(DeriveSeed(cfg_.seed, "word_vectors"));
  std::normal_distribution<double> normal(0.0, 1.0);
  word_vectors_.resize(static_cast<Eigen::Index>(vocab_.size()), d);
  for (Eigen::Index i = 0; i < word_vectors_.size(); ++i)
    word_vectors_.data()[i] = static_cast<float>(normal(rng));
  Rng prng(DeriveSeed(cfg_.seed, "audio_projection"));
  audio_projection_.resize(d, d);
  const double scale = 1.0 / std::sqrt(static_cast<double>(d));
  for (Eigen::Index i = 0; i < audio_projection_.size(); ++i)
    audio_projection_.data()[i] = static_cast<float>(normal(prng) * scale);
  positions_ = nn::SinusoidalPositions<float>(kMaxPositions, d);
}

MatrixF FrozenAsr::EmbedAudio(const TokenSeq& ref, uint64_t seed) const {
  if (ref.empty()) throw EmptyReference("audio for an empty reference");
  Rng rng(seed);
  std::uniform_int_distribution<int> frames(cfg_.frames_min, cfg_.frames_max);
  std::vector<int> counts;
  int total = 0;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    counts.push_back(frames(rng));
    total += counts.back();
  }
  std::normal_distribution<double> noise(0.0, 1.0);
  MatrixF out(total, cfg_.dim);
  int row = 0;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    const Eigen::RowVectorXf clean =
        word_vectors_.row(vocab_.Index(ref[i])) * audio_projection_ +
        positions_.row(static_cast<Eigen::Index>(std::min<std::size_t>(i, kMaxPositions - 1)));
    for (int k = 0; k < counts[i]; ++k, ++row) {
      out.row(row) = clean;
      if (cfg_.sigma_aud > 0) {
        for (int c = 0; c < cfg_.dim; ++c)
          out(row, c) += static_cast<float>(cfg_.sigma_aud * noise(rng));
      }
    }
  }
  return out;
}

MatrixF FrozenAsr::EmbedText(const TokenSeq& hyp) const {
  if (hyp.empty()) throw EmptyReference("text embedding of an empty hypothesis");
  MatrixF out(static_cast<Eigen::Index>(hyp.size()), cfg_.dim);
  for (std::size_t u = 0; u < hyp.size(); ++u) {
    out.row(static_cast<Eigen::Index>(u)) =
        word_vectors_.row(vocab_.Index(hyp[u])) +
        positions_.row(static_cast<Eigen::Index>(std::min<std::size_t>(u, kMaxPositions - 1)));
  }
  return out;
}

double FrozenAsr::HypLogprob(const TokenSeq& ref, const TokenSeq& hyp, uint64_t seed) const {
  if (ref.empty()) throw EmptyReference("log-prob of an empty reference");
  Rng rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  const double edits = static_cast<double>(semtext::EditDistance(ref, hyp));
  return -(cfg_.alpha * edits + cfg_.beta * static_cast<double>(hyp.size()) +
           std::abs(cfg_.sigma_lp * noise(rng)));
}

AsrOutput FrozenAsr::Transcribe(const TokenSeq& ref, uint64_t seed) const {
  return Transcribe(ref, cfg_, seed);
}

AsrOutput FrozenAsr::Transcribe(const TokenSeq& ref, const SimConfig& channel,
                                uint64_t seed) const {
  AsrOutput out;
  out.hyp_words = NoiseChannel(ref, channel, vocab_, DeriveSeed(seed, "channel"));
  out.e_txt = EmbedText(out.hyp_words);
  out.e_aud = EmbedAudio(ref, DeriveSeed(seed, "audio"));
  out.hyp_logprob = HypLogprob(ref, out.hyp_words, DeriveSeed(seed, "logprob"));
  out.label = out.hyp_words == ref ? 1 : 0;
  return out;
}

Dataset BuildSplit(const GrammarConfig& grammar, const FrozenAsr& asr, int n, uint64_t seed,
                   const std::string& split_name) {
  auto utts = GenCorpus(grammar, n, DeriveSeed(seed, split_name), split_name);
  Dataset out;
  out.reserve(utts.size());
  for (std::size_t i = 0; i < utts.size(); ++i) {
    AsrOutput asr_out =
        asr.Transcribe(utts[i].ref_words, DeriveSeed(seed, split_name + "/asr", i));
    out.push_back(Record{std::move(utts[i]), std::move(asr_out)});
  }
  return out;
}

Corpus BuildCorpus(const GrammarConfig& grammar, const FrozenAsr& asr, const SplitSizes& sizes,
                   uint64_t seed) {
  return Corpus{BuildSplit(grammar, asr, sizes.train, seed, "train"),
                BuildSplit(grammar, asr, sizes.valid, seed, "valid"),
                BuildSplit(grammar, asr, sizes.test, seed, "test")};
}

double LabelZeroFraction(const Dataset& data) {
  if (data.empty()) return 0.0;
  std::size_t zeros = 0;
  for (const auto& r : data) zeros += r.asr.label == 0 ? 1 : 0;
  return static_cast<double>(zeros) / static_cast<double>(data.size());
}

Dataset BalanceAugment(const Dataset& data, double target_error_fraction, const FrozenAsr& asr,
                       uint64_t seed, const BalanceOptions& options) {
  if (!(target_error_fraction > 0.0 && target_error_fraction < 1.0))
    throw DomainError("target error fraction must be in (0,1)");
  if (data.empty()) throw EmptyDataset("nothing to balance");
  Dataset out = data;
  const double n = static_cast<double>(data.size());
  const double zeros = LabelZeroFraction(data) * n;
  const double current = zeros / n;
  if (std::abs(current - target_error_fraction) <= options.tolerance) return out;

  const bool want_errors = current < target_error_fraction;
  const double needed = want_errors ? (target_error_fraction * n - zeros) / (1.0 - target_error_fraction)
                                    : (zeros - target_error_fraction * n) / target_error_fraction;
  const int to_add = static_cast<int>(std::ceil(needed - 1e-9));

  SimConfig channel = asr.config();
  if (want_errors) {
    channel.p_sub = std::min(1.0, channel.p_sub * options.error_scale);
    channel.p_del = std::min(1.0 - channel.p_sub, channel.p_del * options.error_scale);
    channel.p_ins = std::min(1.0, channel.p_ins * options.error_scale);
  } else {
    channel.p_sub = channel.p_del = channel.p_ins = 0.0;
  }
  const int wanted_label = want_errors ? 0 : 1;

  Rng rng(DeriveSeed(seed, "balance"));
  std::uniform_int_distribution<std::size_t> pick(0, data.size() - 1);
  for (int k = 0; k < to_add; ++k) {
    bool added = false;
    for (int attempt = 0; attempt < options.max_attempts_per_record && !added; ++attempt) {
      const Record& src = data[pick(rng)];
      AsrOutput a = asr.Transcribe(src.utt.ref_words, channel,
                                   DeriveSeed(seed, "balance/asr",
                                              static_cast<uint64_t>(k) * 1000003u + attempt));
      if (a.label != wanted_label) continue;
      Utterance u = src.utt;
      u.id += "-aug" + std::to_string(k);
      out.push_back(Record{std::move(u), std::move(a)});
      added = true;
    }
    if (!added) throw Unreachable("could not draw a record with label " + std::to_string(wanted_label));
  }
  if (std::abs(LabelZeroFraction(out) - target_error_fraction) > options.tolerance)
    throw Unreachable("target fraction not reached");
  return out;
}

}  // namespace slu::simasr
