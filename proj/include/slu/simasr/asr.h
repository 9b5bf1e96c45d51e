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

#ifndef SLU_SIMASR_ASR_H_
#define SLU_SIMASR_ASR_H_

#include <cstdint>
#include <string>
#include <vector>

#include "slu/matrix.h"
#include "slu/semtext/parse.h"
#include "slu/simasr/grammar.h"

namespace slu::simasr {

// Error and embedding model of the simulated frozen recognizer.
struct SimConfig {
  double p_sub = 0.042;
  double p_del = 0.0105;
  double p_ins = 0.0105;
  int dim = 32;
  int frames_min = 2;
  int frames_max = 4;
  double sigma_aud = 4.0;
  // hyp_logprob = -(alpha·edits + beta·len(hyp) + |N(0, sigma_lp²)|)
  double alpha = 1.5;
  double beta = 0.1;
  double sigma_lp = 1.0;
  // Seeds the frozen embedding tables.
  uint64_t seed = 7;
};

// Throws ConfigError when probabilities or scales are out of range.
void ValidateSimConfig(const SimConfig& cfg);

struct Utterance {
  std::string id;
  std::string domain;
  TokenSeq ref_words;
  semtext::SemanticParse parse;
};

struct AsrOutput {
  TokenSeq hyp_words;
  MatrixF e_txt;  // U × D
  MatrixF e_aud;  // T × D
  double hyp_logprob = 0.0;
  int label = 0;  // 1 iff hyp_words == ref_words
};

struct Record {
  Utterance utt;
  AsrOutput asr;
};

using Dataset = std::vector<Record>;

struct Corpus {
  Dataset train, valid, test;
};

struct SplitSizes {
  int train = 8000;
  int valid = 1000;
  int test = 2000;
};

// Samples `n` utterances from the template grammar. Deterministic in
// (grammar, n, seed, id_prefix). Throws InvalidGrammar.
std::vector<Utterance> GenCorpus(const GrammarConfig& grammar, int n, uint64_t seed,
                                 const std::string& id_prefix = "utt");

// I.i.d. per-position substitution / deletion, then insertion after each
// position. Never returns an empty sequence.
TokenSeq NoiseChannel(const TokenSeq& ref, const SimConfig& cfg, const Vocabulary& vocab,
                      uint64_t seed);

// The simulated frozen recognizer: fixed seeded word vectors, a fixed audio
// projection, and the output simulators. Immutable after construction.
class FrozenAsr {
 public:
  FrozenAsr(Vocabulary vocab, SimConfig cfg);

  const SimConfig& config() const { return cfg_; }
  const Vocabulary& vocabulary() const { return vocab_; }
  int dim() const { return cfg_.dim; }

  const MatrixF& word_vectors() const { return word_vectors_; }
  const MatrixF& audio_projection() const { return audio_projection_; }

  // Each word expands to k frames, k uniform in [frames_min, frames_max];
  // frame = proj(wordvec) + position code of the word index + N(0, sigma²).
  MatrixF EmbedAudio(const TokenSeq& ref, uint64_t seed) const;
  // Word vector plus sinusoidal position code. Throws UnknownToken.
  MatrixF EmbedText(const TokenSeq& hyp) const;
  double HypLogprob(const TokenSeq& ref, const TokenSeq& hyp, uint64_t seed) const;

  // Runs the channel and all three simulators for one utterance.
  AsrOutput Transcribe(const TokenSeq& ref, uint64_t seed) const;
  AsrOutput Transcribe(const TokenSeq& ref, const SimConfig& channel, uint64_t seed) const;

 private:
  Vocabulary vocab_;
  SimConfig cfg_;
  MatrixF word_vectors_;      // |V| × D
  MatrixF audio_projection_;  // D × D
  MatrixF positions_;         // max positions × D
};

// Builds train/valid/test splits with per-split derived seeds.
Corpus BuildCorpus(const GrammarConfig& grammar, const FrozenAsr& asr, const SplitSizes& sizes,
                   uint64_t seed);
Dataset BuildSplit(const GrammarConfig& grammar, const FrozenAsr& asr, int n, uint64_t seed,
                   const std::string& split_name);

double LabelZeroFraction(const Dataset& data);

struct BalanceOptions {
  // Multiplier on p_sub/p_del/p_ins when error records are needed.
  double error_scale = 5.0;
  // Accepted distance from the target fraction.
  double tolerance = 0.02;
  // Draw attempts per added record before giving up.
  int max_attempts_per_record = 50;
};

// Adds re-transcribed copies of resampled utterances until the label-0
// fraction is within tolerance of `target_error_fraction`. Error records come
// from a channel with scaled-up probabilities, clean records from a
// noiseless one. Original records are kept, in order, at the front.
// Throws Unreachable when the draws cannot produce the needed label.
Dataset BalanceAugment(const Dataset& data, double target_error_fraction, const FrozenAsr& asr,
                       uint64_t seed, const BalanceOptions& options = {});

}  // namespace slu::simasr

#endif  // SLU_SIMASR_ASR_H_
