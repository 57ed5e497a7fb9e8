// include/cswitch/scoring.hpp

// Copyright 2026  The cswitch Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cswitch/corpus.hpp"
#include "cswitch/vocabulary.hpp"

namespace cswitch {

enum class EditOp { Match, Sub, Del, Ins };

/// One alignment step; `ref`/`hyp` index into the token lists, -1 when the
/// side is absent (Del has no hyp, Ins no ref).
struct AlignStep {
  EditOp op = EditOp::Match;
  int ref = -1;
  int hyp = -1;
  bool operator==(const AlignStep&) const = default;
};

struct AlignedPair {
  std::string id;
  std::vector<Token> ref;
  std::vector<Token> hyp;
  std::vector<AlignStep> steps;

  std::size_t cost() const;
};

/// Minimal unit-cost Levenshtein alignment over token surfaces. Among
/// equal-cost paths the backtrace prefers match, then sub, del, ins.
AlignedPair align(std::span<const Token> ref, std::span<const Token> hyp, std::string id = {});

/// Edit distance only, O(min) memory.
std::size_t edit_distance(std::span<const Token> ref, std::span<const Token> hyp);

struct ErrorCounts {
  std::size_t sub = 0;
  std::size_t del = 0;
  std::size_t ins = 0;
  std::size_t n_ref = 0;

  std::size_t errors() const { return sub + del + ins; }
  /// Percent; absent when there are no reference tokens.
  std::optional<double> wer() const;
  ErrorCounts& operator+=(const ErrorCounts& o);
  bool operator==(const ErrorCounts&) const = default;
};

ErrorCounts count_errors(const AlignedPair& pair);

/// Pooled counts over all pairs. Throws EmptyReference when no reference
/// tokens exist.
ErrorCounts wer(std::span<const AlignedPair> pairs);

/// Bucket receiving insertions in utterances with an empty reference.
inline const LangTag kUnknownLang{"unk"};

/// S and D go to the reference token's language, I to the language of the
/// closest preceding reference token (the first reference token when none
/// precedes). Counts partition the pooled counts.
std::map<LangTag, ErrorCounts> wer_per_language(std::span<const AlignedPair> pairs);

using LangLookup = std::function<std::optional<LangTag>(std::string_view)>;
LangLookup lookup_from(const Vocabulary& vocab);

struct Rate {
  std::size_t num = 0;
  std::size_t den = 0;
  std::optional<double> percent() const;
  Rate& operator+=(const Rate& o) {
    num += o.num;
    den += o.den;
    return *this;
  }
  bool operator==(const Rate&) const = default;
};

struct SwitchMetrics {
  std::map<LangTag, Rate> token_correct;
  Rate word_correct_after_switch;
  std::map<LangTag, Rate> word_correct_after_switch_by_lang;
  Rate language_correct_after_switch;
  Rate bigram_correct;
  std::size_t switch_points() const { return word_correct_after_switch.den; }
};

/// Switch points are reference positions i > 0 whose language differs from
/// position i-1. Hypothesis languages come from `lang_of`; unknown words
/// count as language-incorrect.
SwitchMetrics switch_metrics(std::span<const AlignedPair> pairs, const LangLookup& lang_of);

struct ScoreReport {
  ErrorCounts overall;
  std::map<LangTag, ErrorCounts> per_language;
  std::optional<SwitchMetrics> switches;
};

ScoreReport score(std::span<const AlignedPair> pairs, const LangLookup* lang_of);

/// Aligns every reference utterance with the hypothesis of the same id.
/// Untranscribed references are skipped. Throws IdMismatch when the id
/// sets differ.
std::vector<AlignedPair> align_corpora(const Corpus& ref, const Corpus& hyp, unsigned threads = 1);

// ---------------------------------------------------------------------------

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

struct BootstrapOptions {
  std::size_t resamples = 10000;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  double confidence = 0.95;
};

struct BootstrapResult {
  std::size_t resamples = 0;
  std::uint64_t seed = 0;
  double wer_a = 0.0;
  double wer_b = 0.0;
  Interval ci_a;
  Interval ci_b;
  Interval ci_delta;  // WER_A - WER_B
  /// Fraction of resamples where WER_A < WER_B strictly.
  double p_improvement = 0.0;
};

/// Paired bootstrap over utterances. Resample r draws from its own stream
/// derived from (seed, r), so results do not depend on `threads`.
/// Throws IdMismatch when the systems cover different ids and UsageError
/// for fewer than 1000 resamples.
BootstrapResult bootstrap(std::span<const AlignedPair> a, std::span<const AlignedPair> b,
                          const BootstrapOptions& opts);

/// Type-7 percentile of sorted data.
double percentile(std::span<const double> sorted, double q);

}  // namespace cswitch
