// include/cswitch/cs_metrics.hpp

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
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "cswitch/corpus.hpp"
#include "cswitch/ngram_lm.hpp"

namespace cswitch {

enum class PositionKind { Mono, Switch, Excluded };

/// Class of one scored position. Mono positions carry their language;
/// Switch positions carry the language switched into.
struct PositionClass {
  PositionKind kind = PositionKind::Excluded;
  LangTag lang;
  bool operator==(const PositionClass&) const = default;
};

/// One class per token: position i > 0 is a switch iff its language differs
/// from token i-1; the first token is monolingual for its own language.
/// Sentence-end positions are not included (they are always Excluded).
std::vector<PositionClass> classify_positions(std::span<const Token> tokens);

struct ClassTally {
  std::size_t n = 0;
  double logprob = 0.0;
  /// exp(-logprob / n); absent when n == 0.
  std::optional<double> perplexity() const;
};

struct CsPerplexityReport {
  double pp = 0.0;             // over every word and sentence end
  std::size_t n_scored = 0;
  double total_logprob = 0.0;
  std::map<LangTag, ClassTally> mono;  // per language
  ClassTally mono_all;
  ClassTally switches;
  ClassTally decomposed;  // mono_all + switches (sentence ends excluded)
  std::size_t n_excluded = 0;

  std::optional<double> mpp(const LangTag& lang) const;
  std::optional<double> mpp() const { return mono_all.perplexity(); }
  /// Absent when the text has no switch points.
  std::optional<double> cpp() const { return switches.perplexity(); }
  std::optional<double> pp_decomposed() const { return decomposed.perplexity(); }
};

/// Perplexity decomposed into monolingual and code-switch positions.
/// Untranscribed utterances are skipped; throws EmptyEvalSet when nothing
/// is scored.
CsPerplexityReport cs_perplexity(const LanguageModel& model, std::span<const Utterance> utterances);

}  // namespace cswitch
