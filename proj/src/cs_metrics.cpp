// src/cs_metrics.cpp

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

#include "cswitch/cs_metrics.hpp"

#include <cmath>

#include "cswitch/error.hpp"
#include "cswitch/numeric.hpp"

namespace cswitch {

std::vector<PositionClass> classify_positions(std::span<const Token> tokens) {
  std::vector<PositionClass> out;
  out.reserve(tokens.size());
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const bool sw = i > 0 && tokens[i].lang != tokens[i - 1].lang;
    out.push_back({sw ? PositionKind::Switch : PositionKind::Mono, tokens[i].lang});
  }
  return out;
}

std::optional<double> ClassTally::perplexity() const {
  if (n == 0) return std::nullopt;
  return std::exp(-logprob / static_cast<double>(n));
}

std::optional<double> CsPerplexityReport::mpp(const LangTag& lang) const {
  auto it = mono.find(lang);
  if (it == mono.end()) return std::nullopt;
  return it->second.perplexity();
}

CsPerplexityReport cs_perplexity(const LanguageModel& model, std::span<const Utterance> utterances) {
  CsPerplexityReport r;
  std::map<LangTag, CompensatedSum> mono;
  CompensatedSum mono_all, switches, decomposed, total;
  std::vector<std::string> words;
  for (const Utterance& u : utterances) {
    if (!u.is_transcribed()) continue;
    words.clear();
    for (const Token& t : u.tokens) words.push_back(t.surface);
    const std::vector<double> lps = sentence_logprobs(model, words);
    const std::vector<PositionClass> classes = classify_positions(u.tokens);
    for (std::size_t i = 0; i < classes.size(); ++i) {
      const double lp = lps[i];
      if (classes[i].kind == PositionKind::Switch) {
        r.switches.n += 1;
        switches.add(lp);
      } else {
        r.mono[classes[i].lang].n += 1;
        mono[classes[i].lang].add(lp);
        r.mono_all.n += 1;
        mono_all.add(lp);
      }
      r.decomposed.n += 1;
      decomposed.add(lp);
    }
    r.n_excluded += 1;
    for (double lp : lps) total.add(lp);
    r.n_scored += lps.size();
  }
  if (r.n_scored == 0) throw EmptyEvalSet();
  for (auto& [lang, t] : r.mono) t.logprob = mono[lang].value();
  r.mono_all.logprob = mono_all.value();
  r.switches.logprob = switches.value();
  r.decomposed.logprob = decomposed.value();
  r.total_logprob = total.value();
  r.pp = std::exp(-r.total_logprob / static_cast<double>(r.n_scored));
  return r;
}

}  // namespace cswitch
