// tests/lm_oracle.hpp

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

// Brute-force interpolated smoothing computed straight from counts, with no
// back-off tables. Used to check the trained models.

#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "cswitch/ngram_lm.hpp"

namespace cswitch::testing {

using Gram = std::vector<std::string>;

class SmoothingOracle {
 public:
  SmoothingOracle(const std::vector<std::vector<std::string>>& sentences, std::size_t vocab_predictable,
                  int order, Smoothing sm)
      : n_(order), sm_(sm), v_(static_cast<double>(vocab_predictable)) {
    std::vector<std::map<Gram, std::uint64_t>> raw(n_);
    for (const auto& s : sentences) {
      Gram ids{"<s>"};
      ids.insert(ids.end(), s.begin(), s.end());
      ids.push_back("</s>");
      for (std::size_t j = 1; j < ids.size(); ++j)
        for (int k = 1; k <= n_ && static_cast<std::size_t>(k) <= j + 1; ++k)
          ++raw[k - 1][Gram(ids.begin() + (j + 1 - k), ids.begin() + j + 1)];
    }
    counts_ = raw;
    if (sm_ == Smoothing::KneserNey) {
      for (int k = 1; k < n_; ++k) {
        std::map<Gram, std::uint64_t> t;
        for (const auto& [g, c] : raw[k - 1])
          if (g[0] == "<s>") t[g] = c;
        for (const auto& [g, c] : raw[k]) {
          Gram tail(g.begin() + 1, g.end());
          if (tail[0] != "<s>") ++t[tail];
        }
        counts_[k - 1] = t;
      }
      for (int k = 0; k < n_; ++k) {
        std::array<double, 5> nc{};
        for (const auto& [g, c] : counts_[k])
          if (c <= 4) nc[c] += 1;
        if (nc[1] == 0 || nc[2] == 0 || nc[3] == 0) {
          fell_back_ = true;
          break;
        }
        double y = nc[1] / (nc[1] + 2 * nc[2]);
        std::array<double, 4> d{0, 1 - 2 * y * nc[2] / nc[1], 2 - 3 * y * nc[3] / nc[2],
                                3 - 4 * y * nc[4] / nc[3]};
        for (int c = 1; c <= 3; ++c)
          if (!(d[c] > 0 && d[c] <= c)) fell_back_ = true;
        disc_.push_back(d);
      }
      if (fell_back_) {
        sm_ = Smoothing::WittenBell;
        counts_ = raw;
      }
    }
  }

  Smoothing smoothing() const { return sm_; }

  // P(w | h), h oldest-first, any length
  double prob(Gram h, const std::string& w) const {
    if (static_cast<int>(h.size()) > n_ - 1) h.erase(h.begin(), h.end() - (n_ - 1));
    return p(static_cast<int>(h.size()) + 1, h, w);
  }

 private:
  double p(int k, const Gram& h, const std::string& w) const {
    const double lower = k == 1 ? 1.0 / v_ : p(k - 1, Gram(h.begin() + 1, h.end()), w);
    double total = 0, distinct = 0, dmass = 0;
    std::uint64_t cw = 0;
    const auto& table = counts_[k - 1];
    for (auto it = table.lower_bound(h); it != table.end(); ++it) {
      const auto& [g, c] = *it;
      if (!std::equal(h.begin(), h.end(), g.begin())) break;
      total += static_cast<double>(c);
      distinct += 1;
      if (sm_ == Smoothing::KneserNey) dmass += disc_[k - 1][std::min<std::uint64_t>(c, 3)];
      if (g.back() == w) cw = c;
    }
    if (total == 0) return lower;
    if (sm_ == Smoothing::KneserNey) {
      double alpha = cw == 0 ? 0.0 : (static_cast<double>(cw) - disc_[k - 1][std::min<std::uint64_t>(cw, 3)]) / total;
      return alpha + dmass / total * lower;
    }
    return (static_cast<double>(cw) + distinct * lower) / (total + distinct);
  }

  int n_;
  Smoothing sm_;
  double v_;
  bool fell_back_ = false;
  std::vector<std::map<Gram, std::uint64_t>> counts_;
  std::vector<std::array<double, 4>> disc_;
};

// Toy corpus over words w0..w{V-1}, total tokens <= max_tokens.
inline std::vector<std::vector<std::string>> toy_corpus(std::mt19937_64& g, std::size_t vocab,
                                                        std::size_t max_tokens) {
  std::uniform_int_distribution<std::size_t> len(1, 12);
  // skewed word choice so counts-of-counts are populated
  std::vector<double> weights(vocab);
  for (std::size_t i = 0; i < vocab; ++i) weights[i] = 1.0 / static_cast<double>(i + 1);
  std::discrete_distribution<std::size_t> word(weights.begin(), weights.end());
  std::vector<std::vector<std::string>> out;
  std::size_t used = 0;
  while (true) {
    std::size_t n = len(g);
    if (used + n > max_tokens) break;
    std::vector<std::string> s;
    for (std::size_t i = 0; i < n; ++i) s.push_back("w" + std::to_string(word(g)));
    out.push_back(std::move(s));
    used += n;
  }
  return out;
}

inline std::shared_ptr<const Vocabulary> toy_vocab(std::size_t vocab) {
  std::map<std::string, std::optional<LangTag>> words;
  for (std::size_t i = 0; i < vocab; ++i) words["w" + std::to_string(i)] = LangTag(i % 2 ? "zu" : "en");
  return std::make_shared<const Vocabulary>(words);
}

// Random context of up to order-1 ids; may start with <s>.
inline std::vector<WordId> random_context(std::mt19937_64& g, const Vocabulary& v, int order) {
  std::uniform_int_distribution<int> len(0, std::max(0, order - 1));
  std::uniform_int_distribution<std::size_t> pick(0, v.predictable().size() - 1);
  std::bernoulli_distribution bos(0.3);
  int n = len(g);
  std::vector<WordId> h;
  for (int i = 0; i < n; ++i) {
    WordId w;
    do w = v.predictable()[pick(g)];
    while (w == Vocabulary::kEos);
    h.push_back(w);
  }
  if (!h.empty() && bos(g)) h[0] = Vocabulary::kBos;
  return h;
}

inline double mass(const LanguageModel& m, std::span<const WordId> h) {
  double s = 0;
  for (WordId w : m.vocab().predictable()) s += std::exp(m.logprob(h, w));
  return s;
}

}  // namespace cswitch::testing
