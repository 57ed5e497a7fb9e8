// tests/test_cs_metrics.cpp

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

#include <doctest.h>

#include <cmath>
#include <random>

#include "cswitch/cs_metrics.hpp"
#include "cswitch/error.hpp"
#include "lm_oracle.hpp"
#include "test_util.hpp"

using namespace cswitch;
using namespace cswitch::testing;

namespace {

std::shared_ptr<const Vocabulary> vocab_of(std::span<const Utterance> us) {
  std::map<std::string, std::optional<LangTag>> words;
  for (const auto& u : us)
    for (const auto& t : u.tokens) words[t.surface] = t.lang;
  return std::make_shared<const Vocabulary>(words);
}

}  // namespace

TEST_CASE("switch positions") {
  auto t = toks("a/en b/en c/zu d/en e/en");
  auto c = classify_positions(t);
  REQUIRE(c.size() == 5);
  CHECK(c[0] == PositionClass{PositionKind::Mono, LangTag("en")});
  CHECK(c[1] == PositionClass{PositionKind::Mono, LangTag("en")});
  CHECK(c[2] == PositionClass{PositionKind::Switch, LangTag("zu")});
  CHECK(c[3] == PositionClass{PositionKind::Switch, LangTag("en")});
  CHECK(c[4] == PositionClass{PositionKind::Mono, LangTag("en")});
  CHECK(classify_positions(std::span<const Token>()).empty());
}

TEST_CASE("hand-computed decomposition under a unigram model") {
  std::vector<Utterance> us{utt("u1", "a/en b/zu"), utt("u2", "a/en")};
  auto v = vocab_of(us);
  // Witten-Bell unigram over "a a b": a2 b1 </s>2, total 5, 3 types, |V| = 3
  // P(a) = (2 + 1)/8, P(b) = (1 + 1)/8, P(</s>) = (2 + 1)/8
  std::vector<std::vector<std::string>> train_text{{"a", "a", "b"}};
  TrainOptions o;
  o.order = 1;
  o.smoothing = Smoothing::WittenBell;
  std::vector<std::vector<std::string>> s{{"a", "b"}, {"a"}};
  NGramModel m = train(s, v, o);
  CsPerplexityReport r = cs_perplexity(m, us);
  CHECK(r.n_scored == 5);
  CHECK(r.n_excluded == 2);
  CHECK(r.mono_all.n == 2);
  CHECK(r.switches.n == 1);
  CHECK(r.mono.at(LangTag("en")).n == 2);
  CHECK_FALSE(r.mpp(LangTag("zu")));
  CHECK(*r.mpp(LangTag("en")) == doctest::Approx(8.0 / 3).epsilon(1e-14));
  CHECK(*r.cpp() == doctest::Approx(4.0).epsilon(1e-14));
  // (3/8)^2 (2/8) (3/8)^2
  CHECK(r.pp == doctest::Approx(std::pow(8.0 * 8 * 8 * 8 * 8 / (3.0 * 3 * 2 * 3 * 3), 0.2)).epsilon(1e-14));
}

// exp(log V) itself is not V for most integers, so exact means to rounding
TEST_CASE("uniform model gives |V| for every measure") {
  std::mt19937_64 g(2);
  std::vector<Utterance> us;
  for (int i = 0; i < 30; ++i)
    us.push_back({"u" + std::to_string(i), "s", 1.0, random_tokens(g, 3 + i % 9, 7, 0.35)});
  auto v = vocab_of(us);
  NGramModel u = make_uniform(v);
  const double V = static_cast<double>(v->predictable().size());
  CsPerplexityReport r = cs_perplexity(u, us);
  CHECK(std::abs(r.pp - V) <= 1e-13 * V);
  CHECK(std::abs(*r.mpp() - V) <= 1e-13 * V);
  CHECK(std::abs(*r.mpp(LangTag("en")) - V) <= 1e-13 * V);
  CHECK(std::abs(*r.mpp(LangTag("zu")) - V) <= 1e-13 * V);
  CHECK(std::abs(*r.cpp() - V) <= 1e-13 * V);
  CHECK(std::abs(*r.pp_decomposed() - V) <= 1e-13 * V);
}

TEST_CASE("perplexity decomposes over monolingual and switch positions") {
  std::mt19937_64 g(4);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<Utterance> us;
    for (int i = 0; i < 15; ++i)
      us.push_back({"u" + std::to_string(i), "s", 1.0, random_tokens(g, 1 + i % 10, 6, 0.3)});
    auto v = vocab_of(us);
    NGramModel m = train(sentences_of(us), v, {});
    CsPerplexityReport r = cs_perplexity(m, us);
    double lhs = static_cast<double>(r.decomposed.n) * std::log(*r.pp_decomposed());
    double rhs = 0;
    std::size_t nm = 0;
    for (const auto& [lang, t] : r.mono) {
      rhs += static_cast<double>(t.n) * std::log(*t.perplexity());
      nm += t.n;
    }
    if (r.switches.n) rhs += static_cast<double>(r.switches.n) * std::log(*r.cpp());
    CHECK(nm == r.mono_all.n);
    CHECK(r.decomposed.n == nm + r.switches.n);
    CHECK(r.decomposed.n + r.n_excluded == r.n_scored);
    CHECK(std::abs(lhs - rhs) < 1e-9);
    // pp over all positions agrees with the plain perplexity
    CHECK(r.pp == doctest::Approx(perplexity(m, us).pp).epsilon(1e-12));
  }
}

TEST_CASE("monolingual text has no code-switch perplexity") {
  std::vector<Utterance> us{utt("u1", "a/en b/en"), {"u2", "s", 1.0, {}}};
  auto v = vocab_of(us);
  NGramModel u = make_uniform(v);
  CsPerplexityReport r = cs_perplexity(u, us);
  CHECK_FALSE(r.cpp());
  CHECK(r.n_excluded == 1);
  std::vector<Utterance> empty{{"u2", "s", 1.0, {}}};
  CHECK_THROWS_AS(cs_perplexity(u, empty), EmptyEvalSet);
}
