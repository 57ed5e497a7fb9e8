// src/scoring.cpp

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

#include "cswitch/scoring.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "cswitch/error.hpp"
#include "cswitch/parallel.hpp"
#include "cswitch/rng.hpp"

namespace cswitch {

std::size_t AlignedPair::cost() const {
  return static_cast<std::size_t>(
      std::count_if(steps.begin(), steps.end(), [](const AlignStep& s) { return s.op != EditOp::Match; }));
}

AlignedPair align(std::span<const Token> ref, std::span<const Token> hyp, std::string id) {
  const std::size_t n = ref.size();
  const std::size_t m = hyp.size();
  const std::size_t w = m + 1;
  std::vector<std::uint32_t> d((n + 1) * w);
  for (std::size_t j = 0; j <= m; ++j) d[j] = static_cast<std::uint32_t>(j);
  for (std::size_t i = 1; i <= n; ++i) {
    d[i * w] = static_cast<std::uint32_t>(i);
    for (std::size_t j = 1; j <= m; ++j) {
      const std::uint32_t diag = d[(i - 1) * w + j - 1] + (ref[i - 1].surface == hyp[j - 1].surface ? 0 : 1);
      d[i * w + j] = std::min({diag, d[(i - 1) * w + j] + 1, d[i * w + j - 1] + 1});
    }
  }

  AlignedPair out;
  out.id = std::move(id);
  out.ref.assign(ref.begin(), ref.end());
  out.hyp.assign(hyp.begin(), hyp.end());
  std::size_t i = n, j = m;
  while (i > 0 || j > 0) {
    const std::uint32_t here = d[i * w + j];
    if (i > 0 && j > 0) {
      const bool same = ref[i - 1].surface == hyp[j - 1].surface;
      const std::uint32_t diag = d[(i - 1) * w + j - 1];
      if (same && here == diag) {
        out.steps.push_back({EditOp::Match, int(i - 1), int(j - 1)});
        --i, --j;
        continue;
      }
      if (!same && here == diag + 1) {
        out.steps.push_back({EditOp::Sub, int(i - 1), int(j - 1)});
        --i, --j;
        continue;
      }
    }
    if (i > 0 && here == d[(i - 1) * w + j] + 1) {
      out.steps.push_back({EditOp::Del, int(i - 1), -1});
      --i;
      continue;
    }
    out.steps.push_back({EditOp::Ins, -1, int(j - 1)});
    --j;
  }
  std::reverse(out.steps.begin(), out.steps.end());
  return out;
}

std::size_t edit_distance(std::span<const Token> ref, std::span<const Token> hyp) {
  std::vector<std::size_t> prev(hyp.size() + 1), cur(hyp.size() + 1);
  for (std::size_t j = 0; j <= hyp.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= ref.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= hyp.size(); ++j) {
      const std::size_t diag = prev[j - 1] + (ref[i - 1].surface == hyp[j - 1].surface ? 0 : 1);
      cur[j] = std::min({diag, prev[j] + 1, cur[j - 1] + 1});
    }
    std::swap(prev, cur);
  }
  return prev[hyp.size()];
}

std::optional<double> ErrorCounts::wer() const {
  if (n_ref == 0) return std::nullopt;
  return 100.0 * static_cast<double>(errors()) / static_cast<double>(n_ref);
}

ErrorCounts& ErrorCounts::operator+=(const ErrorCounts& o) {
  sub += o.sub;
  del += o.del;
  ins += o.ins;
  n_ref += o.n_ref;
  return *this;
}

ErrorCounts count_errors(const AlignedPair& pair) {
  ErrorCounts c;
  c.n_ref = pair.ref.size();
  for (const AlignStep& s : pair.steps) {
    switch (s.op) {
      case EditOp::Sub: ++c.sub; break;
      case EditOp::Del: ++c.del; break;
      case EditOp::Ins: ++c.ins; break;
      case EditOp::Match: break;
    }
  }
  return c;
}

ErrorCounts wer(std::span<const AlignedPair> pairs) {
  ErrorCounts total;
  for (const AlignedPair& p : pairs) total += count_errors(p);
  if (total.n_ref == 0) throw EmptyReference();
  return total;
}

std::map<LangTag, ErrorCounts> wer_per_language(std::span<const AlignedPair> pairs) {
  std::map<LangTag, ErrorCounts> out;
  for (const AlignedPair& p : pairs) {
    for (const Token& t : p.ref) ++out[t.lang].n_ref;
    const LangTag* last = p.ref.empty() ? &kUnknownLang : &p.ref.front().lang;
    for (const AlignStep& s : p.steps) {
      if (s.op == EditOp::Ins) {
        ++out[*last].ins;
        continue;
      }
      last = &p.ref[static_cast<std::size_t>(s.ref)].lang;
      if (s.op == EditOp::Sub) ++out[*last].sub;
      if (s.op == EditOp::Del) ++out[*last].del;
    }
  }
  return out;
}

LangLookup lookup_from(const Vocabulary& vocab) {
  return [&vocab](std::string_view w) { return vocab.lang_of(w); };
}

std::optional<double> Rate::percent() const {
  if (den == 0) return std::nullopt;
  return 100.0 * static_cast<double>(num) / static_cast<double>(den);
}

SwitchMetrics switch_metrics(std::span<const AlignedPair> pairs, const LangLookup& lang_of) {
  SwitchMetrics m;
  std::vector<const AlignStep*> at_ref;
  for (const AlignedPair& p : pairs) {
    at_ref.assign(p.ref.size(), nullptr);
    for (const AlignStep& s : p.steps)
      if (s.ref >= 0) at_ref[static_cast<std::size_t>(s.ref)] = &s;
    for (std::size_t i = 0; i < p.ref.size(); ++i) {
      const LangTag& lang = p.ref[i].lang;
      const bool ok = at_ref[i]->op == EditOp::Match;
      Rate& tc = m.token_correct[lang];
      ++tc.den;
      tc.num += ok;
      if (i == 0 || p.ref[i - 1].lang == lang) continue;

      ++m.word_correct_after_switch.den;
      m.word_correct_after_switch.num += ok;
      Rate& by_lang = m.word_correct_after_switch_by_lang[lang];
      ++by_lang.den;
      by_lang.num += ok;

      ++m.language_correct_after_switch.den;
      if (at_ref[i]->hyp >= 0) {
        const auto hyp_lang = lang_of(p.hyp[static_cast<std::size_t>(at_ref[i]->hyp)].surface);
        m.language_correct_after_switch.num += hyp_lang && *hyp_lang == lang;
      }

      ++m.bigram_correct.den;
      m.bigram_correct.num += ok && at_ref[i - 1]->op == EditOp::Match;
    }
  }
  return m;
}

ScoreReport score(std::span<const AlignedPair> pairs, const LangLookup* lang_of) {
  ScoreReport r;
  r.overall = wer(pairs);
  r.per_language = wer_per_language(pairs);
  if (lang_of) r.switches = switch_metrics(pairs, *lang_of);
  return r;
}

std::vector<AlignedPair> align_corpora(const Corpus& ref, const Corpus& hyp, unsigned threads) {
  std::vector<const Utterance*> refs;
  for (const Utterance& u : ref.utterances())
    if (u.is_transcribed()) refs.push_back(&u);
  for (const Utterance* u : refs)
    if (!hyp.find(u->id)) throw IdMismatch("hypothesis missing for utterance '" + u->id + "'");
  for (const Utterance& h : hyp.utterances())
    if (!ref.find(h.id)) throw IdMismatch("hypothesis for unknown utterance '" + h.id + "'");
  std::vector<AlignedPair> out(refs.size());
  parallel_for(refs.size(), threads, [&](std::size_t k) {
    out[k] = align(refs[k]->tokens, hyp.at(refs[k]->id).tokens, refs[k]->id);
  });
  return out;
}

// ---------------------------------------------------------------------------

double percentile(std::span<const double> sorted, double q) {
  if (sorted.empty()) return 0.0;
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  if (frac == 0.0 || sorted[lo] == sorted[hi]) return sorted[lo];
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

namespace {

struct UttErrors {
  std::string_view id;
  std::size_t errors = 0;
  std::size_t n_ref = 0;
};

std::vector<UttErrors> per_utterance(std::span<const AlignedPair> pairs) {
  std::vector<UttErrors> out;
  out.reserve(pairs.size());
  for (const AlignedPair& p : pairs) {
    const ErrorCounts c = count_errors(p);
    out.push_back({p.id, c.errors(), c.n_ref});
  }
  std::sort(out.begin(), out.end(), [](const UttErrors& x, const UttErrors& y) { return x.id < y.id; });
  for (std::size_t i = 1; i < out.size(); ++i)
    if (out[i].id == out[i - 1].id) throw IdMismatch(fmt::format("utterance '{}' scored twice", out[i].id));
  return out;
}

double pct(std::size_t e, std::size_t n) {
  return n == 0 ? 0.0 : 100.0 * static_cast<double>(e) / static_cast<double>(n);
}

Interval interval(std::vector<double>& v, double confidence) {
  std::sort(v.begin(), v.end());
  const double tail = (1.0 - confidence) / 2.0;
  return {percentile(v, tail), percentile(v, 1.0 - tail)};
}

}  // namespace

BootstrapResult bootstrap(std::span<const AlignedPair> a, std::span<const AlignedPair> b,
                          const BootstrapOptions& opts) {
  if (opts.resamples < 1000)
    throw UsageError(fmt::format("bootstrap needs at least 1000 resamples (got {})", opts.resamples));
  if (!(opts.confidence > 0.0 && opts.confidence < 1.0))
    throw UsageError("confidence level must lie in (0, 1)");
  const std::vector<UttErrors> ua = per_utterance(a);
  const std::vector<UttErrors> ub = per_utterance(b);
  if (ua.size() != ub.size()) throw IdMismatch("systems cover different numbers of utterances");
  for (std::size_t i = 0; i < ua.size(); ++i) {
    if (ua[i].id != ub[i].id)
      throw IdMismatch(fmt::format("utterance '{}' is not scored for both systems", ua[i].id < ub[i].id ? ua[i].id : ub[i].id));
    if (ua[i].n_ref != ub[i].n_ref)
      throw IdMismatch(fmt::format("utterance '{}' has different references", ua[i].id));
  }
  std::size_t ea = 0, eb = 0, n = 0;
  for (std::size_t i = 0; i < ua.size(); ++i) {
    ea += ua[i].errors;
    eb += ub[i].errors;
    n += ua[i].n_ref;
  }
  if (n == 0) throw EmptyReference();

  const std::size_t count = ua.size();
  const std::size_t R = opts.resamples;
  std::vector<double> wa(R), wb(R), delta(R);
  std::vector<unsigned char> better(R);
  parallel_for(R, opts.threads, [&](std::size_t r) {
    auto g = derive_stream(opts.seed, std::uint64_t{r});
    std::size_t sa = 0, sb = 0, sn = 0;
    for (std::size_t k = 0; k < count; ++k) {
      const std::size_t i = uniform_index(g, count);
      sa += ua[i].errors;
      sb += ub[i].errors;
      sn += ua[i].n_ref;
    }
    wa[r] = pct(sa, sn);
    wb[r] = pct(sb, sn);
    delta[r] = sn == 0 ? 0.0 : 100.0 * (static_cast<double>(sa) - static_cast<double>(sb)) / static_cast<double>(sn);
    better[r] = sa < sb;
  });

  BootstrapResult res;
  res.resamples = R;
  res.seed = opts.seed;
  res.wer_a = pct(ea, n);
  res.wer_b = pct(eb, n);
  std::size_t wins = 0;
  for (unsigned char x : better) wins += x;
  res.p_improvement = static_cast<double>(wins) / static_cast<double>(R);
  res.ci_a = interval(wa, opts.confidence);
  res.ci_b = interval(wb, opts.confidence);
  res.ci_delta = interval(delta, opts.confidence);
  return res;
}

}  // namespace cswitch
