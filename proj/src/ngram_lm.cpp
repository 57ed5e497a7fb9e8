// src/ngram_lm.cpp

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

#include "cswitch/ngram_lm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include <spdlog/spdlog.h>

#include "cswitch/error.hpp"
#include "cswitch/numeric.hpp"

namespace cswitch {

namespace {

constexpr double kLn10 = 2.302585092994045684;

// Log-probability stored for the unpredictable `<s>` unigram (-99 in log10).
constexpr double kBosLogprob = -99.0 * kLn10;

double log_sum_exp(std::span<const double> terms) {
  double hi = -std::numeric_limits<double>::infinity();
  for (double t : terms) hi = std::max(hi, t);
  if (!std::isfinite(hi)) return hi;
  double s = 0.0;
  for (double t : terms) s += std::exp(t - hi);
  return hi + std::log(s);
}

}  // namespace

NGramKey::NGramKey(std::span<const WordId> words) {
  if (words.size() > static_cast<std::size_t>(kMaxOrder))
    throw std::invalid_argument("n-gram longer than the maximum order");
  std::copy(words.begin(), words.end(), ids.begin());
  n = static_cast<std::uint8_t>(words.size());
}

std::size_t NGramKeyHash::operator()(const NGramKey& k) const noexcept {
  std::uint64_t h = 1469598103934665603ull ^ k.n;
  for (std::size_t i = 0; i < k.n; ++i) {
    h ^= k.ids[i];
    h *= 1099511628211ull;
    h ^= h >> 29;
  }
  return static_cast<std::size_t>(h);
}

std::string to_string(Smoothing s) {
  return s == Smoothing::KneserNey ? "kneser-ney" : "witten-bell";
}

Smoothing smoothing_from_string(std::string_view s) {
  if (s == "kneser-ney" || s == "kn") return Smoothing::KneserNey;
  if (s == "witten-bell" || s == "wb") return Smoothing::WittenBell;
  throw UsageError("unknown smoothing '" + std::string(s) + "'");
}

double LanguageModel::logprob(const std::vector<std::string>& context,
                              std::string_view word) const {
  std::vector<WordId> ids;
  ids.reserve(context.size());
  for (const auto& w : context) ids.push_back(vocab().id(w));
  return logprob(ids, vocab().id(word));
}

// ---------------------------------------------------------------------------

NGramModel::NGramModel(std::shared_ptr<const Vocabulary> vocab, std::vector<NGramTable> tables,
                       std::optional<Smoothing> smoothing)
    : vocab_(std::move(vocab)), tables_(std::move(tables)), smoothing_(smoothing) {
  if (!vocab_) throw std::invalid_argument("NGramModel needs a vocabulary");
  if (tables_.empty() || tables_.size() > static_cast<std::size_t>(kMaxOrder))
    throw DataError("model order must be in [1, " + std::to_string(kMaxOrder) + "]");
}

const NGramEntry* NGramModel::find(std::span<const WordId> ngram) const {
  if (ngram.empty() || ngram.size() > tables_.size()) return nullptr;
  const auto& t = tables_[ngram.size() - 1];
  auto it = t.find(NGramKey(ngram));
  return it == t.end() ? nullptr : &it->second;
}

double NGramModel::logprob(std::span<const WordId> context, WordId word) const {
  if (word >= vocab_->size()) throw OOVQuery("#" + std::to_string(word));
  if (word == Vocabulary::kBos) throw OOVQuery(std::string(Vocabulary::kBosWord));
  for (WordId c : context)
    if (c >= vocab_->size()) throw OOVQuery("#" + std::to_string(c));

  const std::size_t n = std::min(context.size(), tables_.size() - 1);
  auto hist = context.last(n);
  std::array<WordId, kMaxOrder> buf{};
  double backoff = 0.0;
  for (std::size_t len = n;; --len) {
    auto h = hist.last(len);
    std::copy(h.begin(), h.end(), buf.begin());
    buf[len] = word;
    if (const NGramEntry* e = find(std::span<const WordId>(buf.data(), len + 1)))
      return backoff + e->logprob;
    if (len == 0) throw OOVQuery(vocab_->word(word));
    if (const NGramEntry* c = find(h)) backoff += c->backoff;
  }
}

std::vector<std::pair<NGramKey, NGramEntry>> NGramModel::sorted_entries(int n) const {
  const auto& t = tables_.at(n - 1);
  std::vector<std::pair<NGramKey, NGramEntry>> out(t.begin(), t.end());
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  return out;
}

// ---------------------------------------------------------------------------
// Training

namespace {

using CountTable = std::unordered_map<NGramKey, std::uint64_t, NGramKeyHash>;

struct ContextStats {
  std::uint64_t total = 0;     // sum of effective counts
  std::uint64_t distinct = 0;  // number of distinct continuations
  double discount_mass = 0.0;  // KN: sum of discounts
};

struct Discounts {
  std::array<double, 4> d{0.0, 0.0, 0.0, 0.0};  // d[c] for c = 1, 2, 3+
  double operator()(std::uint64_t c) const { return c == 0 ? 0.0 : d[std::min<std::uint64_t>(c, 3)]; }
};

/// Modified Kneser-Ney discounts from counts-of-counts; nullopt when the
/// statistics do not define them.
std::optional<Discounts> modified_kn_discounts(const CountTable& counts) {
  std::array<double, 5> n{};
  for (const auto& [k, c] : counts)
    if (c >= 1 && c <= 4) n[c] += 1.0;
  if (n[1] == 0 || n[2] == 0 || n[3] == 0) return std::nullopt;
  const double y = n[1] / (n[1] + 2.0 * n[2]);
  Discounts d;
  d.d[1] = 1.0 - 2.0 * y * n[2] / n[1];
  d.d[2] = 2.0 - 3.0 * y * n[3] / n[2];
  d.d[3] = 3.0 - 4.0 * y * n[4] / n[3];
  for (int c = 1; c <= 3; ++c)
    if (!(d.d[c] > 0.0 && d.d[c] <= c)) return std::nullopt;
  return d;
}

NGramKey prefix(const NGramKey& k) {
  NGramKey p = k;
  p.ids[k.n - 1] = NGramKey::kNone;
  --p.n;
  return p;
}

NGramKey suffix(const NGramKey& k) {
  return NGramKey(k.view().subspan(1));
}

}  // namespace

std::vector<std::vector<std::string>> sentences_of(std::span<const Utterance> utterances) {
  std::vector<std::vector<std::string>> out;
  for (const auto& u : utterances) {
    if (!u.is_transcribed()) continue;
    std::vector<std::string> s;
    s.reserve(u.tokens.size());
    for (const auto& t : u.tokens) s.push_back(t.surface);
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<std::vector<std::string>> sentences_of(const Corpus& corpus, const Manifest* split) {
  if (!split) return sentences_of(corpus.utterances());
  std::vector<Utterance> picked;
  for (const auto& e : split->entries()) picked.push_back(corpus.at(e.id));
  return sentences_of(picked);
}

NGramModel train(std::span<const std::vector<std::string>> sentences,
                 std::shared_ptr<const Vocabulary> vocab, const TrainOptions& opts) {
  if (opts.order < 1 || opts.order > kMaxOrder)
    throw UsageError("order must be in [1, " + std::to_string(kMaxOrder) + "]");
  const std::size_t order = static_cast<std::size_t>(opts.order);

  // Raw counts of every n-gram ending at a predicted position.
  std::vector<CountTable> raw(order);
  for (const auto& sent : sentences) {
    std::vector<WordId> ids{Vocabulary::kBos};
    for (const auto& w : sent) {
      auto id = vocab->find(w);
      if (!id || vocab->is_special(*id)) {
        if (vocab->is_open() && !id) {
          ids.push_back(vocab->unk());
          continue;
        }
        throw OOVInTraining(w);
      }
      ids.push_back(*id);
    }
    ids.push_back(Vocabulary::kEos);
    for (std::size_t j = 1; j < ids.size(); ++j)
      for (std::size_t k = 1; k <= order && k <= j + 1; ++k)
        ++raw[k - 1][NGramKey(std::span<const WordId>(ids).subspan(j + 1 - k, k))];
  }

  Smoothing smoothing = opts.smoothing;
  std::vector<CountTable> eff;
  std::vector<Discounts> discounts(order);
  if (smoothing == Smoothing::KneserNey) {
    // Lower orders use continuation counts, except n-grams starting with <s>
    // which have no left context and keep their raw counts.
    eff.assign(order, {});
    eff[order - 1] = raw[order - 1];
    for (std::size_t k = 1; k < order; ++k) {
      auto& table = eff[k - 1];
      for (const auto& [key, c] : raw[k - 1])
        if (key.ids[0] == Vocabulary::kBos) table[key] = c;
      for (const auto& [key, c] : raw[k]) {
        NGramKey tail = suffix(key);
        if (tail.ids[0] != Vocabulary::kBos) ++table[tail];
      }
    }
    for (std::size_t k = 0; k < order && smoothing == Smoothing::KneserNey; ++k) {
      auto d = modified_kn_discounts(eff[k]);
      if (!d) {
        const std::string why = "Kneser-Ney discounts undefined for order " + std::to_string(k + 1) +
                                " (degenerate count-of-count statistics)";
        if (!opts.allow_fallback) throw InsufficientData(why);
        spdlog::warn("{}; falling back to Witten-Bell", why);
        smoothing = Smoothing::WittenBell;
      } else {
        discounts[k] = *d;
      }
    }
  }
  if (smoothing == Smoothing::WittenBell) eff = raw;

  auto shared = vocab;
  std::vector<NGramTable> tables(order);
  const double uniform = 1.0 / static_cast<double>(vocab->predictable().size());

  for (std::size_t k = 1; k <= order; ++k) {
    const CountTable& counts = eff[k - 1];
    std::unordered_map<NGramKey, ContextStats, NGramKeyHash> ctx;
    for (const auto& [key, c] : counts) {
      ContextStats& s = ctx[prefix(key)];
      s.total += c;
      ++s.distinct;
      if (smoothing == Smoothing::KneserNey) s.discount_mass += discounts[k - 1](c);
    }
    auto gamma_of = [&](const ContextStats& s) {
      return smoothing == Smoothing::KneserNey
                 ? s.discount_mass / static_cast<double>(s.total)
                 : static_cast<double>(s.distinct) / static_cast<double>(s.total + s.distinct);
    };

    // Lower-order model built so far, for interpolation.
    std::vector<NGramTable> lower_tables(tables.begin(), tables.begin() + (k - 1));
    std::unique_ptr<NGramModel> lower;
    if (k > 1) lower = std::make_unique<NGramModel>(shared, lower_tables, smoothing);

    NGramTable& table = tables[k - 1];
    auto emit = [&](const NGramKey& key, std::uint64_t c, const ContextStats& s) {
      const double total = static_cast<double>(s.total);
      const double alpha = smoothing == Smoothing::KneserNey
                               ? (static_cast<double>(c) - discounts[k - 1](c)) / total
                               : static_cast<double>(c) / (total + static_cast<double>(s.distinct));
      const double low = k == 1 ? uniform
                                : std::exp(lower->logprob(key.view().first(k - 1), key.ids[k - 1]));
      table[key].logprob = std::log(alpha + gamma_of(s) * low);
    };
    for (const auto& [key, c] : counts) emit(key, c, ctx.at(prefix(key)));

    if (k == 1) {
      // Unseen words get the floor mass of the empty context.
      const ContextStats& s = ctx[NGramKey()];
      const double gamma = s.total == 0 ? 1.0 : gamma_of(s);
      for (WordId w : vocab->predictable()) {
        NGramKey key(std::span<const WordId>(&w, 1));
        if (!table.contains(key)) table[key].logprob = std::log(gamma * uniform);
      }
      table[NGramKey(std::span<const WordId>(&Vocabulary::kBos, 1))].logprob = kBosLogprob;
    } else {
      // Back-off weights live on the context n-gram one order down.
      NGramTable& ctx_table = tables[k - 2];
      for (const auto& [h, s] : ctx) {
        auto it = ctx_table.find(h);
        if (it == ctx_table.end()) {
          NGramEntry e;
          e.logprob = h.n == 1 && h.ids[0] == Vocabulary::kBos
                          ? kBosLogprob
                          : lower->logprob(h.view().first(h.n - 1), h.ids[h.n - 1]);
          it = ctx_table.emplace(h, e).first;
        }
        it->second.backoff = std::log(gamma_of(s));
      }
    }
  }
  return NGramModel(std::move(vocab), std::move(tables), smoothing);
}

NGramModel make_uniform(std::shared_ptr<const Vocabulary> vocab) {
  NGramTable t;
  const double lp = -std::log(static_cast<double>(vocab->predictable().size()));
  for (WordId w : vocab->predictable()) t[NGramKey(std::span<const WordId>(&w, 1))].logprob = lp;
  t[NGramKey(std::span<const WordId>(&Vocabulary::kBos, 1))].logprob = kBosLogprob;
  return NGramModel(std::move(vocab), {std::move(t)});
}

// ---------------------------------------------------------------------------
// Mixtures

MixtureLM::MixtureLM(std::vector<std::shared_ptr<const LanguageModel>> components,
                     std::vector<double> weights)
    : components_(std::move(components)), weights_(std::move(weights)) {
  if (components_.empty()) throw DataError("mixture needs at least one component");
  if (weights_.size() != components_.size())
    throw DataError("mixture needs one weight per component");
  vocab_ = components_.front()->shared_vocab();
  double sum = 0.0;
  for (std::size_t i = 0; i < components_.size(); ++i) {
    if (!components_[i]->vocab().same_words(*vocab_))
      throw VocabMismatch("mixture component " + std::to_string(i) + " has a different vocabulary");
    if (!(weights_[i] >= 0.0)) throw DataError("mixture weights must be non-negative");
    sum += weights_[i];
    order_ = std::max(order_, components_[i]->order());
  }
  if (!(sum > 0.0)) throw DataError("mixture weights must not all be zero");
  for (double& w : weights_) w /= sum;
}

double MixtureLM::logprob(std::span<const WordId> context, WordId word) const {
  std::array<double, 16> small{};
  std::vector<double> big;
  double* terms = small.data();
  if (components_.size() > small.size()) {
    big.resize(components_.size());
    terms = big.data();
  }
  std::size_t n = 0;
  for (std::size_t i = 0; i < components_.size(); ++i) {
    if (weights_[i] == 0.0) continue;
    terms[n++] = std::log(weights_[i]) + components_[i]->logprob(context, word);
  }
  return log_sum_exp(std::span<const double>(terms, n));
}

// ---------------------------------------------------------------------------
// Evaluation

std::vector<double> sentence_logprobs(const LanguageModel& model,
                                      std::span<const std::string> sentence) {
  const Vocabulary& v = model.vocab();
  std::vector<WordId> ids{Vocabulary::kBos};
  for (const auto& w : sentence) {
    WordId id = v.id(w);
    if (id == Vocabulary::kBos || id == Vocabulary::kEos) throw OOVQuery(w);
    ids.push_back(id);
  }
  ids.push_back(Vocabulary::kEos);
  const std::size_t hist = static_cast<std::size_t>(std::max(model.order() - 1, 0));
  std::vector<double> out;
  out.reserve(ids.size() - 1);
  std::span<const WordId> all(ids);
  for (std::size_t j = 1; j < ids.size(); ++j) {
    const std::size_t start = j > hist ? j - hist : 0;
    out.push_back(model.logprob(all.subspan(start, j - start), ids[j]));
  }
  return out;
}

PerplexityResult perplexity(const LanguageModel& model,
                            std::span<const std::vector<std::string>> sentences) {
  PerplexityResult r;
  CompensatedSum total;
  for (const auto& s : sentences) {
    for (double lp : sentence_logprobs(model, s)) {
      total.add(lp);
      ++r.n_scored;
    }
    ++r.n_sentences;
  }
  if (r.n_scored == 0) throw EmptyEvalSet();
  r.total_logprob = total.value();
  r.pp = std::exp(-r.total_logprob / static_cast<double>(r.n_scored));
  return r;
}

PerplexityResult perplexity(const LanguageModel& model, std::span<const Utterance> utterances) {
  auto sentences = sentences_of(utterances);
  return perplexity(model, std::span<const std::vector<std::string>>(sentences));
}

FitResult fit_weights(std::vector<std::shared_ptr<const LanguageModel>> components,
                      std::span<const std::vector<std::string>> dev, const FitOptions& opts) {
  if (components.size() < 2) throw DataError("interpolation needs at least two components");
  for (std::size_t m = 1; m < components.size(); ++m)
    if (!components[m]->vocab().same_words(components[0]->vocab()))
      throw VocabMismatch("component " + std::to_string(m) + " has a different vocabulary");

  const std::size_t nm = components.size();
  // lp[i * nm + m]: log P_m at dev position i.
  std::vector<double> lp;
  std::size_t npos = 0;
  for (const auto& s : dev) {
    std::vector<std::vector<double>> per(nm);
    for (std::size_t m = 0; m < nm; ++m) per[m] = sentence_logprobs(*components[m], s);
    for (std::size_t i = 0; i < per[0].size(); ++i)
      for (std::size_t m = 0; m < nm; ++m) lp.push_back(per[m][i]);
    npos += per[0].size();
  }
  if (npos == 0) throw EmptyEvalSet();

  std::vector<double> weights(nm, 1.0 / static_cast<double>(nm));
  std::vector<double> terms(nm), post(nm);
  auto loglik = [&](const std::vector<double>& w, std::vector<double>* acc) {
    CompensatedSum total;
    std::vector<double> logw(nm);
    for (std::size_t m = 0; m < nm; ++m)
      logw[m] = w[m] > 0.0 ? std::log(w[m]) : -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < npos; ++i) {
      for (std::size_t m = 0; m < nm; ++m) terms[m] = logw[m] + lp[i * nm + m];
      const double lse = log_sum_exp(terms);
      total.add(lse);
      if (acc)
        for (std::size_t m = 0; m < nm; ++m) (*acc)[m] += std::exp(terms[m] - lse);
    }
    return total.value() / static_cast<double>(npos);
  };

  FitResult r;
  double ll = loglik(weights, nullptr);
  r.loglik_history.push_back(ll);
  r.weight_history.push_back(weights);
  for (int it = 0; it < opts.max_iterations; ++it) {
    std::fill(post.begin(), post.end(), 0.0);
    loglik(weights, &post);
    for (std::size_t m = 0; m < nm; ++m) weights[m] = post[m] / static_cast<double>(npos);
    const double next = loglik(weights, nullptr);
    r.loglik_history.push_back(next);
    r.weight_history.push_back(weights);
    ++r.iterations;
    const double gain = next - ll;
    ll = next;
    if (gain < opts.tolerance) {
      r.converged = true;
      break;
    }
  }
  r.dev_perplexity = std::exp(-ll);
  r.mixture = std::make_shared<MixtureLM>(std::move(components), weights);
  return r;
}

}  // namespace cswitch
