// include/cswitch/ngram_lm.hpp

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

#include <array>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "cswitch/corpus.hpp"
#include "cswitch/vocabulary.hpp"

namespace cswitch {

inline constexpr int kMaxOrder = 5;

/// Anything that assigns conditional word probabilities over a vocabulary.
class LanguageModel {
 public:
  virtual ~LanguageModel() = default;

  virtual const Vocabulary& vocab() const = 0;
  virtual std::shared_ptr<const Vocabulary> shared_vocab() const = 0;
  virtual int order() const = 0;

  /// Natural-log P(word | context); context is oldest-first and may be
  /// longer than order-1 (it is truncated). Throws OOVQuery for `<s>` or
  /// ids the model cannot predict.
  virtual double logprob(std::span<const WordId> context, WordId word) const = 0;

  double logprob(const std::vector<std::string>& context, std::string_view word) const;
};

/// Fixed-capacity n-gram key; unused slots hold kNone.
struct NGramKey {
  static constexpr WordId kNone = 0xffffffffu;
  std::array<WordId, kMaxOrder> ids{kNone, kNone, kNone, kNone, kNone};
  std::uint8_t n = 0;

  NGramKey() = default;
  explicit NGramKey(std::span<const WordId> words);
  std::span<const WordId> view() const { return {ids.data(), n}; }
  bool operator==(const NGramKey&) const = default;
  auto operator<=>(const NGramKey&) const = default;
};

struct NGramKeyHash {
  std::size_t operator()(const NGramKey& k) const noexcept;
};

struct NGramEntry {
  double logprob = 0.0;  // natural log
  double backoff = 0.0;  // natural log; 0 when the n-gram is not a context
};

using NGramTable = std::unordered_map<NGramKey, NGramEntry, NGramKeyHash>;

enum class Smoothing { KneserNey, WittenBell };

std::string to_string(Smoothing s);
Smoothing smoothing_from_string(std::string_view s);

/// Backoff n-gram model (ARPA semantics). Immutable once built.
class NGramModel final : public LanguageModel {
 public:
  /// `tables[k]` holds the (k+1)-grams. Every predictable word needs a
  /// unigram entry for queries on it to succeed.
  NGramModel(std::shared_ptr<const Vocabulary> vocab, std::vector<NGramTable> tables,
             std::optional<Smoothing> smoothing = std::nullopt);

  const Vocabulary& vocab() const override { return *vocab_; }
  std::shared_ptr<const Vocabulary> shared_vocab() const override { return vocab_; }
  int order() const override { return static_cast<int>(tables_.size()); }
  double logprob(std::span<const WordId> context, WordId word) const override;
  using LanguageModel::logprob;

  const NGramEntry* find(std::span<const WordId> ngram) const;
  std::size_t count(int n) const { return tables_.at(n - 1).size(); }
  /// Entries of order n sorted by key.
  std::vector<std::pair<NGramKey, NGramEntry>> sorted_entries(int n) const;

  /// Smoothing actually applied (after any automatic fallback); unknown for
  /// models read from ARPA.
  std::optional<Smoothing> smoothing() const { return smoothing_; }

 private:
  std::shared_ptr<const Vocabulary> vocab_;
  std::vector<NGramTable> tables_;
  std::optional<Smoothing> smoothing_;
};

struct TrainOptions {
  int order = 3;
  Smoothing smoothing = Smoothing::KneserNey;
  /// Fall back to Witten-Bell when Kneser-Ney discounts are undefined;
  /// when false such corpora raise InsufficientData.
  bool allow_fallback = true;
};

/// Trains on whitespace-free token sequences (sentence markers added here).
NGramModel train(std::span<const std::vector<std::string>> sentences,
                 std::shared_ptr<const Vocabulary> vocab, const TrainOptions& opts = {});

/// Token surfaces of the transcribed utterances of `corpus` (restricted to
/// `split` when given).
std::vector<std::vector<std::string>> sentences_of(const Corpus& corpus,
                                                   const Manifest* split = nullptr);
std::vector<std::vector<std::string>> sentences_of(std::span<const Utterance> utterances);

/// Every predictable word gets probability 1/|predictable| in every context.
NGramModel make_uniform(std::shared_ptr<const Vocabulary> vocab);

// ---------------------------------------------------------------------------

/// Linear interpolation of models over one shared vocabulary.
class MixtureLM final : public LanguageModel {
 public:
  /// Weights must be non-negative with a positive sum; they are normalized.
  /// Throws VocabMismatch when component vocabularies differ.
  MixtureLM(std::vector<std::shared_ptr<const LanguageModel>> components,
            std::vector<double> weights);

  const Vocabulary& vocab() const override { return *vocab_; }
  std::shared_ptr<const Vocabulary> shared_vocab() const override { return vocab_; }
  int order() const override { return order_; }
  double logprob(std::span<const WordId> context, WordId word) const override;
  using LanguageModel::logprob;

  const std::vector<std::shared_ptr<const LanguageModel>>& components() const {
    return components_;
  }
  const std::vector<double>& weights() const { return weights_; }

 private:
  std::vector<std::shared_ptr<const LanguageModel>> components_;
  std::vector<double> weights_;
  std::shared_ptr<const Vocabulary> vocab_;
  int order_ = 1;
};

struct PerplexityResult {
  double pp = 0.0;
  std::size_t n_scored = 0;  // words plus one sentence end per sentence
  double total_logprob = 0.0;
  std::size_t n_sentences = 0;
};

/// Log-probabilities of each word of `sentence` followed by `</s>`, with
/// `<s>` as the initial context.
std::vector<double> sentence_logprobs(const LanguageModel& model,
                                      std::span<const std::string> sentence);

/// Throws EmptyEvalSet when nothing is scored and OOVQuery on closed-vocab misses.
PerplexityResult perplexity(const LanguageModel& model,
                            std::span<const std::vector<std::string>> sentences);
PerplexityResult perplexity(const LanguageModel& model, std::span<const Utterance> utterances);

struct FitOptions {
  double tolerance = 1e-6;  // per-word log-likelihood improvement
  int max_iterations = 100;
};

struct FitResult {
  std::shared_ptr<const MixtureLM> mixture;
  /// Per-word dev log-likelihood at the initial weights and after each
  /// EM iteration.
  std::vector<double> loglik_history;
  std::vector<std::vector<double>> weight_history;
  double dev_perplexity = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// EM estimate of interpolation weights minimizing dev perplexity, starting
/// from uniform weights.
FitResult fit_weights(std::vector<std::shared_ptr<const LanguageModel>> components,
                      std::span<const std::vector<std::string>> dev,
                      const FitOptions& opts = {});

// ---------------------------------------------------------------------------
// ARPA

void write_arpa(std::ostream& out, const NGramModel& model);
/// When `vocab` is given its word set must equal the ARPA unigram set; its
/// language tags are then attached to the model.
NGramModel read_arpa(std::istream& in, std::shared_ptr<const Vocabulary> vocab = nullptr);
NGramModel load_arpa(const std::filesystem::path& path,
                     std::shared_ptr<const Vocabulary> vocab = nullptr);
void save_arpa(const std::filesystem::path& path, const NGramModel& model);

}  // namespace cswitch
