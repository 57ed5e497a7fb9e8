// include/cswitch/vocabulary.hpp

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

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "cswitch/corpus.hpp"

namespace cswitch {

using WordId = std::uint32_t;

/// Closed word list with a language per word. Ids are canonical: the
/// specials come first (`<s>`, `</s>`, then `<unk>` for open vocabularies),
/// followed by the words in byte order, so two vocabularies over the same
/// word set assign the same ids.
class Vocabulary {
 public:
  static constexpr WordId kBos = 0;
  static constexpr WordId kEos = 1;
  static constexpr std::string_view kBosWord = "<s>";
  static constexpr std::string_view kEosWord = "</s>";
  static constexpr std::string_view kUnkWord = "<unk>";

  Vocabulary() : Vocabulary(std::map<std::string, std::optional<LangTag>>{}) {}
  /// `open` adds `<unk>`, which absorbs out-of-vocabulary queries.
  explicit Vocabulary(const std::map<std::string, std::optional<LangTag>>& words,
                      bool open = false);

  /// Closed vocabulary over every token of the given corpora. A word seen
  /// with several tags takes its most frequent tag (ties: smallest code).
  static Vocabulary from_corpora(std::span<const Corpus* const> corpora, bool open = false);

  std::size_t size() const { return words_.size(); }
  bool is_open() const { return open_; }
  bool is_special(WordId id) const { return id < first_word_; }
  WordId unk() const;

  std::optional<WordId> find(std::string_view word) const;
  /// Id of `word`; `<unk>` when open, otherwise throws OOVQuery.
  WordId id(std::string_view word) const;
  const std::string& word(WordId id) const { return words_.at(id); }
  const std::optional<LangTag>& lang_of(WordId id) const { return langs_.at(id); }
  std::optional<LangTag> lang_of(std::string_view word) const;

  /// Every id a model may predict: all ids except `<s>`, and except
  /// `<unk>` for closed vocabularies.
  const std::vector<WordId>& predictable() const { return predictable_; }
  /// Regular (non-special) words in id order.
  std::span<const std::string> words() const;

  bool same_words(const Vocabulary& other) const {
    return open_ == other.open_ && words_ == other.words_;
  }

 private:
  std::vector<std::string> words_;
  std::vector<std::optional<LangTag>> langs_;
  std::unordered_map<std::string, WordId> index_;
  std::vector<WordId> predictable_;
  WordId first_word_ = 2;
  bool open_ = false;
};

/// `word\tlang` per line.
Vocabulary read_vocab(std::istream& in, bool open = false);
void write_vocab(std::ostream& out, const Vocabulary& vocab);
Vocabulary load_vocab(const std::filesystem::path& path, bool open = false);

}  // namespace cswitch
