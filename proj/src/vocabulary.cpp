// src/vocabulary.cpp

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

#include "cswitch/vocabulary.hpp"

#include <fstream>
#include <istream>
#include <ostream>

#include "cswitch/error.hpp"

namespace cswitch {

Vocabulary::Vocabulary(const std::map<std::string, std::optional<LangTag>>& words, bool open)
    : open_(open) {
  words_ = {std::string(kBosWord), std::string(kEosWord)};
  langs_ = {std::nullopt, std::nullopt};
  if (open_) {
    words_.emplace_back(kUnkWord);
    langs_.emplace_back(std::nullopt);
  }
  first_word_ = static_cast<WordId>(words_.size());
  for (const auto& [w, lang] : words) {
    if (w == kBosWord || w == kEosWord || w == kUnkWord)
      throw VocabMismatch("special symbol '" + w + "' listed as a vocabulary word");
    if (w.empty()) throw VocabMismatch("empty vocabulary word");
    words_.push_back(w);
    langs_.push_back(lang);
  }
  for (WordId i = 0; i < words_.size(); ++i) {
    index_.emplace(words_[i], i);
    if (i != kBos) predictable_.push_back(i);
  }
}

Vocabulary Vocabulary::from_corpora(std::span<const Corpus* const> corpora, bool open) {
  std::map<std::string, std::map<std::string, std::size_t>> tally;
  for (const Corpus* c : corpora)
    for (const auto& u : c->utterances())
      for (const auto& t : u.tokens) ++tally[t.surface][t.lang.code];
  std::map<std::string, std::optional<LangTag>> words;
  for (const auto& [w, counts] : tally) {
    const std::string* best = nullptr;
    std::size_t best_n = 0;
    for (const auto& [code, n] : counts)
      if (n > best_n) best = &code, best_n = n;
    words.emplace(w, LangTag(*best));
  }
  return Vocabulary(words, open);
}

WordId Vocabulary::unk() const {
  if (!open_) throw OOVQuery(std::string(kUnkWord));
  return 2;
}

std::optional<WordId> Vocabulary::find(std::string_view word) const {
  auto it = index_.find(std::string(word));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

WordId Vocabulary::id(std::string_view word) const {
  if (auto id = find(word)) return *id;
  if (open_) return unk();
  throw OOVQuery(std::string(word));
}

std::optional<LangTag> Vocabulary::lang_of(std::string_view word) const {
  auto id = find(word);
  if (!id) return std::nullopt;
  return langs_[*id];
}

std::span<const std::string> Vocabulary::words() const {
  return std::span<const std::string>(words_).subspan(first_word_);
}

Vocabulary read_vocab(std::istream& in, bool open) {
  std::map<std::string, std::optional<LangTag>> words;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto tab = line.find('\t');
    std::string w = line.substr(0, tab);
    std::optional<LangTag> lang;
    if (tab != std::string::npos && tab + 1 < line.size()) lang = LangTag(line.substr(tab + 1));
    if (w == Vocabulary::kBosWord || w == Vocabulary::kEosWord) continue;
    if (w == Vocabulary::kUnkWord) {
      open = true;
      continue;
    }
    if (w.empty()) throw ParseError(lineno, "empty vocabulary word");
    if (!words.emplace(nfc(w), lang).second) throw ParseError(lineno, "duplicate word '" + w + "'");
  }
  return Vocabulary(words, open);
}

void write_vocab(std::ostream& out, const Vocabulary& vocab) {
  if (vocab.is_open()) out << Vocabulary::kUnkWord << '\n';
  for (WordId i = 0; i < vocab.size(); ++i) {
    if (vocab.is_special(i)) continue;
    out << vocab.word(i);
    if (const auto& l = vocab.lang_of(i)) out << '\t' << l->code;
    out << '\n';
  }
}

Vocabulary load_vocab(const std::filesystem::path& path, bool open) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open vocabulary '" + path.string() + "'");
  return read_vocab(in, open);
}

}  // namespace cswitch
