// include/cswitch/corpus.hpp

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

#include <compare>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <initializer_list>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace cswitch {

/// Short lowercase language identifier ("en", "zu", ...).
struct LangTag {
  std::string code;

  LangTag() = default;
  explicit LangTag(std::string c) : code(std::move(c)) {}
  bool empty() const { return code.empty(); }
  auto operator<=>(const LangTag&) const = default;
};

struct Token {
  std::string surface;
  LangTag lang;
  bool operator==(const Token&) const = default;
};

struct Utterance {
  std::string id;
  std::string speaker;
  double duration_s = 0.0;
  std::vector<Token> tokens;  // empty for untranscribed utterances

  bool is_transcribed() const { return !tokens.empty(); }
  bool is_code_switched() const;
  /// Distinct languages in first-appearance order.
  std::vector<LangTag> languages() const;
  bool operator==(const Utterance&) const = default;
};

/// Ordered set of language codes accepted by a corpus.
class LangRegistry {
 public:
  LangRegistry() = default;
  explicit LangRegistry(std::vector<std::string> codes);

  /// en, zu, xh, st, tn.
  static LangRegistry defaults();

  bool contains(std::string_view code) const;
  const std::vector<std::string>& codes() const { return codes_; }
  bool operator==(const LangRegistry&) const = default;

 private:
  std::vector<std::string> codes_;
};

/// Immutable, validated collection of utterances.
class Corpus {
 public:
  Corpus() = default;
  /// Throws DuplicateId / UnknownLang / ParseError naming the 1-based
  /// position of the offending utterance.
  Corpus(LangRegistry langs, std::vector<Utterance> utterances);

  const LangRegistry& langs() const { return langs_; }
  std::span<const Utterance> utterances() const { return utterances_; }
  std::size_t size() const { return utterances_.size(); }
  bool empty() const { return utterances_.empty(); }

  const Utterance* find(std::string_view id) const;
  /// Throws UnresolvedId.
  const Utterance& at(std::string_view id) const;

  bool operator==(const Corpus& o) const {
    return langs_ == o.langs_ && utterances_ == o.utterances_;
  }

 private:
  LangRegistry langs_;
  std::vector<Utterance> utterances_;
  std::unordered_map<std::string, std::size_t> index_;
};

enum class CorpusFormat { Jsonl, TaggedText };

struct ParseOptions {
  /// Registry used for tagged text without a `#!langs` directive.
  LangRegistry default_langs = LangRegistry::defaults();
};

Corpus parse_corpus(std::istream& in, CorpusFormat format, const ParseOptions& opts = {});
void write_corpus(std::ostream& out, const Corpus& corpus, CorpusFormat format);

/// `.jsonl`/`.json` means JSONL, anything else tagged text.
/// Languages with tokens in any of the corpora, in registry order.
std::vector<LangTag> langs_present(std::initializer_list<const Corpus*> corpora);

CorpusFormat format_for_path(const std::filesystem::path& path);
Corpus load_corpus(const std::filesystem::path& path, const ParseOptions& opts = {});
void save_corpus(const std::filesystem::path& path, const Corpus& corpus);

/// Unicode NFC normalization of a UTF-8 string.
std::string nfc(std::string_view utf8);

// ---------------------------------------------------------------------------
// Manifests

enum class ProvenanceKind { ManT, OOD, AutoT };

struct Provenance {
  ProvenanceKind kind = ProvenanceKind::ManT;
  int pass = 0;  // only meaningful for AutoT

  static Provenance mant() { return {ProvenanceKind::ManT, 0}; }
  static Provenance ood() { return {ProvenanceKind::OOD, 0}; }
  static Provenance autot(int pass) { return {ProvenanceKind::AutoT, pass}; }

  /// "ManT", "OOD", "AutoT@<pass>".
  std::string str() const;
  static Provenance parse(std::string_view text);
  /// Lower wins on id collision: ManT, then OOD, then AutoT by pass.
  std::pair<int, int> precedence() const { return {static_cast<int>(kind), pass}; }
  bool operator==(const Provenance&) const = default;
};

struct ManifestEntry {
  std::string id;
  Provenance provenance;
  bool operator==(const ManifestEntry&) const = default;
};

class Manifest {
 public:
  Manifest() = default;
  /// Throws DataError on duplicate ids.
  Manifest(std::string name, std::string source, std::vector<ManifestEntry> entries);

  const std::string& name() const { return name_; }
  const std::string& source() const { return source_; }
  std::span<const ManifestEntry> entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  bool contains(std::string_view id) const;
  const ManifestEntry* find(std::string_view id) const;

  /// Throws UnresolvedId for the first id missing from `corpus`.
  void resolve(const Corpus& corpus) const;

  bool operator==(const Manifest& o) const {
    return source_ == o.source_ && entries_ == o.entries_;
  }

 private:
  std::string name_;
  std::string source_;
  std::vector<ManifestEntry> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

Manifest read_manifest(std::istream& in, std::string name);
void write_manifest(std::ostream& out, const Manifest& manifest);
Manifest load_manifest(const std::filesystem::path& path);
void save_manifest(const std::filesystem::path& path, const Manifest& manifest);

/// Manifest covering every utterance of `corpus` with one provenance.
Manifest manifest_of(const Corpus& corpus, std::string name, std::string source,
                     Provenance provenance);

/// Set union sorted by id; on collision the entry with the better
/// precedence is kept. Throws CrossCorpus if sources differ.
Manifest manifest_union(std::span<const Manifest> manifests, std::string name = "union");

// ---------------------------------------------------------------------------
// Descriptive statistics

struct LanguageStats {
  LangTag lang;
  double mono_s = 0.0;
  double cs_s = 0.0;
  std::size_t tokens = 0;
  std::size_t types = 0;

  double subtotal_s() const { return mono_s + cs_s; }
};

/// A code-switched utterance's full duration is credited to the CS column of
/// every language it contains, so CS columns may overlap across languages.
struct CorpusStats {
  std::vector<LanguageStats> languages;  // registry order, languages with data
  LanguageStats totals;                  // column sums over `languages`
  double corpus_duration_s = 0.0;        // each counted utterance once
  double untranscribed_s = 0.0;
  std::size_t utterances = 0;
  std::size_t code_switched = 0;
  std::size_t untranscribed = 0;
};

struct StatsOptions {
  bool include_untranscribed = false;
};

/// Statistics over the utterances of `split` (the whole corpus when null).
CorpusStats corpus_stats(const Corpus& corpus, const Manifest* split = nullptr,
                         const StatsOptions& opts = {});

}  // namespace cswitch

template <>
struct std::hash<cswitch::LangTag> {
  std::size_t operator()(const cswitch::LangTag& t) const noexcept {
    return std::hash<std::string>{}(t.code);
  }
};
