// src/corpus.cpp

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

#include "cswitch/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>
#include <unicode/normalizer2.h>
#include <unicode/unistr.h>

#include "cswitch/error.hpp"

namespace cswitch {

using nlohmann::json;

namespace {

bool has_space(std::string_view s) {
  return std::any_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c) != 0; });
}

std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream is(line);
  std::string f;
  while (is >> f) out.push_back(std::move(f));
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

double parse_duration(const std::string& text, std::size_t line) {
  std::size_t used = 0;
  double d = 0.0;
  try {
    d = std::stod(text, &used);
  } catch (const std::exception&) {
    throw ParseError(line, "bad duration '" + text + "'");
  }
  if (used != text.size() || !(d >= 0.0)) throw ParseError(line, "bad duration '" + text + "'");
  return d;
}

}  // namespace

std::string nfc(std::string_view utf8) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* norm = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) throw std::runtime_error("ICU NFC normalizer unavailable");
  icu::UnicodeString src = icu::UnicodeString::fromUTF8(
      icu::StringPiece(utf8.data(), static_cast<int32_t>(utf8.size())));
  if (norm->isNormalized(src, status) && U_SUCCESS(status)) return std::string(utf8);
  status = U_ZERO_ERROR;
  icu::UnicodeString dst = norm->normalize(src, status);
  if (U_FAILURE(status)) throw DataError("invalid UTF-8 in token surface");
  std::string out;
  dst.toUTF8String(out);
  return out;
}

bool Utterance::is_code_switched() const {
  for (std::size_t i = 1; i < tokens.size(); ++i)
    if (tokens[i].lang != tokens[0].lang) return true;
  return false;
}

std::vector<LangTag> Utterance::languages() const {
  std::vector<LangTag> out;
  for (const auto& t : tokens)
    if (std::find(out.begin(), out.end(), t.lang) == out.end()) out.push_back(t.lang);
  return out;
}

LangRegistry::LangRegistry(std::vector<std::string> codes) : codes_(std::move(codes)) {
  std::set<std::string> seen;
  for (const auto& c : codes_) {
    if (c.empty() || has_space(c) || c.find('/') != std::string::npos)
      throw DataError("invalid language code '" + c + "'");
    if (!seen.insert(c).second) throw DataError("language code '" + c + "' declared twice");
  }
}

LangRegistry LangRegistry::defaults() { return LangRegistry({"en", "zu", "xh", "st", "tn"}); }

bool LangRegistry::contains(std::string_view code) const {
  return std::find(codes_.begin(), codes_.end(), code) != codes_.end();
}

Corpus::Corpus(LangRegistry langs, std::vector<Utterance> utterances)
    : langs_(std::move(langs)), utterances_(std::move(utterances)) {
  index_.reserve(utterances_.size());
  for (std::size_t i = 0; i < utterances_.size(); ++i) {
    const Utterance& u = utterances_[i];
    const std::size_t line = i + 1;
    if (u.id.empty() || has_space(u.id)) throw ParseError(line, "bad utterance id '" + u.id + "'");
    if (u.speaker.empty() || has_space(u.speaker))
      throw ParseError(line, "bad speaker '" + u.speaker + "'");
    if (!(u.duration_s >= 0.0)) throw ParseError(line, "negative duration");
    for (const Token& t : u.tokens) {
      if (t.surface.empty() || has_space(t.surface))
        throw ParseError(line, "bad token surface '" + t.surface + "'");
      if (!langs_.contains(t.lang.code)) throw UnknownLang(line, t.lang.code);
    }
    if (!index_.emplace(u.id, i).second) throw DuplicateId(line, u.id);
  }
}

const Utterance* Corpus::find(std::string_view id) const {
  auto it = index_.find(std::string(id));
  return it == index_.end() ? nullptr : &utterances_[it->second];
}

const Utterance& Corpus::at(std::string_view id) const {
  const Utterance* u = find(id);
  if (!u) throw UnresolvedId(std::string(id));
  return *u;
}

namespace {

Corpus parse_jsonl(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  std::optional<LangRegistry> langs;
  std::vector<Utterance> utts;
  std::unordered_map<std::string, std::size_t> seen;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(lineno, std::string("invalid JSON: ") + e.what());
    }
    if (!obj.is_object()) throw ParseError(lineno, "expected a JSON object");
    if (!langs) {
      if (!obj.contains("langs") || !obj["langs"].is_array())
        throw ParseError(lineno, "first line must be a {\"langs\": [...]} header");
      std::vector<std::string> codes;
      for (const auto& c : obj["langs"]) {
        if (!c.is_string()) throw ParseError(lineno, "language codes must be strings");
        codes.push_back(c.get<std::string>());
      }
      try {
        langs = LangRegistry(std::move(codes));
      } catch (const DataError& e) {
        throw ParseError(lineno, e.what());
      }
      continue;
    }
    Utterance u;
    try {
      u.id = obj.at("id").get<std::string>();
      u.speaker = obj.at("speaker").get<std::string>();
      u.duration_s = obj.at("duration_s").get<double>();
      for (const auto& t : obj.value("tokens", json::array())) {
        Token tok{nfc(t.at("w").get<std::string>()), LangTag(t.at("l").get<std::string>())};
        u.tokens.push_back(std::move(tok));
      }
    } catch (const json::exception& e) {
      throw ParseError(lineno, std::string("bad utterance record: ") + e.what());
    }
    if (!(u.duration_s >= 0.0)) throw ParseError(lineno, "negative duration");
    for (const Token& t : u.tokens) {
      if (t.surface.empty() || has_space(t.surface))
        throw ParseError(lineno, "bad token surface '" + t.surface + "'");
      if (!langs->contains(t.lang.code)) throw UnknownLang(lineno, t.lang.code);
    }
    if (!seen.emplace(u.id, lineno).second) throw DuplicateId(lineno, u.id);
    utts.push_back(std::move(u));
  }
  if (!langs) return Corpus();
  try {
    return Corpus(std::move(*langs), std::move(utts));
  } catch (const ParseError& e) {
    throw DataError(e.what());
  }
}

Corpus parse_tagged(std::istream& in, const ParseOptions& opts) {
  std::string line;
  std::size_t lineno = 0;
  LangRegistry langs = opts.default_langs;
  bool saw_utterance = false;
  std::vector<Utterance> utts;
  std::unordered_map<std::string, std::size_t> seen;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view body = trim(line);
    if (body.empty()) continue;
    if (body.front() == '#') {
      if (body.starts_with("#!langs")) {
        if (saw_utterance) throw ParseError(lineno, "#!langs must precede utterances");
        auto fields = split_ws(std::string(body.substr(7)));
        try {
          langs = LangRegistry(std::move(fields));
        } catch (const DataError& e) {
          throw ParseError(lineno, e.what());
        }
      }
      continue;
    }
    saw_utterance = true;
    auto fields = split_ws(std::string(body));
    if (fields.size() < 3) throw ParseError(lineno, "expected <id> <speaker> <duration_s> tokens...");
    Utterance u;
    u.id = fields[0];
    u.speaker = fields[1];
    u.duration_s = parse_duration(fields[2], lineno);
    for (std::size_t i = 3; i < fields.size(); ++i) {
      const std::string& f = fields[i];
      auto slash = f.rfind('/');
      if (slash == std::string::npos || slash == 0 || slash + 1 == f.size())
        throw ParseError(lineno, "token '" + f + "' is not <surface>/<lang>");
      std::string code = f.substr(slash + 1);
      if (!langs.contains(code)) throw UnknownLang(lineno, code);
      u.tokens.push_back({nfc(f.substr(0, slash)), LangTag(std::move(code))});
    }
    if (!seen.emplace(u.id, lineno).second) throw DuplicateId(lineno, u.id);
    utts.push_back(std::move(u));
  }
  return Corpus(std::move(langs), std::move(utts));
}

}  // namespace

Corpus parse_corpus(std::istream& in, CorpusFormat format, const ParseOptions& opts) {
  return format == CorpusFormat::Jsonl ? parse_jsonl(in) : parse_tagged(in, opts);
}

void write_corpus(std::ostream& out, const Corpus& corpus, CorpusFormat format) {
  if (format == CorpusFormat::Jsonl) {
    out << json{{"langs", corpus.langs().codes()}}.dump() << '\n';
    for (const Utterance& u : corpus.utterances()) {
      json toks = json::array();
      for (const Token& t : u.tokens) toks.push_back({{"w", t.surface}, {"l", t.lang.code}});
      json obj = {{"id", u.id}, {"speaker", u.speaker}, {"duration_s", u.duration_s}, {"tokens", toks}};
      out << obj.dump() << '\n';
    }
    return;
  }
  out << "#!langs";
  for (const auto& c : corpus.langs().codes()) out << ' ' << c;
  out << '\n';
  for (const Utterance& u : corpus.utterances()) {
    out << u.id << ' ' << u.speaker << ' ' << fmt::format("{}", u.duration_s);
    for (const Token& t : u.tokens) out << ' ' << t.surface << '/' << t.lang.code;
    out << '\n';
  }
}

CorpusFormat format_for_path(const std::filesystem::path& path) {
  auto ext = path.extension().string();
  return (ext == ".jsonl" || ext == ".json") ? CorpusFormat::Jsonl : CorpusFormat::TaggedText;
}

Corpus load_corpus(const std::filesystem::path& path, const ParseOptions& opts) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open corpus '" + path.string() + "'");
  return parse_corpus(in, format_for_path(path), opts);
}

void save_corpus(const std::filesystem::path& path, const Corpus& corpus) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  write_corpus(out, corpus, format_for_path(path));
}

// ---------------------------------------------------------------------------

std::string Provenance::str() const {
  switch (kind) {
    case ProvenanceKind::ManT: return "ManT";
    case ProvenanceKind::OOD: return "OOD";
    case ProvenanceKind::AutoT: return "AutoT@" + std::to_string(pass);
  }
  return "?";
}

Provenance Provenance::parse(std::string_view text) {
  if (text == "ManT") return mant();
  if (text == "OOD") return ood();
  if (text.starts_with("AutoT@")) {
    std::string num(text.substr(6));
    if (!num.empty() && std::all_of(num.begin(), num.end(), ::isdigit)) {
      int p = std::stoi(num);
      if (p >= 1) return autot(p);
    }
  }
  throw DataError("unknown provenance '" + std::string(text) + "'");
}

Manifest::Manifest(std::string name, std::string source, std::vector<ManifestEntry> entries)
    : name_(std::move(name)), source_(std::move(source)), entries_(std::move(entries)) {
  index_.reserve(entries_.size());
  for (std::size_t i = 0; i < entries_.size(); ++i)
    if (!index_.emplace(entries_[i].id, i).second)
      throw DataError("manifest '" + name_ + "' lists '" + entries_[i].id + "' twice");
}

bool Manifest::contains(std::string_view id) const { return find(id) != nullptr; }

const ManifestEntry* Manifest::find(std::string_view id) const {
  auto it = index_.find(std::string(id));
  return it == index_.end() ? nullptr : &entries_[it->second];
}

void Manifest::resolve(const Corpus& corpus) const {
  for (const auto& e : entries_)
    if (!corpus.find(e.id)) throw UnresolvedId(e.id);
}

Manifest read_manifest(std::istream& in, std::string name) {
  std::string line, source;
  std::size_t lineno = 0;
  std::vector<ManifestEntry> entries;
  std::set<std::string> seen;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view body = trim(line);
    if (body.empty()) continue;
    if (body.front() == '#') {
      if (body.starts_with("#source")) source = std::string(trim(body.substr(7)));
      continue;
    }
    auto tab = body.find('\t');
    if (tab == std::string_view::npos) throw ParseError(lineno, "expected <utt_id>\\t<provenance>");
    std::string id(trim(body.substr(0, tab)));
    std::string_view prov = trim(body.substr(tab + 1));
    if (id.empty()) throw ParseError(lineno, "empty utterance id");
    Provenance p;
    try {
      p = Provenance::parse(prov);
    } catch (const DataError& e) {
      throw ParseError(lineno, e.what());
    }
    if (!seen.insert(id).second) throw DuplicateId(lineno, id);
    entries.push_back({std::move(id), p});
  }
  return Manifest(std::move(name), std::move(source), std::move(entries));
}

void write_manifest(std::ostream& out, const Manifest& manifest) {
  if (!manifest.source().empty()) out << "#source " << manifest.source() << '\n';
  for (const auto& e : manifest.entries()) out << e.id << '\t' << e.provenance.str() << '\n';
}

Manifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open manifest '" + path.string() + "'");
  return read_manifest(in, path.stem().string());
}

void save_manifest(const std::filesystem::path& path, const Manifest& manifest) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  write_manifest(out, manifest);
}

Manifest manifest_of(const Corpus& corpus, std::string name, std::string source,
                     Provenance provenance) {
  std::vector<ManifestEntry> entries;
  entries.reserve(corpus.size());
  for (const auto& u : corpus.utterances()) entries.push_back({u.id, provenance});
  return Manifest(std::move(name), std::move(source), std::move(entries));
}

Manifest manifest_union(std::span<const Manifest> manifests, std::string name) {
  if (manifests.empty()) return Manifest(std::move(name), "", {});
  const std::string& source = manifests.front().source();
  std::map<std::string, Provenance> merged;
  for (const Manifest& m : manifests) {
    if (m.source() != source) throw CrossCorpus(source, m.source());
    for (const auto& e : m.entries()) {
      auto [it, inserted] = merged.emplace(e.id, e.provenance);
      if (!inserted && e.provenance.precedence() < it->second.precedence()) it->second = e.provenance;
    }
  }
  std::vector<ManifestEntry> entries;
  entries.reserve(merged.size());
  for (auto& [id, p] : merged) entries.push_back({id, p});
  return Manifest(std::move(name), source, std::move(entries));
}

// ---------------------------------------------------------------------------

CorpusStats corpus_stats(const Corpus& corpus, const Manifest* split, const StatsOptions& opts) {
  std::vector<const Utterance*> selected;
  if (split) {
    for (const auto& e : split->entries()) selected.push_back(&corpus.at(e.id));
  } else {
    for (const auto& u : corpus.utterances()) selected.push_back(&u);
  }

  std::map<std::string, LanguageStats> rows;
  std::map<std::string, std::set<std::string>> types;
  CorpusStats st;
  for (const Utterance* u : selected) {
    if (!u->is_transcribed()) {
      if (!opts.include_untranscribed) continue;
      ++st.untranscribed;
      st.untranscribed_s += u->duration_s;
      st.corpus_duration_s += u->duration_s;
      continue;
    }
    ++st.utterances;
    st.corpus_duration_s += u->duration_s;
    const bool cs = u->is_code_switched();
    if (cs) ++st.code_switched;
    for (const LangTag& l : u->languages()) {
      LanguageStats& row = rows[l.code];
      row.lang = l;
      (cs ? row.cs_s : row.mono_s) += u->duration_s;
    }
    for (const Token& t : u->tokens) {
      ++rows[t.lang.code].tokens;
      types[t.lang.code].insert(t.surface);
    }
  }

  for (const auto& code : corpus.langs().codes()) {
    auto it = rows.find(code);
    if (it == rows.end()) continue;
    LanguageStats row = it->second;
    row.types = types[code].size();
    st.totals.mono_s += row.mono_s;
    st.totals.cs_s += row.cs_s;
    st.totals.tokens += row.tokens;
    st.totals.types += row.types;
    st.languages.push_back(std::move(row));
  }
  st.utterances += st.untranscribed;
  return st;
}

std::vector<LangTag> langs_present(std::initializer_list<const Corpus*> corpora) {
  std::set<std::string> seen;
  std::vector<std::string> order;
  for (const Corpus* c : corpora) {
    if (!c) continue;
    for (const std::string& code : c->langs().codes())
      if (!std::count(order.begin(), order.end(), code)) order.push_back(code);
    for (const Utterance& u : c->utterances())
      for (const Token& t : u.tokens) seen.insert(t.lang.code);
  }
  std::vector<LangTag> out;
  for (const std::string& code : order)
    if (seen.contains(code)) out.emplace_back(code);
  return out;
}

}  // namespace cswitch
