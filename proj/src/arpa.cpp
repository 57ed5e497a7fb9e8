// src/arpa.cpp

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

#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "cswitch/error.hpp"
#include "cswitch/ngram_lm.hpp"

namespace cswitch {

namespace {

constexpr double kLn10 = 2.302585092994045684;

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

double parse_number(const std::string& text, std::size_t line) {
  char* end = nullptr;
  double v = std::strtod(text.c_str(), &end);
  if (end == text.c_str() || *end != '\0') throw ArpaFormatError(line, "bad number '" + text + "'");
  return v;
}

struct RawEntry {
  std::vector<std::string> words;
  double log10p = 0.0;
  double log10bow = 0.0;
};

}  // namespace

void write_arpa(std::ostream& out, const NGramModel& model) {
  const Vocabulary& v = model.vocab();
  out << "\\data\\\n";
  for (int n = 1; n <= model.order(); ++n) out << "ngram " << n << '=' << model.count(n) << '\n';
  for (int n = 1; n <= model.order(); ++n) {
    out << "\n\\" << n << "-grams:\n";
    for (const auto& [key, e] : model.sorted_entries(n)) {
      out << fmt::format("{:.7f}", e.logprob / kLn10);
      for (WordId w : key.view()) out << '\t' << v.word(w);
      if (n < model.order() && e.backoff != 0.0) out << '\t' << fmt::format("{:.7f}", e.backoff / kLn10);
      out << '\n';
    }
  }
  out << "\n\\end\\\n";
}

NGramModel read_arpa(std::istream& in, std::shared_ptr<const Vocabulary> vocab) {
  std::string line;
  std::size_t lineno = 0;
  enum class State { Preamble, Data, Grams, End } state = State::Preamble;
  std::map<int, std::size_t> declared;
  std::vector<std::vector<RawEntry>> sections;
  int current = 0;

  auto close_section = [&](std::size_t at) {
    if (current == 0) return;
    const std::size_t got = sections[current - 1].size();
    if (got != declared[current])
      throw ArpaFormatError(at, fmt::format("{}-grams section has {} entries but \\data\\ declares {}",
                                            current, got, declared[current]));
  };

  while (std::getline(in, line)) {
    ++lineno;
    std::string_view body = trim(line);
    if (state == State::Preamble) {
      if (body == "\\data\\") state = State::Data;
      continue;
    }
    if (body.empty()) continue;
    if (state == State::End) throw ArpaFormatError(lineno, "content after \\end\\");
    if (body == "\\end\\") {
      close_section(lineno);
      state = State::End;
      continue;
    }
    if (body.front() == '\\') {
      int n = 0;
      if (std::sscanf(std::string(body).c_str(), "\\%d-grams:", &n) != 1)
        throw ArpaFormatError(lineno, "unknown section '" + std::string(body) + "'");
      close_section(lineno);
      if (n != current + 1 || !declared.contains(n))
        throw ArpaFormatError(lineno, fmt::format("unexpected {}-grams section", n));
      current = n;
      sections.emplace_back();
      state = State::Grams;
      continue;
    }
    if (state == State::Data) {
      int n = 0;
      std::size_t count = 0;
      if (std::sscanf(std::string(body).c_str(), "ngram %d=%zu", &n, &count) != 2 || n < 1 ||
          n > kMaxOrder || n != static_cast<int>(declared.size()) + 1)
        throw ArpaFormatError(lineno, "bad count line '" + std::string(body) + "'");
      declared[n] = count;
      continue;
    }
    std::istringstream is{std::string(body)};
    std::vector<std::string> fields;
    std::string f;
    while (is >> f) fields.push_back(f);
    const std::size_t n = static_cast<std::size_t>(current);
    if (fields.size() != n + 1 && fields.size() != n + 2)
      throw ArpaFormatError(lineno, fmt::format("expected {} or {} fields", n + 1, n + 2));
    RawEntry e;
    e.log10p = parse_number(fields[0], lineno);
    if (e.log10p > 0.0) throw ArpaFormatError(lineno, "positive log-probability");
    e.words.assign(fields.begin() + 1, fields.begin() + 1 + static_cast<long>(n));
    if (fields.size() == n + 2) e.log10bow = parse_number(fields.back(), lineno);
    sections.back().push_back(std::move(e));
  }
  if (state != State::End) throw ArpaFormatError(lineno, "missing \\end\\");
  if (sections.size() != declared.size())
    throw ArpaFormatError(lineno, "\\data\\ declares orders without sections");

  std::map<std::string, std::optional<LangTag>> words;
  bool open = false;
  for (const auto& e : sections.at(0)) {
    const std::string& w = e.words[0];
    if (w == Vocabulary::kBosWord || w == Vocabulary::kEosWord) continue;
    if (w == Vocabulary::kUnkWord) {
      open = true;
      continue;
    }
    words.emplace(w, vocab ? vocab->lang_of(w) : std::nullopt);
  }
  auto built = std::make_shared<const Vocabulary>(words, open);
  if (vocab) {
    if (!vocab->same_words(*built))
      throw VocabMismatch("ARPA unigrams differ from the supplied vocabulary");
    built = vocab;
  }

  std::vector<NGramTable> tables(sections.size());
  for (std::size_t k = 0; k < sections.size(); ++k) {
    for (const auto& e : sections[k]) {
      std::array<WordId, kMaxOrder> ids{};
      for (std::size_t i = 0; i < e.words.size(); ++i) {
        auto id = built->find(e.words[i]);
        if (!id) throw VocabMismatch("n-gram word '" + e.words[i] + "' missing from the unigrams");
        ids[i] = *id;
      }
      NGramEntry entry{e.log10p * kLn10, e.log10bow * kLn10};
      tables[k][NGramKey(std::span<const WordId>(ids.data(), e.words.size()))] = entry;
    }
  }
  return NGramModel(built, std::move(tables));
}

NGramModel load_arpa(const std::filesystem::path& path, std::shared_ptr<const Vocabulary> vocab) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open ARPA file '" + path.string() + "'");
  return read_arpa(in, std::move(vocab));
}

void save_arpa(const std::filesystem::path& path, const NGramModel& model) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write '" + path.string() + "'");
  write_arpa(out, model);
}

}  // namespace cswitch
