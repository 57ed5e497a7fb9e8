// src/semisup.cpp

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

#include "cswitch/semisup.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "cswitch/error.hpp"
#include "cswitch/numeric.hpp"

namespace cswitch {

PairRegistry::PairRegistry(std::vector<LanguagePair> pairs) : pairs_(std::move(pairs)) {
  std::set<std::string> seen;
  for (const auto& p : pairs_) {
    if (p.id.empty()) throw DataError("language pair with empty id");
    if (!seen.insert(p.id).second) throw DataError("duplicate language pair '" + p.id + "'");
  }
}

PairRegistry PairRegistry::defaults() {
  return PairRegistry({{"EZ", LangTag("en"), LangTag("zu")},
                       {"EX", LangTag("en"), LangTag("xh")},
                       {"ES", LangTag("en"), LangTag("st")},
                       {"ET", LangTag("en"), LangTag("tn")}});
}

const LanguagePair& PairRegistry::at(std::string_view id) const {
  if (auto i = index(id)) return pairs_[*i];
  throw DataError("unknown language pair '" + std::string(id) + "'");
}

std::optional<std::size_t> PairRegistry::index(std::string_view id) const {
  for (std::size_t i = 0; i < pairs_.size(); ++i)
    if (pairs_[i].id == id) return i;
  return std::nullopt;
}

const LanguagePair* PairRegistry::true_pair(const Utterance& u) const {
  const std::vector<LangTag> langs = u.languages();
  for (const auto& p : pairs_)
    if (std::all_of(langs.begin(), langs.end(), [&](const LangTag& l) { return p.covers(l); }))
      return &p;
  return nullptr;
}

double mean_confidence(std::span<const double> values) {
  if (values.empty()) return 0.0;
  if (std::all_of(values.begin(), values.end(), [&](double v) { return v == values.front(); }))
    return values.front();
  CompensatedSum sum;
  for (double v : values) sum.add(v);
  return sum.value() / static_cast<double>(values.size());
}

DecodeResult DecodeResult::make(std::string utt_id, std::string pair, std::vector<Token> hyp,
                                std::vector<double> token_confidences) {
  if (hyp.size() != token_confidences.size())
    throw DataError("hypothesis and token confidences differ in length for '" + utt_id + "'");
  for (double c : token_confidences)
    if (!(c >= 0.0 && c <= 1.0)) throw DataError("confidence outside [0,1] for '" + utt_id + "'");
  DecodeResult r{std::move(utt_id), std::move(pair), std::move(hyp), std::move(token_confidences), 0.0};
  r.utt_confidence = mean_confidence(r.token_confidences);
  return r;
}

ThresholdMode parse_threshold_mode(std::string_view s) {
  std::string k;
  for (char c : s)
    if (c != '_' && c != '-') k.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (k == "nt") return ThresholdMode::NT;
  if (k == "tp1") return ThresholdMode::TP1;
  if (k == "tp1p2") return ThresholdMode::TP1P2;
  throw UsageError("unknown threshold mode '" + std::string(s) + "' (expected nt, tp1 or tp1p2)");
}

std::string to_string(ThresholdMode m) {
  switch (m) {
    case ThresholdMode::NT: return "NT";
    case ThresholdMode::TP1: return "T_P1";
    case ThresholdMode::TP1P2: return "T_P1P2";
  }
  return "?";
}

const DecodeResult& assign_pair(std::span<const DecodeResult> results, const PairRegistry& registry) {
  if (results.empty()) throw NoResults("?");
  const DecodeResult* best = nullptr;
  std::size_t best_rank = 0;
  for (const DecodeResult& r : results) {
    const auto rank = registry.index(r.pair);
    if (!rank) throw DataError("unknown language pair '" + r.pair + "' for '" + r.utt_id + "'");
    if (!best || r.utt_confidence > best->utt_confidence ||
        (r.utt_confidence == best->utt_confidence && *rank < best_rank)) {
      best = &r;
      best_rank = *rank;
    }
  }
  return *best;
}

Assignment assign_all(std::span<const DecodeResult> results, const PairRegistry& registry) {
  std::map<std::string_view, std::vector<DecodeResult>> by_utt;
  for (const DecodeResult& r : results) by_utt[r.utt_id].push_back(r);
  Assignment out;
  for (const auto& p : registry.pairs()) out[p.id];
  for (const auto& [id, rs] : by_utt) {
    const DecodeResult& win = assign_pair(rs, registry);
    out[win.pair].push_back(win);
  }
  return out;
}

std::map<std::string, std::optional<double>> compute_thresholds(const Assignment& assigned) {
  std::map<std::string, std::optional<double>> out;
  std::vector<double> conf;
  for (const auto& [pair, rs] : assigned) {
    if (rs.empty()) {
      out[pair] = std::nullopt;
      continue;
    }
    conf.clear();
    for (const auto& r : rs) conf.push_back(r.utt_confidence);
    out[pair] = mean_confidence(conf);
  }
  return out;
}

std::size_t Selection::assigned_total() const {
  std::size_t n = 0;
  for (const auto& p : pairs) n += p.assigned;
  return n;
}

std::size_t Selection::retained_total() const {
  std::size_t n = 0;
  for (const auto& p : pairs) n += p.retained;
  return n;
}

double Selection::retained_s() const {
  double s = 0.0;
  for (const auto& p : pairs) s += p.retained_s;
  return s;
}

double Selection::assigned_s() const {
  double s = 0.0;
  for (const auto& p : pairs) s += p.assigned_s;
  return s;
}

Selection filter(const Assignment& assigned, const std::map<std::string, std::optional<double>>& thresholds,
                 bool active, int pass, const Corpus& corpus, const std::string& source,
                 const PairRegistry& registry) {
  Selection sel;
  sel.pass = pass;
  sel.active = active;
  std::vector<std::string> order;
  for (const auto& p : registry.pairs()) order.push_back(p.id);
  for (const auto& [pair, rs] : assigned)
    if (!registry.index(pair)) order.push_back(pair);

  std::vector<ManifestEntry> entries;
  std::vector<Utterance> transcripts;
  for (const std::string& pair : order) {
    PairSelection ps;
    ps.pair = pair;
    auto t = thresholds.find(pair);
    if (t != thresholds.end()) ps.threshold = t->second;
    auto it = assigned.find(pair);
    if (it != assigned.end()) {
      for (const DecodeResult& r : it->second) {
        const Utterance& u = corpus.at(r.utt_id);
        ++ps.assigned;
        ps.assigned_s += u.duration_s;
        const bool keep = !active || (ps.threshold && r.utt_confidence >= *ps.threshold);
        if (!keep) continue;
        ++ps.retained;
        ps.retained_s += u.duration_s;
        entries.push_back({r.utt_id, Provenance::autot(pass)});
        transcripts.push_back({r.utt_id, u.speaker, u.duration_s, r.hyp});
        sel.pair_of[r.utt_id] = pair;
      }
    }
    sel.pairs.push_back(std::move(ps));
  }
  std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  std::sort(transcripts.begin(), transcripts.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  sel.manifest = Manifest(fmt::format("autot.pass{}", pass), source, std::move(entries));
  sel.transcripts = std::move(transcripts);
  return sel;
}

// ---------------------------------------------------------------------------

std::string format_decode_line(const DecodeResult& r) {
  std::string line = fmt::format("{}\t{}\t{}\t", r.utt_id, r.pair, r.utt_confidence);
  for (std::size_t i = 0; i < r.hyp.size(); ++i) {
    if (i) line += ' ';
    line += r.hyp[i].surface;
    line += '/';
    line += r.hyp[i].lang.code;
  }
  return line;
}

DecodeResult parse_decode_line(std::string_view line, const LangRegistry& langs, std::string_view where) {
  auto fail = [&](const std::string& why) -> DecoderProtocolError {
    return DecoderProtocolError(where.empty() ? why : std::string(where) + ": " + why);
  };
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t tab = line.find('\t', start);
    fields.push_back(line.substr(start, tab == std::string_view::npos ? std::string_view::npos : tab - start));
    if (tab == std::string_view::npos) break;
    start = tab + 1;
  }
  if (fields.size() == 3) fields.emplace_back();
  if (fields.size() != 4) throw fail(fmt::format("expected 4 tab-separated fields, got {}", fields.size()));
  if (fields[0].empty() || fields[1].empty()) throw fail("empty utterance id or pair");
  const std::string conf_text(fields[2]);
  char* end = nullptr;
  const double conf = std::strtod(conf_text.c_str(), &end);
  if (conf_text.empty() || *end != '\0' || !(conf >= 0.0 && conf <= 1.0))
    throw fail("confidence '" + conf_text + "' is not a number in [0,1]");
  std::vector<Token> hyp;
  std::istringstream is{std::string(fields[3])};
  std::string tok;
  while (is >> tok) {
    const std::size_t slash = tok.rfind('/');
    if (slash == std::string::npos || slash == 0 || slash + 1 == tok.size())
      throw fail("token '" + tok + "' is not word/lang");
    std::string code = tok.substr(slash + 1);
    if (!langs.contains(code)) throw fail("unknown language code '" + code + "'");
    hyp.push_back({tok.substr(0, slash), LangTag(std::move(code))});
  }
  std::vector<double> tc(hyp.size(), conf);
  return DecodeResult::make(std::string(fields[0]), std::string(fields[1]), std::move(hyp), std::move(tc));
}

void write_decodes(std::ostream& out, std::span<const DecodeResult> results) {
  for (const auto& r : results) out << format_decode_line(r) << '\n';
}

std::vector<DecodeResult> read_decodes(std::istream& in, const LangRegistry& langs) {
  std::vector<DecodeResult> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    out.push_back(parse_decode_line(line, langs, fmt::format("line {}", lineno)));
  }
  return out;
}

}  // namespace cswitch
