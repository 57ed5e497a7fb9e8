// src/report.cpp

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

#include "cswitch/report.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <fmt/format.h>

using nlohmann::json;

namespace cswitch {

LangNames lang_names(const LangTag& lang) {
  static const std::map<std::string, LangNames> names = {
      {"en", {"English", "Eng", "E"}},  {"zu", {"isiZulu", "Zul", "Z"}},
      {"xh", {"isiXhosa", "Xho", "X"}}, {"st", {"Sesotho", "Sot", "S"}},
      {"tn", {"Setswana", "Tsw", "T"}},
  };
  auto it = names.find(lang.code);
  if (it != names.end()) return it->second;
  return {lang.code, lang.code, lang.code};
}

std::string format_table(const std::vector<std::string>& header,
                         const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width(header.size(), 0);
  auto widen = [&](const std::vector<std::string>& r) {
    for (std::size_t i = 0; i < r.size() && i < width.size(); ++i) width[i] = std::max(width[i], r[i].size());
  };
  widen(header);
  for (const auto& r : rows) widen(r);
  auto line = [&](const std::vector<std::string>& r) {
    std::string s;
    for (std::size_t i = 0; i < width.size(); ++i) {
      const std::string cell = i < r.size() ? r[i] : "";
      if (i == 0)
        s += fmt::format("{:<{}}", cell, width[i]);
      else
        s += fmt::format("  {:>{}}", cell, width[i]);
    }
    while (!s.empty() && s.back() == ' ') s.pop_back();
    return s + '\n';
  };
  std::string out = line(header);
  std::size_t total = 0;
  for (std::size_t w : width) total += w;
  out += std::string(total + 2 * (width.size() - 1), '-') + '\n';
  for (const auto& r : rows) out += line(r);
  return out;
}

std::string fmt_opt(const std::optional<double>& v, int digits) {
  if (!v) return "-";
  return fmt::format("{:.{}f}", *v, digits);
}

namespace {

json opt(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

double minutes(double s) { return std::round(s / 6.0) / 10.0; }

json rate_json(const Rate& r) { return {{"percent", opt(r.percent())}, {"num", r.num}, {"den", r.den}}; }

json counts_json(const ErrorCounts& c) {
  return {{"wer", opt(c.wer())}, {"sub", c.sub}, {"del", c.del}, {"ins", c.ins}, {"n_ref", c.n_ref}};
}

std::string thousands(std::size_t n) {
  std::string s = std::to_string(n);
  for (int i = static_cast<int>(s.size()) - 3; i > 0; i -= 3) s.insert(static_cast<std::size_t>(i), ",");
  return s;
}

}  // namespace

// ---------------------------------------------------------------------------

json to_json(const CorpusStats& s) {
  auto row = [](const LanguageStats& l, const std::string& name) {
    return json{{"language", name},
                {"mono_min", minutes(l.mono_s)},
                {"cs_min", minutes(l.cs_s)},
                {"subtotal_min", minutes(l.subtotal_s())},
                {"word_tokens", l.tokens},
                {"word_types", l.types},
                {"mono_s", l.mono_s},
                {"cs_s", l.cs_s}};
  };
  json langs = json::array();
  for (const auto& l : s.languages) langs.push_back(row(l, l.lang.code));
  return {{"languages", langs},
          {"total", row(s.totals, "total")},
          {"corpus_duration_min", minutes(s.corpus_duration_s)},
          {"corpus_duration_s", s.corpus_duration_s},
          {"untranscribed_s", s.untranscribed_s},
          {"utterances", s.utterances},
          {"code_switched", s.code_switched},
          {"untranscribed", s.untranscribed},
          {"cs_attribution", "full duration of a code-switched utterance credited to every language in it"}};
}

std::string format_stats(const CorpusStats& s) {
  std::vector<std::vector<std::string>> rows;
  auto row = [](const LanguageStats& l, const std::string& name) {
    return std::vector<std::string>{name,
                                    fmt::format("{:.1f}", minutes(l.mono_s)),
                                    fmt::format("{:.1f}", minutes(l.cs_s)),
                                    fmt::format("{:.1f}", minutes(l.subtotal_s())),
                                    thousands(l.tokens),
                                    thousands(l.types)};
  };
  for (const auto& l : s.languages) rows.push_back(row(l, lang_names(l.lang).full));
  rows.push_back(row(s.totals, "Total"));
  std::string out = format_table({"Language", "Mono (m)", "CS (m)", "Subtotal", "Word tokens", "Word types"}, rows);
  out += fmt::format("# {} utterances ({} code-switched), {:.1f} min", s.utterances, s.code_switched,
                     minutes(s.corpus_duration_s));
  if (s.untranscribed) out += fmt::format("; {} untranscribed ({:.1f} min)", s.untranscribed, minutes(s.untranscribed_s));
  out += "\n# CS minutes credit the whole utterance to each language it contains\n";
  return out;
}

// ---------------------------------------------------------------------------

json to_json(const PerplexityResult& r) {
  return {{"pp", r.pp}, {"n_scored", r.n_scored}, {"total_logprob", r.total_logprob}, {"n_sentences", r.n_sentences}};
}

json to_json(const PerplexityRow& row, std::span<const LangTag> langs) {
  const CsPerplexityReport& t = row.test;
  json mpp = json::object();
  json counts = json::object();
  for (const LangTag& l : langs) {
    mpp[l.code] = opt(t.mpp(l));
    auto it = t.mono.find(l);
    counts["mono_" + l.code] = it == t.mono.end() ? 0 : it->second.n;
  }
  counts["mono"] = t.mono_all.n;
  counts["switch"] = t.switches.n;
  counts["decomposed"] = t.decomposed.n;
  counts["excluded"] = t.n_excluded;
  return {{"label", row.label},
          {"pp_dev", opt(row.pp_dev)},
          {"pp", t.pp},
          {"n_scored", t.n_scored},
          {"total_logprob", t.total_logprob},
          {"mpp_per_lang", mpp},
          {"mpp", opt(t.mpp())},
          {"cpp", opt(t.cpp())},
          {"pp_decomposed", opt(t.pp_decomposed())},
          {"counts", counts}};
}

std::string format_perplexity(std::span<const PerplexityRow> rows, std::span<const LangTag> langs) {
  std::vector<std::string> header{"LM", "PP (dev)", "PP"};
  for (const LangTag& l : langs) header.push_back("MPP_" + lang_names(l).letter);
  header.push_back("MPP");
  header.push_back("CPP");
  std::vector<std::vector<std::string>> body;
  std::size_t n_scored = 0, n_decomposed = 0, n_switch = 0;
  for (const auto& r : rows) {
    std::vector<std::string> cells{r.label, fmt_opt(r.pp_dev), fmt::format("{:.1f}", r.test.pp)};
    for (const LangTag& l : langs) cells.push_back(fmt_opt(r.test.mpp(l)));
    cells.push_back(fmt_opt(r.test.mpp()));
    cells.push_back(fmt_opt(r.test.cpp()));
    body.push_back(std::move(cells));
    n_scored = r.test.n_scored;
    n_decomposed = r.test.decomposed.n;
    n_switch = r.test.switches.n;
  }
  std::string out = format_table(header, body);
  out += fmt::format("# PP over {} positions (words and sentence ends); MPP/CPP over {} word positions, {} switch points\n",
                     n_scored, n_decomposed, n_switch);
  out += "# first word of an utterance counts as monolingual; CPP scores the first word after each switch\n";
  return out;
}

// ---------------------------------------------------------------------------

json to_json(const WerRow& row, std::span<const LangTag> langs) {
  json per = json::object();
  for (const LangTag& l : langs) {
    auto it = row.test.per_language.find(l);
    per[l.code] = counts_json(it == row.test.per_language.end() ? ErrorCounts{} : it->second);
  }
  auto unk = row.test.per_language.find(kUnknownLang);
  if (unk != row.test.per_language.end() && std::find(langs.begin(), langs.end(), kUnknownLang) == langs.end())
    per[kUnknownLang.code] = counts_json(unk->second);
  json j = {{"label", row.label},
            {"dev", row.dev ? counts_json(*row.dev) : json(nullptr)},
            {"test", counts_json(row.test.overall)},
            {"per_language", per}};
  if (row.test.switches) j["accuracy"] = to_json(*row.test.switches, langs);
  return j;
}

std::string format_wer(std::span<const WerRow> rows, std::span<const LangTag> langs) {
  std::vector<std::string> header{"System", "Dev", "Test"};
  for (const LangTag& l : langs) header.push_back("WER_" + lang_names(l).letter);
  std::vector<std::vector<std::string>> body;
  for (const auto& r : rows) {
    std::vector<std::string> cells{r.label, r.dev ? fmt_opt(r.dev->wer()) : "-", fmt_opt(r.test.overall.wer())};
    for (const LangTag& l : langs) {
      auto it = r.test.per_language.find(l);
      cells.push_back(it == r.test.per_language.end() ? "-" : fmt_opt(it->second.wer()));
    }
    body.push_back(std::move(cells));
  }
  std::string out = format_table(header, body);
  for (const auto& r : rows) {
    const ErrorCounts& c = r.test.overall;
    out += fmt::format("# {}: S={} D={} I={} N={}\n", r.label, c.sub, c.del, c.ins, c.n_ref);
  }
  out += "# insertions are charged to the language of the preceding reference word\n";
  return out;
}

std::vector<AccuracyRow> accuracy_rows(const SwitchMetrics& m, std::span<const LangTag> langs) {
  std::vector<AccuracyRow> rows;
  auto get = [](const std::map<LangTag, Rate>& src, const LangTag& l) {
    auto it = src.find(l);
    return it == src.end() ? Rate{} : it->second;
  };
  for (const LangTag& l : langs) rows.push_back({lang_names(l).abbrev + " token correct", get(m.token_correct, l)});
  rows.push_back({"Word correct after switch", m.word_correct_after_switch});
  std::vector<LangTag> order(langs.begin(), langs.end());
  std::stable_partition(order.begin(), order.end(), [](const LangTag& l) { return l.code != "en"; });
  for (const LangTag& l : order) {
    const LangNames n = lang_names(l);
    rows.push_back({(l.code == "en" ? n.full : n.abbrev) + " word correct after switch",
                    get(m.word_correct_after_switch_by_lang, l)});
  }
  rows.push_back({"Language correct after switch", m.language_correct_after_switch});
  rows.push_back({"Code-switch bigram correct", m.bigram_correct});
  return rows;
}

json to_json(const SwitchMetrics& m, std::span<const LangTag> langs) {
  json rows = json::array();
  for (const auto& r : accuracy_rows(m, langs)) {
    json j = rate_json(r.rate);
    j["name"] = r.name;
    rows.push_back(j);
  }
  return {{"rows", rows}, {"switch_points", m.switch_points()}};
}

std::string format_accuracy(const SwitchMetrics& m, std::span<const LangTag> langs) {
  std::vector<std::vector<std::string>> body;
  for (const auto& r : accuracy_rows(m, langs))
    body.push_back({r.name, fmt_opt(r.rate.percent()), fmt::format("{}/{}", r.rate.num, r.rate.den)});
  std::string out = format_table({"Accuracy (%)", "Value", "Count"}, body);
  out += fmt::format("# {} code-switch points; bigram correct requires both words of the switch bigram correct\n",
                     m.switch_points());
  return out;
}

// ---------------------------------------------------------------------------

json to_json(const BootstrapResult& r) {
  auto ci = [](const Interval& i) { return json::array({i.lo, i.hi}); };
  return {{"n_resamples", r.resamples}, {"seed", r.seed},       {"wer_a", r.wer_a},
          {"wer_b", r.wer_b},           {"ci_a", ci(r.ci_a)},   {"ci_b", ci(r.ci_b)},
          {"ci_delta", ci(r.ci_delta)}, {"p_improvement", r.p_improvement}};
}

std::string format_bootstrap(const BootstrapResult& r, const std::string& name_a, const std::string& name_b) {
  std::vector<std::vector<std::string>> body = {
      {name_a, fmt::format("{:.2f}", r.wer_a), fmt::format("[{:.2f}, {:.2f}]", r.ci_a.lo, r.ci_a.hi)},
      {name_b, fmt::format("{:.2f}", r.wer_b), fmt::format("[{:.2f}, {:.2f}]", r.ci_b.lo, r.ci_b.hi)},
      {"A - B", fmt::format("{:.2f}", r.wer_a - r.wer_b),
       fmt::format("[{:.2f}, {:.2f}]", r.ci_delta.lo, r.ci_delta.hi)}};
  std::string out = format_table({"System", "WER", "95% CI"}, body);
  out += fmt::format("# p_improvement (WER_A < WER_B) = {:.4f} over {} resamples, seed {}\n", r.p_improvement,
                     r.resamples, r.seed);
  return out;
}

// ---------------------------------------------------------------------------

std::string format_passes(std::span<const PassReport> passes, const PairRegistry& registry) {
  std::vector<std::string> header{"Pass", "Policy"};
  for (const auto& p : registry.pairs()) header.push_back(p.id);
  header.push_back("TOTAL");
  std::vector<std::vector<std::string>> body;
  for (const PassReport& r : passes) {
    std::vector<std::string> cells{std::to_string(r.pass), r.policy};
    for (const auto& p : registry.pairs()) {
      auto it = std::find_if(r.pairs.begin(), r.pairs.end(), [&](const PairSelection& s) { return s.pair == p.id; });
      cells.push_back(it == r.pairs.end() ? "0" : thousands(it->retained));
    }
    cells.push_back(fmt::format("{} ({:.1f} h)", thousands(r.retained_total), r.retained_s / 3600.0));
    body.push_back(std::move(cells));
  }
  return format_table(header, body);
}

json selection_json(const Selection& s) {
  json pairs = json::array();
  for (const auto& p : s.pairs)
    pairs.push_back({{"pair", p.pair},
                     {"assigned", p.assigned},
                     {"retained", p.retained},
                     {"threshold", opt(p.threshold)},
                     {"assigned_s", p.assigned_s},
                     {"retained_s", p.retained_s}});
  return {{"pass", s.pass},
          {"filtering", s.active},
          {"pairs", pairs},
          {"assigned_total", s.assigned_total()},
          {"retained_total", s.retained_total()},
          {"assigned_s", s.assigned_s()},
          {"retained_s", s.retained_s()}};
}

}  // namespace cswitch
