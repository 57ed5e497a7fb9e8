// include/cswitch/report.hpp

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

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "cswitch/corpus.hpp"
#include "cswitch/cs_metrics.hpp"
#include "cswitch/ngram_lm.hpp"
#include "cswitch/scoring.hpp"
#include "cswitch/semisup.hpp"

namespace cswitch {

/// Display names for a language code: full ("isiZulu"), short ("Zul") and
/// one-letter subscript ("Z"). Unknown codes display as themselves.
struct LangNames {
  std::string full;
  std::string abbrev;
  std::string letter;
};
LangNames lang_names(const LangTag& lang);

/// Left-aligned first column, right-aligned remaining columns.
std::string format_table(const std::vector<std::string>& header,
                         const std::vector<std::vector<std::string>>& rows);

/// "-" for absent values, otherwise fixed with `digits` decimals.
std::string fmt_opt(const std::optional<double>& v, int digits = 1);

// Corpus composition

nlohmann::json to_json(const CorpusStats& s);
std::string format_stats(const CorpusStats& s);

// Perplexity

struct PerplexityRow {
  std::string label;
  std::optional<double> pp_dev;
  CsPerplexityReport test;
};

/// Columns: LM, PP (dev), PP, one MPP_<letter> per language, MPP, CPP.
/// `langs` fixes the MPP column order.
nlohmann::json to_json(const PerplexityRow& row, std::span<const LangTag> langs);
std::string format_perplexity(std::span<const PerplexityRow> rows, std::span<const LangTag> langs);

nlohmann::json to_json(const PerplexityResult& r);

// Scoring

struct WerRow {
  std::string label;
  std::optional<ErrorCounts> dev;
  ScoreReport test;
};

/// Columns: System, Dev, Test, one WER_<letter> per language.
nlohmann::json to_json(const WerRow& row, std::span<const LangTag> langs);
std::string format_wer(std::span<const WerRow> rows, std::span<const LangTag> langs);

/// Row label and value, in the fixed row order of the detailed accuracy
/// table: token correct per language, word correct after switch, word
/// correct after switch per language (non-English first), language
/// correct after switch, code-switch bigram correct.
struct AccuracyRow {
  std::string name;
  Rate rate;
};
std::vector<AccuracyRow> accuracy_rows(const SwitchMetrics& m, std::span<const LangTag> langs);
nlohmann::json to_json(const SwitchMetrics& m, std::span<const LangTag> langs);
std::string format_accuracy(const SwitchMetrics& m, std::span<const LangTag> langs);

// Significance

nlohmann::json to_json(const BootstrapResult& r);
std::string format_bootstrap(const BootstrapResult& r, const std::string& name_a, const std::string& name_b);

// Data selection

/// Columns: Pass, Policy, one per pair, TOTAL with hours.
std::string format_passes(std::span<const PassReport> passes, const PairRegistry& registry);
nlohmann::json selection_json(const Selection& s);

}  // namespace cswitch
