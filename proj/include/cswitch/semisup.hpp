// include/cswitch/semisup.hpp

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

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "cswitch/corpus.hpp"

namespace cswitch {

struct LanguagePair {
  std::string id;
  LangTag first;
  LangTag second;
  bool covers(const LangTag& l) const { return l == first || l == second; }
};

/// Ordered set of bilingual decoder pairs; order breaks confidence ties.
class PairRegistry {
 public:
  PairRegistry() = default;
  explicit PairRegistry(std::vector<LanguagePair> pairs);
  /// EZ, EX, ES, ET: English with isiZulu, isiXhosa, Sesotho, Setswana.
  static PairRegistry defaults();

  std::span<const LanguagePair> pairs() const { return pairs_; }
  std::size_t size() const { return pairs_.size(); }
  /// Throws DataError for unknown ids.
  const LanguagePair& at(std::string_view id) const;
  std::optional<std::size_t> index(std::string_view id) const;
  /// First pair covering every language of `u`.
  const LanguagePair* true_pair(const Utterance& u) const;

 private:
  std::vector<LanguagePair> pairs_;
};

struct DecodeResult {
  std::string utt_id;
  std::string pair;
  std::vector<Token> hyp;
  std::vector<double> token_confidences;
  double utt_confidence = 0.0;

  /// Fills utt_confidence with the mean token confidence (0 when empty).
  static DecodeResult make(std::string utt_id, std::string pair, std::vector<Token> hyp,
                           std::vector<double> token_confidences);
  bool operator==(const DecodeResult&) const = default;
};

/// Mean computed so that equal values average to exactly that value.
double mean_confidence(std::span<const double> values);

enum class ThresholdMode { NT, TP1, TP1P2 };

struct ThresholdPolicy {
  ThresholdMode mode = ThresholdMode::NT;
  bool active(int pass) const {
    return pass == 1 ? mode != ThresholdMode::NT : mode == ThresholdMode::TP1P2;
  }
};

/// "nt", "tp1", "tp1p2" (case-insensitive, "T_P1" style accepted).
ThresholdMode parse_threshold_mode(std::string_view s);
std::string to_string(ThresholdMode m);

/// Highest utt_confidence wins; ties go to the earlier registry pair.
/// Throws NoResults for an empty list.
const DecodeResult& assign_pair(std::span<const DecodeResult> results, const PairRegistry& registry);

/// Pair id -> assigned results, in utterance-id order.
using Assignment = std::map<std::string, std::vector<DecodeResult>>;

/// Groups results by utterance and assigns each utterance to one pair.
Assignment assign_all(std::span<const DecodeResult> results, const PairRegistry& registry);

/// Mean confidence per pair; absent for pairs with no utterances.
std::map<std::string, std::optional<double>> compute_thresholds(const Assignment& assigned);

struct PairSelection {
  std::string pair;
  std::size_t assigned = 0;
  std::size_t retained = 0;
  std::optional<double> threshold;
  double assigned_s = 0.0;
  double retained_s = 0.0;
};

struct Selection {
  int pass = 1;
  bool active = false;
  std::vector<PairSelection> pairs;  // registry order
  Manifest manifest;                 // AutoT@pass
  std::vector<Utterance> transcripts;
  std::map<std::string, std::string> pair_of;  // retained id -> pair

  std::size_t assigned_total() const;
  std::size_t retained_total() const;
  double retained_s() const;
  double assigned_s() const;
};

/// Retains results with utt_confidence >= threshold of their pair when
/// `active`, everything otherwise. Durations and speakers come from
/// `corpus`; the manifest's source is `source`.
Selection filter(const Assignment& assigned, const std::map<std::string, std::optional<double>>& thresholds,
                 bool active, int pass, const Corpus& corpus, const std::string& source,
                 const PairRegistry& registry);

// ---------------------------------------------------------------------------
// Decode result files: one protocol response per line.

std::string format_decode_line(const DecodeResult& r);
/// Throws DecoderProtocolError (with `where` in the message) on bad lines.
DecodeResult parse_decode_line(std::string_view line, const LangRegistry& langs, std::string_view where = {});
void write_decodes(std::ostream& out, std::span<const DecodeResult> results);
std::vector<DecodeResult> read_decodes(std::istream& in, const LangRegistry& langs);

// ---------------------------------------------------------------------------
// Pipeline interfaces

/// Opaque trained-model description; `state_path` is readable by the
/// decoder that goes with the trainer.
struct ModelHandle {
  std::string role;
  int pass = 0;
  std::filesystem::path state_path;
  nlohmann::json state;
};

struct AutoTEntry {
  Utterance transcript;  // hypothesis tokens
  std::string pair;
};

struct TrainRequest {
  std::string role;  // "autot" or "asr"
  int pass = 0;
  const Manifest* trainset = nullptr;
  const Corpus* corpus = nullptr;  // ManT / OOD transcripts
  std::span<const AutoTEntry> autot;
  std::filesystem::path out_dir;
};

class TrainerInterface {
 public:
  virtual ~TrainerInterface() = default;
  virtual ModelHandle train(const TrainRequest& request) = 0;
};

class DecoderInterface {
 public:
  virtual ~DecoderInterface() = default;
  /// One result per (utterance, pair), any order.
  virtual std::vector<DecodeResult> decode(const ModelHandle& model,
                                           std::span<const Utterance* const> utterances,
                                           std::span<const LanguagePair> pairs) = 0;
};

/// Records the trainset size and writes an empty state; for decoders that
/// manage their own models.
class NullTrainer final : public TrainerInterface {
 public:
  ModelHandle train(const TrainRequest& request) override;
};

/// Speaks the line protocol with a child process started through `sh -c`.
/// `{model}` in the command is replaced by the model state path, which is
/// also exported as CSWITCH_MODEL.
class ExternalDecoder final : public DecoderInterface {
 public:
  ExternalDecoder(std::string command, double timeout_s, const LangRegistry& langs);
  std::vector<DecodeResult> decode(const ModelHandle& model,
                                   std::span<const Utterance* const> utterances,
                                   std::span<const LanguagePair> pairs) override;

 private:
  std::string command_;
  double timeout_s_;
  LangRegistry langs_;
};

// ---------------------------------------------------------------------------
// Pipeline

struct PipelineConfig {
  std::filesystem::path corpus;
  std::filesystem::path mant;
  std::optional<std::filesystem::path> ood;
  std::filesystem::path untranscribed;
  ThresholdPolicy policy;
  int passes = 2;
  std::uint64_t seed = 0;
  std::filesystem::path run_dir;
  nlohmann::json decoder;
  nlohmann::json trainer;
  unsigned threads = 0;

  std::filesystem::path config_path;
  std::string config_hash;  // FNV-1a of the config file bytes, hex
};

/// Relative paths resolve against the config file's directory. Throws
/// UsageError for missing required fields.
PipelineConfig load_pipeline_config(const std::filesystem::path& path);

struct PassReport {
  int pass = 0;
  std::string policy;
  bool filtering = false;
  std::vector<PairSelection> pairs;
  std::size_t untranscribed = 0;
  std::size_t assigned_total = 0;
  std::size_t retained_total = 0;
  double assigned_s = 0.0;
  double retained_s = 0.0;
  std::size_t autot_trainset_size = 0;
  std::size_t asr_trainset_size = 0;
  std::size_t asr_trainset_ood = 0;
  std::map<std::string, std::string> outputs;  // role -> path relative to run dir
};

nlohmann::json to_json(const PassReport& r);
PassReport pass_report_from_json(const nlohmann::json& j);

struct PipelineOptions {
  bool resume = false;
  std::string command_line;
};

struct PipelineRun {
  std::vector<PassReport> passes;
  std::filesystem::path run_record;
};

/// Runs every pass, writing manifests, transcripts and reports to the run
/// directory. With `resume`, passes recorded as complete in state.json are
/// loaded instead of recomputed.
PipelineRun run_pipeline(const PipelineConfig& config, DecoderInterface& decoder,
                         TrainerInterface& trainer, const PipelineOptions& opts = {});

/// Builds decoder and trainer from the config's bindings ("sim" or
/// "external") and runs the pipeline.
PipelineRun run_pipeline(const PipelineConfig& config, const PipelineOptions& opts = {});

}  // namespace cswitch
