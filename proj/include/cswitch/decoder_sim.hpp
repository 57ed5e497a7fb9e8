// include/cswitch/decoder_sim.hpp

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
#include <string>
#include <vector>

#include <json.hpp>

#include "cswitch/corpus.hpp"
#include "cswitch/semisup.hpp"

namespace cswitch {

struct ChannelRates {
  double sub = 0.1;
  double del = 0.05;
  double ins = 0.05;
};

struct ChannelParams {
  std::map<std::string, ChannelRates> rates;  // per pair id
  ChannelRates default_rates;                 // pairs without an entry
  double confidence_noise_sd = 0.05;
  double mismatch_penalty = 0.3;
  double gain = 0.5;    // g: largest relative error reduction from training
  double h0 = 0.1;      // hours at which half the gain is reached
  std::uint64_t seed = 0;

  const ChannelRates& for_pair(const std::string& pair) const;
  /// Throws UsageError on out-of-range values.
  void validate() const;
};

nlohmann::json to_json(const ChannelParams& p);
ChannelParams channel_params_from_json(const nlohmann::json& j);

struct PairState {
  double m = 1.0;             // error multiplier in (0, 1]
  double hours = 0.0;         // training hours seen
  double clean_hours = 0.0;   // error-weighted hours
  double label_noise = 0.0;   // duration-weighted AutoT label error
};

struct TrainState {
  std::map<std::string, PairState> pairs;

  static TrainState initial(const PairRegistry& registry);
  double m(const std::string& pair) const;
};

nlohmann::json to_json(const TrainState& s);
TrainState train_state_from_json(const nlohmann::json& j);

/// Ground truth the simulator decodes against. The pipeline never sees it.
class SimTruth {
 public:
  SimTruth(const Corpus& truth, PairRegistry registry);

  const Corpus& corpus() const { return *corpus_; }
  const PairRegistry& registry() const { return registry_; }
  /// Words of the pair's two languages, byte order.
  const std::vector<std::string>& pair_words(const std::string& pair) const;
  /// Language of a word as used in the truth corpus.
  const LangTag& lang_of(const std::string& word) const;

 private:
  std::shared_ptr<const Corpus> corpus_;
  PairRegistry registry_;
  std::map<std::string, std::vector<std::string>> words_;
  std::map<std::string, LangTag> lang_;
};

struct SimDecode {
  DecodeResult result;
  std::size_t n_ref = 0;
  std::size_t n_sub = 0;
  std::size_t n_del = 0;
  std::size_t n_ins = 0;
  std::size_t n_forced = 0;   // mismatch substitutions
  std::size_t edit_distance = 0;
  bool mismatched = false;

  std::size_t events() const { return n_sub + n_del + n_ins + n_forced; }
};

/// Corrupts the hidden reference of `utt_id`. Per-token uniforms depend on
/// (seed, utterance, token) only, so every decoder sees the same channel
/// events; the rates are those of the utterance's true pair scaled by that
/// pair's multiplier. Decoders for other pairs additionally replace tokens
/// outside their languages, and kept tokens with probability
/// mismatch_penalty, by words absent from the reference.
SimDecode simulate_decode(const SimTruth& truth, const std::string& utt_id, const std::string& pair,
                          const ChannelParams& params, const TrainState& state);

/// Clean-equivalent hours per pair: ManT/OOD utterances count fully for
/// every pair covering their languages, AutoT utterances count for their
/// assigned pair weighted by 1 - min(1, label WER against the truth).
TrainState simulate_train(const TrainRequest& request, const SimTruth& truth,
                          const ChannelParams& params, const TrainState& prev);

class SimTrainer final : public TrainerInterface {
 public:
  SimTrainer(std::shared_ptr<const SimTruth> truth, ChannelParams params);
  ModelHandle train(const TrainRequest& request) override;

 private:
  std::shared_ptr<const SimTruth> truth_;
  ChannelParams params_;
};

class SimDecoder final : public DecoderInterface {
 public:
  SimDecoder(std::shared_ptr<const SimTruth> truth, ChannelParams params, unsigned threads = 1);
  std::vector<DecodeResult> decode(const ModelHandle& model,
                                   std::span<const Utterance* const> utterances,
                                   std::span<const LanguagePair> pairs) override;

 private:
  std::shared_ptr<const SimTruth> truth_;
  ChannelParams params_;
  unsigned threads_;
};

/// Answers protocol requests read from `in` until end of input.
void serve_protocol(std::istream& in, std::ostream& out, const SimTruth& truth,
                    const ChannelParams& params, const TrainState& state);

// ---------------------------------------------------------------------------
// Synthetic fixtures

struct FixtureOptions {
  std::size_t mant = 60;
  std::size_t ood = 40;
  std::size_t untranscribed = 200;
  std::size_t words_per_lang = 40;
  std::size_t min_tokens = 4;
  std::size_t max_tokens = 12;
  double switch_prob = 0.3;
  std::uint64_t seed = 0;
};

struct Fixture {
  Corpus truth;         // every utterance transcribed
  Corpus visible;       // untranscribed utterances have no tokens
  Manifest mant;
  Manifest ood;
  Manifest untranscribed;
};

/// Random bilingual English/Bantu utterances spread over the default pairs.
/// OOD utterances are monolingual.
Fixture make_fixture(const FixtureOptions& opts);

/// Writes truth.jsonl, corpus.jsonl, the three manifests and a pipeline
/// config (`config.json`) using the simulated decoder.
void write_fixture(const std::filesystem::path& dir, const Fixture& fixture,
                   const ChannelParams& params, ThresholdMode mode, int passes);

}  // namespace cswitch
