// src/pipeline_factory.cpp

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

#include <fstream>

#include "cswitch/decoder_sim.hpp"
#include "cswitch/error.hpp"
#include "cswitch/semisup.hpp"

using nlohmann::json;

namespace cswitch {

namespace {

ChannelParams sim_params(const json& binding, std::uint64_t seed) {
  json p = binding.value("params", json::object());
  if (binding.contains("params_file")) {
    std::ifstream in(binding["params_file"].get<std::string>());
    if (!in) throw DataError("cannot open simulator params '" + binding["params_file"].get<std::string>() + "'");
    p = json::parse(in);
  }
  if (!p.contains("seed")) p["seed"] = seed;
  return channel_params_from_json(p);
}

}  // namespace

PipelineRun run_pipeline(const PipelineConfig& config, const PipelineOptions& opts) {
  const std::string dtype = config.decoder.value("type", std::string("sim"));
  std::string ttype = config.trainer.value("type", std::string(dtype == "sim" ? "sim" : "null"));

  std::shared_ptr<const SimTruth> truth;
  std::optional<ChannelParams> params;
  auto need_truth = [&](const json& binding) {
    if (truth) return;
    const json& src = binding.contains("truth") ? binding : config.decoder;
    if (!src.contains("truth")) throw UsageError("simulator binding needs a 'truth' corpus");
    truth = std::make_shared<const SimTruth>(load_corpus(src["truth"].get<std::string>()), PairRegistry::defaults());
    params = sim_params(src, config.seed);
  };

  std::unique_ptr<DecoderInterface> decoder;
  if (dtype == "sim") {
    need_truth(config.decoder);
    decoder = std::make_unique<SimDecoder>(truth, *params, config.threads);
  } else if (dtype == "external") {
    if (!config.decoder.contains("command")) throw UsageError("external decoder binding needs 'command'");
    const Corpus corpus = load_corpus(config.corpus);
    decoder = std::make_unique<ExternalDecoder>(config.decoder["command"].get<std::string>(),
                                                config.decoder.value("timeout_s", 30.0), corpus.langs());
  } else {
    throw UsageError("unknown decoder type '" + dtype + "'");
  }

  std::unique_ptr<TrainerInterface> trainer;
  if (ttype == "sim") {
    need_truth(config.trainer);
    trainer = std::make_unique<SimTrainer>(truth, *params);
  } else if (ttype == "null") {
    trainer = std::make_unique<NullTrainer>();
  } else {
    throw UsageError("unknown trainer type '" + ttype + "'");
  }
  return run_pipeline(config, *decoder, *trainer, opts);
}

}  // namespace cswitch
