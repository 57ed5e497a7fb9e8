// src/pipeline.cpp

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

#include <algorithm>
#include <chrono>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/chrono.h>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "cswitch/error.hpp"
#include "cswitch/rng.hpp"
#include "cswitch/semisup.hpp"
#include "cswitch/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace cswitch {

namespace {

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw DataError("cannot open '" + p.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw DataError("cannot write '" + p.string() + "'");
  out << text;
}

void write_json(const fs::path& p, const json& j) { write_file(p, j.dump(2) + "\n"); }

std::string now_iso8601() {
  const auto now = std::chrono::system_clock::now();
  return fmt::format("{:%Y-%m-%dT%H:%M:%S}Z", fmt::gmtime(std::chrono::system_clock::to_time_t(now)));
}

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path q(p);
  return q.is_absolute() ? q : (base / q).lexically_normal();
}

std::optional<double> opt_number(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

}  // namespace

PipelineConfig load_pipeline_config(const fs::path& path) {
  const std::string text = read_file(path);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw DataError("pipeline config '" + path.string() + "': " + e.what());
  }
  if (!j.is_object()) throw DataError("pipeline config must be a JSON object");
  const fs::path base = fs::absolute(path).parent_path();
  auto need = [&](const char* key) -> const json& {
    if (!j.contains(key)) throw UsageError(fmt::format("pipeline config lacks '{}'", key));
    return j.at(key);
  };
  PipelineConfig c;
  try {
    c.corpus = resolve(base, need("corpus").get<std::string>());
    c.mant = resolve(base, need("mant").get<std::string>());
    if (j.contains("ood") && !j["ood"].is_null()) c.ood = resolve(base, j["ood"].get<std::string>());
    c.untranscribed = resolve(base, need("untranscribed").get<std::string>());
    c.policy.mode = parse_threshold_mode(j.value("policy", std::string("nt")));
    c.passes = j.value("passes", 2);
    if (!need("seed").is_number_unsigned()) throw UsageError("pipeline seed must be a non-negative integer");
    c.seed = j["seed"].get<std::uint64_t>();
    c.run_dir = resolve(base, j.value("run_dir", std::string("run")));
    c.decoder = need("decoder");
    c.trainer = j.value("trainer", json::object());
    c.threads = j.value("threads", 0u);
  } catch (const json::type_error& e) {
    throw DataError(std::string("pipeline config: ") + e.what());
  }
  if (c.passes < 1) throw UsageError("pipeline needs at least one pass");
  for (json* binding : {&c.decoder, &c.trainer}) {
    for (const char* key : {"truth", "params_file"})
      if (binding->contains(key)) (*binding)[key] = resolve(base, (*binding)[key].get<std::string>()).string();
  }
  c.config_path = fs::absolute(path);
  c.config_hash = fmt::format("{:016x}", fnv1a(text));
  return c;
}

json to_json(const PassReport& r) {
  json pairs = json::array();
  for (const auto& p : r.pairs) {
    pairs.push_back({{"pair", p.pair},
                     {"assigned", p.assigned},
                     {"retained", p.retained},
                     {"threshold", p.threshold ? json(*p.threshold) : json(nullptr)},
                     {"assigned_s", p.assigned_s},
                     {"retained_s", p.retained_s}});
  }
  return {{"pass", r.pass},
          {"policy", r.policy},
          {"filtering", r.filtering},
          {"pairs", pairs},
          {"untranscribed", r.untranscribed},
          {"assigned_total", r.assigned_total},
          {"retained_total", r.retained_total},
          {"assigned_s", r.assigned_s},
          {"retained_s", r.retained_s},
          {"autot_trainset_size", r.autot_trainset_size},
          {"asr_trainset_size", r.asr_trainset_size},
          {"asr_trainset_ood", r.asr_trainset_ood},
          {"outputs", r.outputs}};
}

PassReport pass_report_from_json(const json& j) {
  PassReport r;
  r.pass = j.at("pass").get<int>();
  r.policy = j.at("policy").get<std::string>();
  r.filtering = j.at("filtering").get<bool>();
  for (const auto& p : j.at("pairs")) {
    r.pairs.push_back({p.at("pair").get<std::string>(), p.at("assigned").get<std::size_t>(),
                       p.at("retained").get<std::size_t>(), opt_number(p.at("threshold")),
                       p.at("assigned_s").get<double>(), p.at("retained_s").get<double>()});
  }
  r.untranscribed = j.at("untranscribed").get<std::size_t>();
  r.assigned_total = j.at("assigned_total").get<std::size_t>();
  r.retained_total = j.at("retained_total").get<std::size_t>();
  r.assigned_s = j.at("assigned_s").get<double>();
  r.retained_s = j.at("retained_s").get<double>();
  r.autot_trainset_size = j.at("autot_trainset_size").get<std::size_t>();
  r.asr_trainset_size = j.at("asr_trainset_size").get<std::size_t>();
  r.asr_trainset_ood = j.at("asr_trainset_ood").get<std::size_t>();
  r.outputs = j.at("outputs").get<std::map<std::string, std::string>>();
  return r;
}

namespace {

std::vector<AutoTEntry> autot_entries(const Selection& sel) {
  std::vector<AutoTEntry> out;
  for (const Utterance& u : sel.transcripts) out.push_back({u, sel.pair_of.at(u.id)});
  return out;
}

void save_pairs(const fs::path& p, const std::map<std::string, std::string>& pair_of) {
  std::ostringstream ss;
  for (const auto& [id, pair] : pair_of) ss << id << '\t' << pair << '\n';
  write_file(p, ss.str());
}

std::vector<AutoTEntry> load_autot(const fs::path& dir, int pass, const LangRegistry& langs) {
  ParseOptions po;
  po.default_langs = langs;
  const Corpus transcripts = load_corpus(dir / fmt::format("autot.pass{}.jsonl", pass), po);
  std::map<std::string, std::string> pair_of;
  std::istringstream in(read_file(dir / fmt::format("autot.pass{}.pairs", pass)));
  std::string id, pair;
  while (in >> id >> pair) pair_of[id] = pair;
  std::vector<AutoTEntry> out;
  for (const Utterance& u : transcripts.utterances()) {
    auto it = pair_of.find(u.id);
    if (it == pair_of.end()) throw DataError("run directory lacks a pair for '" + u.id + "'");
    out.push_back({u, it->second});
  }
  return out;
}

void check_coverage(std::span<const DecodeResult> results, std::span<const Utterance* const> utts,
                    const PairRegistry& registry) {
  std::set<std::pair<std::string_view, std::string_view>> seen;
  std::set<std::string_view> wanted;
  for (const Utterance* u : utts) wanted.insert(u->id);
  for (const DecodeResult& r : results) {
    if (!wanted.contains(r.utt_id)) throw DecoderProtocolError("decoder answered for unrequested utterance '" + r.utt_id + "'");
    if (!registry.index(r.pair)) throw DecoderProtocolError("decoder answered for unknown pair '" + r.pair + "'");
    if (!seen.emplace(r.utt_id, r.pair).second)
      throw DecoderProtocolError(fmt::format("duplicate result for {}\t{}", r.utt_id, r.pair));
  }
  if (seen.size() != utts.size() * registry.size())
    throw DecoderProtocolError(fmt::format("decoder returned {} results, expected {}", seen.size(),
                                           utts.size() * registry.size()));
}

}  // namespace

PipelineRun run_pipeline(const PipelineConfig& config, DecoderInterface& decoder, TrainerInterface& trainer,
                         const PipelineOptions& opts) {
  const std::string started = now_iso8601();
  const Corpus corpus = load_corpus(config.corpus);
  const Manifest mant = load_manifest(config.mant);
  const std::optional<Manifest> ood = config.ood ? std::optional(load_manifest(*config.ood)) : std::nullopt;
  const Manifest untranscribed = load_manifest(config.untranscribed);
  mant.resolve(corpus);
  if (ood) ood->resolve(corpus);
  untranscribed.resolve(corpus);
  const PairRegistry registry = PairRegistry::defaults();
  const std::string source = mant.source();

  const fs::path dir = config.run_dir;
  fs::create_directories(dir);
  const fs::path state_path = dir / "state.json";

  PipelineRun run;
  std::vector<AutoTEntry> prev_autot;
  std::optional<Manifest> prev_manifest;
  int first_pass = 1;
  if (opts.resume && fs::exists(state_path)) {
    const json state = json::parse(read_file(state_path));
    if (state.at("config_hash").get<std::string>() != config.config_hash)
      throw UsageError("run directory was produced by a different config; refusing to resume");
    for (const auto& r : state.at("reports")) run.passes.push_back(pass_report_from_json(r));
    if (!run.passes.empty()) {
      const int last = run.passes.back().pass;
      prev_manifest = load_manifest(dir / fmt::format("autot.pass{}.manifest", last));
      prev_autot = load_autot(dir, last, corpus.langs());
      first_pass = last + 1;
      spdlog::info("resuming after pass {}", last);
    }
  }

  std::vector<const Utterance*> utts;
  for (const ManifestEntry& e : untranscribed.entries()) utts.push_back(&corpus.at(e.id));
  std::sort(utts.begin(), utts.end(), [](const Utterance* a, const Utterance* b) { return a->id < b->id; });

  for (int pass = first_pass; pass <= config.passes; ++pass) {
    spdlog::info("pass {}: policy {}, filtering {}", pass, to_string(config.policy.mode),
                 config.policy.active(pass) ? "on" : "off");
    PassReport report;
    report.pass = pass;
    report.policy = to_string(config.policy.mode);
    report.filtering = config.policy.active(pass);
    report.untranscribed = utts.size();

    std::vector<Manifest> parts{mant};
    if (ood) parts.push_back(*ood);
    if (prev_manifest) parts.push_back(*prev_manifest);
    const Manifest autot_set = manifest_union(parts, fmt::format("trainset.autot.pass{}", pass));
    const std::string autot_set_file = fmt::format("trainset.autot.pass{}.manifest", pass);
    save_manifest(dir / autot_set_file, autot_set);
    report.autot_trainset_size = autot_set.size();

    TrainRequest treq{"autot", pass, &autot_set, &corpus, prev_autot, dir};
    const ModelHandle autot_model = trainer.train(treq);

    std::vector<DecodeResult> results = decoder.decode(autot_model, utts, registry.pairs());
    check_coverage(results, utts, registry);
    std::sort(results.begin(), results.end(), [&](const DecodeResult& a, const DecodeResult& b) {
      if (a.utt_id != b.utt_id) return a.utt_id < b.utt_id;
      return *registry.index(a.pair) < *registry.index(b.pair);
    });
    const std::string decodes_file = fmt::format("decodes.pass{}.tsv", pass);
    {
      std::ostringstream ss;
      write_decodes(ss, results);
      write_file(dir / decodes_file, ss.str());
    }

    const Assignment assigned = assign_all(results, registry);
    const auto thresholds = compute_thresholds(assigned);
    Selection sel = filter(assigned, thresholds, report.filtering, pass, corpus, source, registry);
    const std::string manifest_file = fmt::format("autot.pass{}.manifest", pass);
    const std::string transcripts_file = fmt::format("autot.pass{}.jsonl", pass);
    const std::string pairs_file = fmt::format("autot.pass{}.pairs", pass);
    save_manifest(dir / manifest_file, sel.manifest);
    save_corpus(dir / transcripts_file, Corpus(corpus.langs(), sel.transcripts));
    save_pairs(dir / pairs_file, sel.pair_of);

    const Manifest asr_set = manifest_union(std::vector<Manifest>{mant, sel.manifest},
                                            fmt::format("trainset.asr.pass{}", pass));
    const std::string asr_set_file = fmt::format("trainset.asr.pass{}.manifest", pass);
    save_manifest(dir / asr_set_file, asr_set);
    const std::vector<AutoTEntry> this_autot = autot_entries(sel);
    TrainRequest areq{"asr", pass, &asr_set, &corpus, this_autot, dir};
    const ModelHandle asr_model = trainer.train(areq);

    report.pairs = sel.pairs;
    report.assigned_total = sel.assigned_total();
    report.retained_total = sel.retained_total();
    report.assigned_s = sel.assigned_s();
    report.retained_s = sel.retained_s();
    report.asr_trainset_size = asr_set.size();
    report.asr_trainset_ood = static_cast<std::size_t>(std::count_if(
        asr_set.entries().begin(), asr_set.entries().end(),
        [](const ManifestEntry& e) { return e.provenance.kind == ProvenanceKind::OOD; }));
    report.outputs = {{"autot_trainset", autot_set_file},
                      {"autot_model", fs::relative(autot_model.state_path, dir).string()},
                      {"decodes", decodes_file},
                      {"autot_manifest", manifest_file},
                      {"autot_transcripts", transcripts_file},
                      {"autot_pairs", pairs_file},
                      {"asr_trainset", asr_set_file},
                      {"asr_model", fs::relative(asr_model.state_path, dir).string()}};
    write_json(dir / fmt::format("report.pass{}.json", pass), to_json(report));
    run.passes.push_back(report);

    json reports = json::array();
    for (const auto& r : run.passes) reports.push_back(to_json(r));
    write_json(state_path, {{"config_hash", config.config_hash}, {"completed_passes", pass}, {"reports", reports}});

    prev_manifest = std::move(sel.manifest);
    prev_autot = this_autot;
  }

  json outputs = json::array();
  for (const auto& r : run.passes) {
    outputs.push_back(fmt::format("report.pass{}.json", r.pass));
    for (const auto& [role, p] : r.outputs) outputs.push_back(p);
  }
  outputs.push_back("state.json");
  const json record = {{"command", opts.command_line.empty() ? "pipeline run" : opts.command_line},
                       {"config", config.config_path.string()},
                       {"config_hash", config.config_hash},
                       {"seed", config.seed},
                       {"policy", to_string(config.policy.mode)},
                       {"passes", config.passes},
                       {"resumed_from", first_pass - 1},
                       {"versions", {{"cswitch", kVersion}}},
                       {"timestamps", {{"started", started}, {"finished", now_iso8601()}}},
                       {"outputs", outputs}};
  run.run_record = dir / "run.json";
  write_json(run.run_record, record);
  return run;
}

}  // namespace cswitch
