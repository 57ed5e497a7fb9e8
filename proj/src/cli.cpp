// src/cli.cpp

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

#include "cswitch/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>

#include "cswitch/corpus.hpp"
#include "cswitch/cs_metrics.hpp"
#include "cswitch/decoder_sim.hpp"
#include "cswitch/error.hpp"
#include "cswitch/ngram_lm.hpp"
#include "cswitch/parallel.hpp"
#include "cswitch/report.hpp"
#include "cswitch/scoring.hpp"
#include "cswitch/semisup.hpp"
#include "cswitch/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace cswitch {

namespace {

struct Ctx {
  std::istream& in;
  std::ostream& out;
  std::ostream& err;
  bool json = false;
  unsigned threads = 0;
  std::string command_line;
};

void emit(Ctx& c, const json& j, const std::string& text) {
  if (c.json)
    c.out << j.dump(2) << '\n';
  else
    c.out << text;
}

json read_json_file(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw DataError("cannot open '" + p.string() + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw DataError("'" + p.string() + "': " + e.what());
  }
}

void write_text(const fs::path& p, const std::string& text) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw DataError("cannot write '" + p.string() + "'");
  out << text;
}

std::vector<Utterance> utterances_of(const Corpus& c, const Manifest* split) {
  std::vector<Utterance> out;
  for (const Utterance& u : c.utterances())
    if (!split || split->contains(u.id)) out.push_back(u);
  return out;
}

// ---------------------------------------------------------------------------
// models

struct LoadedModel {
  std::shared_ptr<const LanguageModel> model;
  std::vector<std::string> components;
  std::vector<double> weights;
};

std::shared_ptr<const NGramModel> load_model(const fs::path& p, std::shared_ptr<const Vocabulary> vocab) {
  return std::make_shared<const NGramModel>(load_arpa(p, std::move(vocab)));
}

std::vector<std::shared_ptr<const LanguageModel>> load_components(const std::vector<fs::path>& paths,
                                                                  std::shared_ptr<const Vocabulary> vocab) {
  std::vector<std::shared_ptr<const LanguageModel>> out;
  for (const fs::path& p : paths) {
    auto m = load_model(p, vocab);
    if (!vocab) vocab = m->shared_vocab();
    out.push_back(std::move(m));
  }
  return out;
}

LoadedModel load_mixture(const fs::path& p, std::shared_ptr<const Vocabulary> vocab) {
  const json j = read_json_file(p);
  const fs::path base = fs::absolute(p).parent_path();
  std::vector<fs::path> paths;
  LoadedModel lm;
  try {
    for (const auto& c : j.at("components")) {
      fs::path cp(c.get<std::string>());
      paths.push_back(cp.is_absolute() ? cp : base / cp);
      lm.components.push_back(c.get<std::string>());
    }
    lm.weights = j.at("weights").get<std::vector<double>>();
  } catch (const json::exception& e) {
    throw DataError("mixture file '" + p.string() + "': " + e.what());
  }
  if (paths.size() != lm.weights.size()) throw DataError("mixture file has mismatched components and weights");
  lm.model = std::make_shared<const MixtureLM>(load_components(paths, std::move(vocab)), lm.weights);
  return lm;
}

// ---------------------------------------------------------------------------

struct StatsArgs {
  std::string corpus, split;
  bool include_untranscribed = false;
};

int cmd_stats(Ctx& c, const StatsArgs& a) {
  const Corpus corpus = load_corpus(a.corpus);
  std::optional<Manifest> split;
  if (!a.split.empty()) split = load_manifest(a.split);
  const CorpusStats s = corpus_stats(corpus, split ? &*split : nullptr, {a.include_untranscribed});
  emit(c, to_json(s), format_stats(s));
  return kExitOk;
}

struct TrainArgs {
  std::vector<std::string> text;
  std::string split, vocab, out, write_vocab;
  std::vector<std::string> vocab_from;
  int order = 3;
  std::string smoothing = "kn";
  bool no_fallback = false;
  bool open_vocab = false;
};

int cmd_train(Ctx& c, const TrainArgs& a) {
  std::vector<Corpus> texts;
  for (const auto& p : a.text) texts.push_back(load_corpus(p));
  std::optional<Manifest> split;
  if (!a.split.empty()) split = load_manifest(a.split);

  std::shared_ptr<const Vocabulary> vocab;
  if (!a.vocab.empty()) {
    vocab = std::make_shared<const Vocabulary>(load_vocab(a.vocab, a.open_vocab));
  } else {
    std::vector<Corpus> extra;
    for (const auto& p : a.vocab_from) extra.push_back(load_corpus(p));
    std::vector<const Corpus*> all;
    for (const auto& t : texts) all.push_back(&t);
    for (const auto& t : extra) all.push_back(&t);
    vocab = std::make_shared<const Vocabulary>(Vocabulary::from_corpora(all, a.open_vocab));
  }
  std::vector<std::vector<std::string>> sentences;
  for (const auto& t : texts) {
    auto s = sentences_of(t, split ? &*split : nullptr);
    sentences.insert(sentences.end(), std::make_move_iterator(s.begin()), std::make_move_iterator(s.end()));
  }
  TrainOptions opts;
  opts.order = a.order;
  opts.smoothing = smoothing_from_string(a.smoothing);
  opts.allow_fallback = !a.no_fallback;
  const NGramModel model = train(sentences, vocab, opts);
  save_arpa(a.out, model);
  if (!a.write_vocab.empty()) {
    std::ostringstream ss;
    write_vocab(ss, *vocab);
    write_text(a.write_vocab, ss.str());
  }
  json counts = json::array();
  std::string text = fmt::format("wrote {} (order {}, {}, {} words)\n", a.out, model.order(),
                                 to_string(*model.smoothing()), vocab->words().size());
  for (int n = 1; n <= model.order(); ++n) {
    counts.push_back(model.count(n));
    text += fmt::format("  {}-grams: {}\n", n, model.count(n));
  }
  emit(c,
       {{"out", a.out},
        {"order", model.order()},
        {"smoothing", to_string(*model.smoothing())},
        {"requested_smoothing", to_string(opts.smoothing)},
        {"vocab_size", vocab->words().size()},
        {"sentences", sentences.size()},
        {"ngram_counts", counts}},
       text);
  return kExitOk;
}

struct InterpArgs {
  std::vector<std::string> models;
  std::string dev, vocab, out;
  std::vector<double> weights;
  double tolerance = 1e-6;
  int max_iter = 100;
};

int cmd_interpolate(Ctx& c, const InterpArgs& a) {
  if (a.models.size() < 2) throw UsageError("interpolate needs at least two --model files");
  std::shared_ptr<const Vocabulary> vocab;
  if (!a.vocab.empty()) vocab = std::make_shared<const Vocabulary>(load_vocab(a.vocab));
  std::vector<fs::path> paths(a.models.begin(), a.models.end());
  auto comps = load_components(paths, vocab);

  json j;
  std::string text;
  std::vector<double> weights;
  if (!a.weights.empty()) {
    if (a.weights.size() != comps.size()) throw UsageError("--weights must give one weight per --model");
    MixtureLM mix(comps, a.weights);
    weights = mix.weights();
    j["fitted"] = false;
    if (!a.dev.empty()) {
      const Corpus dev = load_corpus(a.dev);
      j["dev_perplexity"] = perplexity(mix, dev.utterances()).pp;
    }
  } else {
    if (a.dev.empty()) throw UsageError("interpolate needs --dev to fit weights (or fixed --weights)");
    const Corpus dev = load_corpus(a.dev);
    const auto sentences = sentences_of(dev);
    const FitResult fit = fit_weights(comps, sentences, {a.tolerance, a.max_iter});
    weights = fit.mixture->weights();
    j["fitted"] = true;
    j["dev_perplexity"] = fit.dev_perplexity;
    j["iterations"] = fit.iterations;
    j["converged"] = fit.converged;
    j["loglik_history"] = fit.loglik_history;
  }
  const fs::path out_dir = fs::absolute(a.out).parent_path();
  json components = json::array();
  for (const auto& p : a.models) components.push_back(fs::relative(fs::absolute(p), out_dir).string());
  const json mixture = {{"components", components}, {"weights", weights}};
  write_text(a.out, mixture.dump(2) + "\n");
  j["out"] = a.out;
  j["components"] = a.models;
  j["weights"] = weights;
  text = fmt::format("wrote {}\n", a.out);
  for (std::size_t i = 0; i < weights.size(); ++i) text += fmt::format("  {:.6f}  {}\n", weights[i], a.models[i]);
  if (j.contains("dev_perplexity")) text += fmt::format("  dev perplexity {:.3f}\n", j["dev_perplexity"].get<double>());
  emit(c, j, text);
  return kExitOk;
}

struct PplArgs {
  std::string model, mixture, text, dev, label, vocab, split;
  bool cs = false;
};

int cmd_perplexity(Ctx& c, const PplArgs& a) {
  if (a.model.empty() == a.mixture.empty()) throw UsageError("give exactly one of --model and --mixture");
  std::shared_ptr<const Vocabulary> vocab;
  if (!a.vocab.empty()) vocab = std::make_shared<const Vocabulary>(load_vocab(a.vocab));
  std::shared_ptr<const LanguageModel> model =
      a.model.empty() ? load_mixture(a.mixture, vocab).model : load_model(a.model, vocab);
  const Corpus text = load_corpus(a.text);
  std::optional<Manifest> split;
  if (!a.split.empty()) split = load_manifest(a.split);
  const std::vector<Utterance> utts = utterances_of(text, split ? &*split : nullptr);
  std::optional<double> pp_dev;
  if (!a.dev.empty()) {
    const Corpus dev = load_corpus(a.dev);
    pp_dev = perplexity(*model, dev.utterances()).pp;
  }
  const std::string label = a.label.empty() ? fs::path(a.model.empty() ? a.mixture : a.model).stem().string() : a.label;
  if (!a.cs) {
    const PerplexityResult r = perplexity(*model, utts);
    json j = to_json(r);
    j["label"] = label;
    j["pp_dev"] = pp_dev ? json(*pp_dev) : json(nullptr);
    std::string t = format_table({"LM", "PP (dev)", "PP", "Scored", "Sentences"},
                                 {{label, fmt_opt(pp_dev), fmt::format("{:.1f}", r.pp), std::to_string(r.n_scored),
                                   std::to_string(r.n_sentences)}});
    emit(c, j, t);
    return kExitOk;
  }
  PerplexityRow row{label, pp_dev, cs_perplexity(*model, utts)};
  const std::vector<LangTag> langs = langs_present({&text});
  emit(c, to_json(row, langs), format_perplexity(std::span(&row, 1), langs));
  return kExitOk;
}

struct ScoreArgs {
  std::string ref, hyp, dev_ref, dev_hyp, vocab, label = "system";
  bool switch_metrics = false;
};

int cmd_score(Ctx& c, const ScoreArgs& a) {
  if (a.dev_ref.empty() != a.dev_hyp.empty()) throw UsageError("--dev-ref and --dev-hyp go together");
  const Corpus ref = load_corpus(a.ref);
  const Corpus hyp = load_corpus(a.hyp);
  const auto pairs = align_corpora(ref, hyp, c.threads);
  std::optional<Corpus> dev_ref;
  WerRow row;
  row.label = a.label;
  if (!a.dev_ref.empty()) {
    dev_ref = load_corpus(a.dev_ref);
    const auto dev_pairs = align_corpora(*dev_ref, load_corpus(a.dev_hyp), c.threads);
    row.dev = wer(dev_pairs);
  }
  std::optional<Vocabulary> vocab;
  if (!a.vocab.empty())
    vocab = load_vocab(a.vocab);
  else if (a.switch_metrics) {
    std::vector<const Corpus*> refs{&ref};
    if (dev_ref) refs.push_back(&*dev_ref);
    vocab = Vocabulary::from_corpora(refs);
  }
  LangLookup lookup;
  if (vocab) lookup = lookup_from(*vocab);
  row.test = score(pairs, a.switch_metrics ? &lookup : nullptr);
  const std::vector<LangTag> langs = langs_present({&ref});
  std::string text = format_wer(std::span(&row, 1), langs);
  if (row.test.switches) text += "\n" + format_accuracy(*row.test.switches, langs);
  emit(c, to_json(row, langs), text);
  return kExitOk;
}

struct BootArgs {
  std::string ref, hyp_a, hyp_b, name_a = "A", name_b = "B";
  std::optional<std::uint64_t> seed;
  std::size_t resamples = 10000;
  double confidence = 0.95;
};

int cmd_bootstrap(Ctx& c, const BootArgs& a) {
  if (!a.seed) throw UsageError("bootstrap draws random resamples; pass an explicit --seed");
  const Corpus ref = load_corpus(a.ref);
  const auto pa = align_corpora(ref, load_corpus(a.hyp_a), c.threads);
  const auto pb = align_corpora(ref, load_corpus(a.hyp_b), c.threads);
  BootstrapOptions o;
  o.resamples = a.resamples;
  o.seed = *a.seed;
  o.threads = c.threads;
  o.confidence = a.confidence;
  const BootstrapResult r = bootstrap(pa, pb, o);
  json j = to_json(r);
  j["name_a"] = a.name_a;
  j["name_b"] = a.name_b;
  emit(c, j, format_bootstrap(r, a.name_a, a.name_b));
  return kExitOk;
}

struct SelectArgs {
  std::string decodes, corpus, mode, out_dir, source;
  int pass = 1;
};

int cmd_select(Ctx& c, const SelectArgs& a) {
  const ThresholdPolicy policy{parse_threshold_mode(a.mode)};
  if (a.pass < 1) throw UsageError("--pass must be at least 1");
  const Corpus corpus = load_corpus(a.corpus);
  std::ifstream in(a.decodes);
  if (!in) throw DataError("cannot open '" + a.decodes + "'");
  const std::vector<DecodeResult> results = read_decodes(in, corpus.langs());
  const PairRegistry registry = PairRegistry::defaults();
  const Assignment assigned = assign_all(results, registry);
  const auto thresholds = compute_thresholds(assigned);
  const std::string source = a.source.empty() ? fs::path(a.corpus).filename().string() : a.source;
  const Selection sel = filter(assigned, thresholds, policy.active(a.pass), a.pass, corpus, source, registry);

  const fs::path dir(a.out_dir);
  fs::create_directories(dir);
  save_manifest(dir / fmt::format("autot.pass{}.manifest", a.pass), sel.manifest);
  save_corpus(dir / fmt::format("autot.pass{}.jsonl", a.pass), Corpus(corpus.langs(), sel.transcripts));
  std::ostringstream pairs;
  for (const auto& [id, pair] : sel.pair_of) pairs << id << '\t' << pair << '\n';
  write_text(dir / fmt::format("autot.pass{}.pairs", a.pass), pairs.str());
  json j = selection_json(sel);
  j["policy"] = to_string(policy.mode);
  write_text(dir / fmt::format("select.pass{}.json", a.pass), j.dump(2) + "\n");

  std::vector<std::vector<std::string>> rows;
  for (const auto& p : sel.pairs)
    rows.push_back({p.pair, std::to_string(p.assigned), fmt_opt(p.threshold, 4), std::to_string(p.retained),
                    fmt::format("{:.2f}", p.retained_s / 3600.0)});
  rows.push_back({"TOTAL", std::to_string(sel.assigned_total()), "", std::to_string(sel.retained_total()),
                  fmt::format("{:.2f}", sel.retained_s() / 3600.0)});
  std::string text = fmt::format("pass {} policy {} filtering {}\n", a.pass, to_string(policy.mode),
                                 sel.active ? "on" : "off");
  text += format_table({"Pair", "Assigned", "Threshold", "Retained", "Hours"}, rows);
  emit(c, j, text);
  return kExitOk;
}

struct PipelineArgs {
  std::string config;
  bool resume = false;
};

int cmd_pipeline(Ctx& c, const PipelineArgs& a) {
  PipelineConfig cfg = load_pipeline_config(a.config);
  if (c.threads) cfg.threads = c.threads;
  PipelineOptions opts;
  opts.resume = a.resume;
  opts.command_line = c.command_line;
  const PipelineRun run = run_pipeline(cfg, opts);
  json passes = json::array();
  for (const auto& p : run.passes) passes.push_back(to_json(p));
  const json j = {{"run_dir", cfg.run_dir.string()}, {"run_record", run.run_record.string()}, {"passes", passes}};
  std::string text = format_passes(run.passes, PairRegistry::defaults());
  text += fmt::format("# run record {}\n", run.run_record.string());
  emit(c, j, text);
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct SimArgs {
  std::string out_dir, truth, params, state, ids, out, corpus, trainset, autot, pairs, policy = "nt";
  std::optional<std::uint64_t> seed;
  std::size_t mant = 60, ood = 40, untranscribed = 200;
  int passes = 2;
  std::optional<double> noise, penalty, sub, del, ins;
};

ChannelParams sim_params(const SimArgs& a, bool need_seed) {
  json j = json::object();
  if (!a.params.empty()) j = read_json_file(a.params);
  if (a.seed) j["seed"] = *a.seed;
  if (need_seed && !j.contains("seed")) throw UsageError("the simulator is random; pass --seed (or a params file with a seed)");
  if (a.noise) j["confidence_noise_sd"] = *a.noise;
  if (a.penalty) j["mismatch_penalty"] = *a.penalty;
  for (auto [key, v] : {std::pair{"sub", a.sub}, std::pair{"del", a.del}, std::pair{"ins", a.ins}})
    if (v) j["default_rates"][key] = *v;
  return channel_params_from_json(j);
}

TrainState sim_state(const SimArgs& a) {
  std::string path = a.state;
  if (path.empty())
    if (const char* env = std::getenv("CSWITCH_MODEL")) path = env;
  if (path.empty()) return TrainState::initial(PairRegistry::defaults());
  const json j = read_json_file(path);
  return train_state_from_json(j.contains("state") ? j["state"] : j);
}

int cmd_sim_fixture(Ctx& c, const SimArgs& a) {
  const ChannelParams params = sim_params(a, true);
  FixtureOptions fo;
  fo.mant = a.mant;
  fo.ood = a.ood;
  fo.untranscribed = a.untranscribed;
  fo.seed = params.seed;
  const Fixture f = make_fixture(fo);
  write_fixture(a.out_dir, f, params, parse_threshold_mode(a.policy), a.passes);
  const json j = {{"out_dir", a.out_dir},
                  {"config", (fs::path(a.out_dir) / "config.json").string()},
                  {"mant", f.mant.size()},
                  {"ood", f.ood.size()},
                  {"untranscribed", f.untranscribed.size()},
                  {"seed", params.seed}};
  emit(c, j, fmt::format("wrote fixture to {} ({} ManT, {} OOD, {} untranscribed)\n", a.out_dir, f.mant.size(),
                         f.ood.size(), f.untranscribed.size()));
  return kExitOk;
}

int cmd_sim_serve(Ctx& c, const SimArgs& a) {
  const ChannelParams params = sim_params(a, true);
  const SimTruth truth(load_corpus(a.truth), PairRegistry::defaults());
  serve_protocol(c.in, c.out, truth, params, sim_state(a));
  return kExitOk;
}

int cmd_sim_decode(Ctx& c, const SimArgs& a) {
  const ChannelParams params = sim_params(a, true);
  const SimTruth truth(load_corpus(a.truth), PairRegistry::defaults());
  const TrainState state = sim_state(a);
  std::vector<std::string> ids;
  if (!a.ids.empty()) {
    for (const auto& e : load_manifest(a.ids).entries()) ids.push_back(e.id);
  } else {
    for (const auto& u : truth.corpus().utterances()) ids.push_back(u.id);
  }
  std::sort(ids.begin(), ids.end());
  std::vector<std::string> pair_ids;
  if (a.pairs.empty()) {
    for (const auto& p : truth.registry().pairs()) pair_ids.push_back(p.id);
  } else {
    std::istringstream ss(a.pairs);
    for (std::string p; std::getline(ss, p, ',');) pair_ids.push_back(truth.registry().at(p).id);
  }
  std::vector<SimDecode> decodes(ids.size() * pair_ids.size());
  parallel_for(decodes.size(), c.threads, [&](std::size_t k) {
    decodes[k] = simulate_decode(truth, ids[k / pair_ids.size()], pair_ids[k % pair_ids.size()], params, state);
  });
  std::ostringstream lines;
  std::size_t n_ref = 0, events = 0, edits = 0;
  for (const auto& d : decodes) {
    lines << format_decode_line(d.result) << '\n';
    if (!d.mismatched) {
      n_ref += d.n_ref;
      events += d.events();
      edits += d.edit_distance;
    }
  }
  if (!a.out.empty()) write_text(a.out, lines.str());
  const json j = {{"results", decodes.size()},
                  {"true_pair_tokens", n_ref},
                  {"true_pair_corruption_pct", n_ref ? 100.0 * double(events) / double(n_ref) : 0.0},
                  {"true_pair_wer", n_ref ? 100.0 * double(edits) / double(n_ref) : 0.0},
                  {"out", a.out.empty() ? json(nullptr) : json(a.out)}};
  if (a.out.empty() && !c.json)
    c.out << lines.str();
  else
    emit(c, j, fmt::format("wrote {} results to {}\n", decodes.size(), a.out));
  return kExitOk;
}

int cmd_sim_train(Ctx& c, const SimArgs& a) {
  const ChannelParams params = sim_params(a, false);
  const SimTruth truth(load_corpus(a.truth), PairRegistry::defaults());
  const Corpus corpus = load_corpus(a.corpus);
  const Manifest trainset = load_manifest(a.trainset);
  std::vector<AutoTEntry> autot;
  if (!a.autot.empty()) {
    const Corpus transcripts = load_corpus(a.autot);
    std::map<std::string, std::string> pair_of;
    if (a.pairs.empty()) throw UsageError("--autot needs --pairs (id<TAB>pair lines)");
    std::ifstream pin(a.pairs);
    if (!pin) throw DataError("cannot open '" + a.pairs + "'");
    for (std::string id, pair; pin >> id >> pair;) pair_of[id] = pair;
    for (const Utterance& u : transcripts.utterances()) {
      auto it = pair_of.find(u.id);
      if (it == pair_of.end()) throw DataError("no pair for AutoT utterance '" + u.id + "'");
      autot.push_back({u, it->second});
    }
  }
  TrainRequest req{"asr", 0, &trainset, &corpus, autot, fs::path(".")};
  const TrainState prev = sim_state(a);
  const TrainState next = simulate_train(req, truth, params, prev);
  const json j = {{"state", to_json(next)}};
  if (!a.out.empty()) write_text(a.out, j.dump(2) + "\n");
  std::vector<std::vector<std::string>> rows;
  for (const auto& [pair, st] : next.pairs)
    rows.push_back({pair, fmt::format("{:.4f}", st.m), fmt::format("{:.3f}", st.hours),
                    fmt::format("{:.3f}", st.clean_hours), fmt::format("{:.3f}", st.label_noise)});
  emit(c, j, format_table({"Pair", "m", "Hours", "Clean hours", "Label noise"}, rows));
  return kExitOk;
}

std::string join_args(const std::vector<std::string>& args) {
  std::string s = "cswitch";
  for (const auto& a : args) s += " " + a;
  return s;
}

void route_logs(std::ostream& err) {
  auto sink = std::make_shared<spdlog::sinks::ostream_sink_mt>(err);
  auto logger = std::make_shared<spdlog::logger>("cswitch", sink);
  logger->set_pattern("cswitch: %l: %v");
  logger->set_level(spdlog::level::warn);
  if (const char* v = std::getenv("CSWITCH_LOG")) logger->set_level(spdlog::level::from_str(v));
  spdlog::set_default_logger(logger);
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err) {
  route_logs(err);
  Ctx ctx{in, out, err, false, 0, {}};
  ctx.command_line = join_args(args);

  CLI::App app{"Code-switched ASR development toolkit: n-gram LMs, CS-aware metrics, scoring and "
               "semi-supervised data selection.",
               "cswitch"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);
  app.fallthrough();
  app.failure_message(CLI::FailureMessage::help);
  app.add_flag("--json", ctx.json, "Machine-readable JSON on standard output");
  app.add_option("--threads", ctx.threads, "Worker threads (0: machine parallelism)")->capture_default_str();

  std::function<int()> action;

  StatsArgs st;
  auto* stats = app.add_subcommand("stats", "Per-language durations and token/type counts");
  stats->add_option("--corpus", st.corpus, "Corpus (.jsonl or tagged text)")->required();
  stats->add_option("--split", st.split, "Restrict to the ids of this manifest");
  stats->add_flag("--include-untranscribed", st.include_untranscribed, "Count untranscribed durations");
  stats->callback([&] { action = [&] { return cmd_stats(ctx, st); }; });

  TrainArgs tr;
  auto* tlm = app.add_subcommand("train-lm", "Train a backoff n-gram model and write it as ARPA");
  tlm->add_option("--text", tr.text, "Training corpora")->required();
  tlm->add_option("--split", tr.split, "Restrict training text to this manifest");
  tlm->add_option("--order", tr.order, "N-gram order (1-5)")->check(CLI::Range(1, kMaxOrder))->capture_default_str();
  tlm->add_option("--smoothing", tr.smoothing, "kn (modified Kneser-Ney) or wb (Witten-Bell)")
      ->check(CLI::IsMember({"kn", "wb", "kneser-ney", "witten-bell"}))
      ->capture_default_str();
  tlm->add_flag("--no-fallback", tr.no_fallback, "Fail instead of falling back to Witten-Bell");
  auto* vopt = tlm->add_option("--vocab", tr.vocab, "Vocabulary file (word<TAB>lang per line)");
  tlm->add_option("--vocab-from", tr.vocab_from, "Extra corpora whose words close the vocabulary")->excludes(vopt);
  tlm->add_flag("--open-vocab", tr.open_vocab, "Add <unk> and map unknown words to it");
  tlm->add_option("--out", tr.out, "Output ARPA file")->required();
  tlm->add_option("--write-vocab", tr.write_vocab, "Also write the vocabulary used");
  tlm->callback([&] { action = [&] { return cmd_train(ctx, tr); }; });

  InterpArgs ip;
  auto* itp = app.add_subcommand("interpolate", "Fit (or fix) linear interpolation weights of ARPA models");
  itp->add_option("--model", ip.models, "Component ARPA files (two or more)")->required();
  itp->add_option("--dev", ip.dev, "Development corpus for EM weight fitting");
  itp->add_option("--weights", ip.weights, "Fixed weights instead of fitting");
  itp->add_option("--vocab", ip.vocab, "Vocabulary file attaching languages to words");
  itp->add_option("--tolerance", ip.tolerance, "Stop when per-word log-likelihood improves less")->capture_default_str();
  itp->add_option("--max-iter", ip.max_iter, "EM iteration cap")->capture_default_str();
  itp->add_option("--out", ip.out, "Output mixture JSON")->required();
  itp->callback([&] { action = [&] { return cmd_interpolate(ctx, ip); }; });

  PplArgs pp;
  auto* ppl = app.add_subcommand("perplexity", "Perplexity, optionally decomposed at code-switch points");
  ppl->add_option("--model", pp.model, "ARPA model");
  ppl->add_option("--mixture", pp.mixture, "Mixture JSON written by interpolate");
  ppl->add_option("--text", pp.text, "Evaluation corpus")->required();
  ppl->add_option("--split", pp.split, "Restrict evaluation to this manifest");
  ppl->add_option("--dev", pp.dev, "Development corpus for the PP (dev) column");
  ppl->add_option("--vocab", pp.vocab, "Vocabulary file");
  ppl->add_option("--label", pp.label, "Row label");
  ppl->add_flag("--cs", pp.cs, "Report PP, MPP per language, MPP and CPP");
  ppl->callback([&] { action = [&] { return cmd_perplexity(ctx, pp); }; });

  ScoreArgs sc;
  auto* scr = app.add_subcommand("score", "WER, per-language WER and code-switch accuracy");
  scr->add_option("--ref", sc.ref, "Reference corpus (test)")->required();
  scr->add_option("--hyp", sc.hyp, "Hypothesis corpus (test)")->required();
  scr->add_option("--dev-ref", sc.dev_ref, "Reference corpus (dev)");
  scr->add_option("--dev-hyp", sc.dev_hyp, "Hypothesis corpus (dev)");
  scr->add_option("--vocab", sc.vocab, "Vocabulary giving hypothesis word languages");
  scr->add_option("--label", sc.label, "System label")->capture_default_str();
  scr->add_flag("--switch-metrics", sc.switch_metrics, "Add the detailed accuracy rows");
  scr->callback([&] { action = [&] { return cmd_score(ctx, sc); }; });

  BootArgs bt;
  auto* bs = app.add_subcommand("bootstrap", "Paired bootstrap comparison of two systems' WER");
  bs->add_option("--ref", bt.ref, "Reference corpus")->required();
  bs->add_option("--hyp-a", bt.hyp_a, "Hypotheses of system A")->required();
  bs->add_option("--hyp-b", bt.hyp_b, "Hypotheses of system B")->required();
  bs->add_option("--name-a", bt.name_a, "Display name of A")->capture_default_str();
  bs->add_option("--name-b", bt.name_b, "Display name of B")->capture_default_str();
  bs->add_option("--seed", bt.seed, "Random seed (required)");
  bs->add_option("--resamples", bt.resamples, "Number of resamples (>= 1000)")->capture_default_str();
  bs->add_option("--confidence", bt.confidence, "Interval coverage")->capture_default_str();
  bs->callback([&] { action = [&] { return cmd_bootstrap(ctx, bt); }; });

  SelectArgs se;
  auto* sel = app.add_subcommand("select", "Assign language pairs and apply confidence thresholds");
  sel->add_option("--decodes", se.decodes, "Decode results (protocol response lines)")->required();
  sel->add_option("--corpus", se.corpus, "Corpus holding the decoded utterances")->required();
  sel->add_option("--threshold-mode", se.mode, "nt, tp1 or tp1p2")->required();
  sel->add_option("--pass", se.pass, "Pass index")->capture_default_str();
  sel->add_option("--out-dir", se.out_dir, "Where manifests and transcripts go")->required();
  sel->add_option("--source", se.source, "Corpus reference recorded in the manifest");
  sel->callback([&] { action = [&] { return cmd_select(ctx, se); }; });

  PipelineArgs pa;
  auto* pipe = app.add_subcommand("pipeline", "Semi-supervised training loop");
  pipe->require_subcommand(1);
  auto* prun = pipe->add_subcommand("run", "Run every pass described by a config file");
  prun->add_option("--config", pa.config, "Pipeline config JSON")->required();
  prun->add_flag("--resume", pa.resume, "Continue after the last completed pass");
  prun->callback([&] { action = [&] { return cmd_pipeline(ctx, pa); }; });

  SimArgs sa;
  auto* sim = app.add_subcommand("simulate", "Simulated decoder and trainer");
  sim->require_subcommand(1);
  auto add_channel = [&](CLI::App* s) {
    s->add_option("--seed", sa.seed, "Random seed");
    s->add_option("--params", sa.params, "Channel parameter JSON");
    s->add_option("--noise", sa.noise, "Confidence noise standard deviation");
    s->add_option("--penalty", sa.penalty, "Mismatch penalty");
    s->add_option("--sub", sa.sub, "Substitution rate");
    s->add_option("--del", sa.del, "Deletion rate");
    s->add_option("--ins", sa.ins, "Insertion rate");
  };
  auto* sfx = sim->add_subcommand("fixture", "Write a synthetic corpus, manifests and pipeline config");
  sfx->add_option("--out-dir", sa.out_dir, "Output directory")->required();
  sfx->add_option("--mant", sa.mant, "Manually transcribed utterances")->capture_default_str();
  sfx->add_option("--ood", sa.ood, "Out-of-domain utterances")->capture_default_str();
  sfx->add_option("--untranscribed", sa.untranscribed, "Untranscribed utterances")->capture_default_str();
  sfx->add_option("--policy", sa.policy, "Threshold policy written to the config")->capture_default_str();
  sfx->add_option("--passes", sa.passes, "Passes written to the config")->capture_default_str();
  add_channel(sfx);
  sfx->callback([&] { action = [&] { return cmd_sim_fixture(ctx, sa); }; });

  auto* ssv = sim->add_subcommand("serve", "Answer decoder protocol requests on standard input");
  ssv->add_option("--truth", sa.truth, "Hidden-truth corpus")->required();
  ssv->add_option("--state", sa.state, "Model state JSON (default: $CSWITCH_MODEL)");
  add_channel(ssv);
  ssv->callback([&] { action = [&] { return cmd_sim_serve(ctx, sa); }; });

  auto* sdc = sim->add_subcommand("decode", "Decode utterances with every pair decoder");
  sdc->add_option("--truth", sa.truth, "Hidden-truth corpus")->required();
  sdc->add_option("--ids", sa.ids, "Manifest of utterances to decode (default: all)");
  sdc->add_option("--pairs", sa.pairs, "Comma-separated pair ids (default: all)");
  sdc->add_option("--state", sa.state, "Model state JSON");
  sdc->add_option("--out", sa.out, "Output file (default: standard output)");
  add_channel(sdc);
  sdc->callback([&] { action = [&] { return cmd_sim_decode(ctx, sa); }; });

  auto* stn = sim->add_subcommand("train", "Update a model state from a training manifest");
  stn->add_option("--truth", sa.truth, "Hidden-truth corpus")->required();
  stn->add_option("--corpus", sa.corpus, "Corpus with ManT/OOD transcripts")->required();
  stn->add_option("--trainset", sa.trainset, "Training manifest")->required();
  stn->add_option("--autot", sa.autot, "AutoT transcripts corpus");
  stn->add_option("--pairs", sa.pairs, "AutoT pair assignments (id<TAB>pair)");
  stn->add_option("--state", sa.state, "Previous state JSON");
  stn->add_option("--out", sa.out, "Output state JSON");
  add_channel(stn);
  stn->callback([&] { action = [&] { return cmd_sim_train(ctx, sa); }; });

  std::vector<std::string> argv_store{"cswitch"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& s : argv_store) argv.push_back(s.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e, out, err);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (!action) throw UsageError("no command given");
    return action();
  } catch (const UsageError& e) {
    err << "cswitch: usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const DataError& e) {
    err << "cswitch: " << e.what() << '\n';
    return kExitData;
  } catch (const nlohmann::json::exception& e) {
    err << "cswitch: malformed JSON input: " << e.what() << '\n';
    return kExitData;
  } catch (const fs::filesystem_error& e) {
    err << "cswitch: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    err << "cswitch: internal error: " << e.what() << '\n';
    return kExitInternal;
  }
}

}  // namespace cswitch
