// src/decoder_sim.cpp

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

#include "cswitch/decoder_sim.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include <fmt/format.h>

#include "cswitch/error.hpp"
#include "cswitch/parallel.hpp"
#include "cswitch/rng.hpp"
#include "cswitch/scoring.hpp"

using nlohmann::json;

namespace cswitch {

const ChannelRates& ChannelParams::for_pair(const std::string& pair) const {
  auto it = rates.find(pair);
  return it == rates.end() ? default_rates : it->second;
}

void ChannelParams::validate() const {
  auto check = [](const std::string& where, const ChannelRates& r) {
    for (double x : {r.sub, r.del, r.ins})
      if (!(x >= 0.0 && x < 1.0)) throw UsageError(where + ": rates must lie in [0,1)");
    if (!(r.sub + r.del + r.ins < 1.0)) throw UsageError(where + ": sub+del+ins must be below 1");
  };
  check("default rates", default_rates);
  for (const auto& [pair, r] : rates) check("rates for " + pair, r);
  if (!(confidence_noise_sd >= 0.0)) throw UsageError("confidence_noise_sd must be non-negative");
  if (!(mismatch_penalty >= 0.0 && mismatch_penalty <= 1.0)) throw UsageError("mismatch_penalty must lie in [0,1]");
  if (!(gain >= 0.0 && gain < 1.0)) throw UsageError("gain must lie in [0,1)");
  if (!(h0 > 0.0)) throw UsageError("h0 must be positive");
}

namespace {

json rates_json(const ChannelRates& r) { return {{"sub", r.sub}, {"del", r.del}, {"ins", r.ins}}; }

ChannelRates rates_from(const json& j, ChannelRates r) {
  r.sub = j.value("sub", r.sub);
  r.del = j.value("del", r.del);
  r.ins = j.value("ins", r.ins);
  return r;
}

}  // namespace

json to_json(const ChannelParams& p) {
  json rates = json::object();
  for (const auto& [pair, r] : p.rates) rates[pair] = rates_json(r);
  return {{"rates", rates},
          {"default_rates", rates_json(p.default_rates)},
          {"confidence_noise_sd", p.confidence_noise_sd},
          {"mismatch_penalty", p.mismatch_penalty},
          {"gain", p.gain},
          {"h0", p.h0},
          {"seed", p.seed}};
}

ChannelParams channel_params_from_json(const json& j) {
  ChannelParams p;
  try {
    if (j.contains("default_rates")) p.default_rates = rates_from(j["default_rates"], p.default_rates);
    if (j.contains("rates"))
      for (const auto& [pair, r] : j["rates"].items()) p.rates[pair] = rates_from(r, p.default_rates);
    p.confidence_noise_sd = j.value("confidence_noise_sd", p.confidence_noise_sd);
    p.mismatch_penalty = j.value("mismatch_penalty", p.mismatch_penalty);
    p.gain = j.value("gain", p.gain);
    p.h0 = j.value("h0", p.h0);
    p.seed = j.value("seed", p.seed);
  } catch (const json::type_error& e) {
    throw DataError(std::string("simulator parameters: ") + e.what());
  }
  p.validate();
  return p;
}

TrainState TrainState::initial(const PairRegistry& registry) {
  TrainState s;
  for (const auto& p : registry.pairs()) s.pairs[p.id] = PairState{};
  return s;
}

double TrainState::m(const std::string& pair) const {
  auto it = pairs.find(pair);
  return it == pairs.end() ? 1.0 : it->second.m;
}

json to_json(const TrainState& s) {
  json out = json::object();
  for (const auto& [pair, st] : s.pairs)
    out[pair] = {{"m", st.m}, {"hours", st.hours}, {"clean_hours", st.clean_hours}, {"label_noise", st.label_noise}};
  return out;
}

TrainState train_state_from_json(const json& j) {
  TrainState s;
  for (const auto& [pair, st] : j.items())
    s.pairs[pair] = {st.at("m").get<double>(), st.value("hours", 0.0), st.value("clean_hours", 0.0),
                     st.value("label_noise", 0.0)};
  return s;
}

// ---------------------------------------------------------------------------

SimTruth::SimTruth(const Corpus& truth, PairRegistry registry)
    : corpus_(std::make_shared<const Corpus>(truth)), registry_(std::move(registry)) {
  for (const Utterance& u : corpus_->utterances())
    for (const Token& t : u.tokens) lang_.try_emplace(t.surface, t.lang);
  for (const auto& p : registry_.pairs()) {
    auto& words = words_[p.id];
    for (const auto& [w, l] : lang_)
      if (p.covers(l)) words.push_back(w);
  }
}

const std::vector<std::string>& SimTruth::pair_words(const std::string& pair) const {
  auto it = words_.find(pair);
  if (it == words_.end()) throw DataError("unknown language pair '" + pair + "'");
  return it->second;
}

const LangTag& SimTruth::lang_of(const std::string& word) const {
  auto it = lang_.find(word);
  if (it == lang_.end()) throw DataError("word '" + word + "' is not in the simulator truth");
  return it->second;
}

namespace {

struct Replacer {
  std::vector<const std::string*> pool;
  const LanguagePair* pair;
  const SimTruth* truth;

  Token pick(double u) const {
    if (pool.empty()) return {"<" + pair->id + ">", pair->first};
    const auto k = std::min(pool.size() - 1, static_cast<std::size_t>(u * static_cast<double>(pool.size())));
    return {*pool[k], truth->lang_of(*pool[k])};
  }
};

}  // namespace

SimDecode simulate_decode(const SimTruth& truth, const std::string& utt_id, const std::string& pair,
                          const ChannelParams& params, const TrainState& state) {
  const Utterance& ref = truth.corpus().at(utt_id);
  const LanguagePair& dec = truth.registry().at(pair);
  const LanguagePair* true_pair = truth.registry().true_pair(ref);
  const std::string true_id = true_pair ? true_pair->id : std::string();
  const ChannelRates& base = params.for_pair(true_id);
  const double m = true_pair ? state.m(true_id) : 1.0;
  const double p_del = base.del * m;
  const double p_sub = base.sub * m;
  const double p_ins = base.ins * m;

  SimDecode out;
  out.mismatched = dec.id != true_id;
  out.n_ref = ref.tokens.size();

  std::unordered_set<std::string_view> in_ref;
  for (const Token& t : ref.tokens) in_ref.insert(t.surface);
  Replacer rep{{}, &dec, &truth};
  for (const std::string& w : truth.pair_words(pair))
    if (!in_ref.contains(w)) rep.pool.push_back(&w);

  std::vector<Token> hyp;
  for (std::size_t i = 0; i < ref.tokens.size(); ++i) {
    auto g = derive_stream(params.seed, "token", utt_id, std::uint64_t{i});
    const double u_event = uniform01(g);
    const double u_ins = uniform01(g);
    const double u_word = uniform01(g);
    const double u_ins_word = uniform01(g);
    const double u_mismatch = uniform01(g);
    const Token& t = ref.tokens[i];
    if (u_event < p_del) {
      ++out.n_del;
    } else if (u_event < p_del + p_sub) {
      ++out.n_sub;
      hyp.push_back(rep.pick(u_word));
    } else if (out.mismatched && (!dec.covers(t.lang) || u_mismatch < params.mismatch_penalty)) {
      ++out.n_forced;
      hyp.push_back(rep.pick(u_word));
    } else {
      hyp.push_back(t);
    }
    if (u_ins < p_ins) {
      ++out.n_ins;
      hyp.push_back(rep.pick(u_ins_word));
    }
  }

  out.edit_distance = edit_distance(ref.tokens, hyp);
  double conf = 0.0;
  if (!hyp.empty() && out.n_ref > 0) {
    conf = 1.0 - static_cast<double>(out.edit_distance) / static_cast<double>(out.n_ref);
    if (out.mismatched) conf -= params.mismatch_penalty;
    if (params.confidence_noise_sd > 0.0) {
      auto g = derive_stream(params.seed, "confidence", utt_id, pair);
      conf += params.confidence_noise_sd * standard_normal(g);
    }
    conf = std::clamp(conf, 0.0, 1.0);
  }
  std::vector<double> tc(hyp.size(), conf);
  out.result = DecodeResult::make(utt_id, pair, std::move(hyp), std::move(tc));
  return out;
}

TrainState simulate_train(const TrainRequest& request, const SimTruth& truth, const ChannelParams& params,
                          const TrainState& prev) {
  struct Acc {
    double clean = 0.0, hours = 0.0, autot_hours = 0.0, noise = 0.0;
  };
  std::map<std::string, Acc> acc;
  std::unordered_map<std::string_view, const AutoTEntry*> autot;
  for (const AutoTEntry& e : request.autot) autot[e.transcript.id] = &e;
  const PairRegistry& registry = truth.registry();

  if (request.trainset) {
    for (const ManifestEntry& e : request.trainset->entries()) {
      if (e.provenance.kind == ProvenanceKind::AutoT) {
        auto it = autot.find(e.id);
        if (it == autot.end()) throw DataError("no AutoT transcript for '" + e.id + "'");
        const AutoTEntry& a = *it->second;
        const Utterance& gold = truth.corpus().at(e.id);
        const double hours = gold.duration_s / 3600.0;
        const double err = gold.tokens.empty()
                               ? 1.0
                               : std::min(1.0, static_cast<double>(edit_distance(gold.tokens, a.transcript.tokens)) /
                                                   static_cast<double>(gold.tokens.size()));
        Acc& x = acc[a.pair];
        x.clean += hours * (1.0 - err);
        x.hours += hours;
        x.autot_hours += hours;
        x.noise += hours * err;
        continue;
      }
      if (!request.corpus) throw DataError("trainer needs the transcript corpus");
      const Utterance& u = request.corpus->at(e.id);
      const std::vector<LangTag> langs = u.languages();
      if (langs.empty()) continue;
      const double hours = u.duration_s / 3600.0;
      for (const auto& p : registry.pairs()) {
        if (!std::all_of(langs.begin(), langs.end(), [&](const LangTag& l) { return p.covers(l); })) continue;
        acc[p.id].clean += hours;
        acc[p.id].hours += hours;
      }
    }
  }

  TrainState next = prev;
  for (const auto& p : registry.pairs()) next.pairs.try_emplace(p.id);
  for (auto& [pair, st] : next.pairs) {
    auto it = acc.find(pair);
    if (it == acc.end()) continue;
    const Acc& x = it->second;
    if (x.clean > 0.0) st.m *= 1.0 - params.gain * x.clean / (x.clean + params.h0);
    st.hours += x.hours;
    st.clean_hours += x.clean;
    if (x.autot_hours > 0.0) st.label_noise = x.noise / x.autot_hours;
  }
  return next;
}

SimTrainer::SimTrainer(std::shared_ptr<const SimTruth> truth, ChannelParams params)
    : truth_(std::move(truth)), params_(std::move(params)) {}

ModelHandle SimTrainer::train(const TrainRequest& request) {
  const TrainState state = simulate_train(request, *truth_, params_, TrainState::initial(truth_->registry()));
  ModelHandle h;
  h.role = request.role;
  h.pass = request.pass;
  h.state = {{"role", request.role},
             {"pass", request.pass},
             {"trainset", request.trainset ? request.trainset->size() : 0},
             {"state", to_json(state)}};
  h.state_path = request.out_dir / fmt::format("model.{}.pass{}.json", request.role, request.pass);
  std::ofstream out(h.state_path);
  if (!out) throw DataError("cannot write '" + h.state_path.string() + "'");
  out << h.state.dump(2) << '\n';
  return h;
}

SimDecoder::SimDecoder(std::shared_ptr<const SimTruth> truth, ChannelParams params, unsigned threads)
    : truth_(std::move(truth)), params_(std::move(params)), threads_(threads) {}

std::vector<DecodeResult> SimDecoder::decode(const ModelHandle& model, std::span<const Utterance* const> utterances,
                                             std::span<const LanguagePair> pairs) {
  const TrainState state = model.state.contains("state") ? train_state_from_json(model.state["state"])
                                                         : TrainState::initial(truth_->registry());
  const std::size_t np = pairs.size();
  std::vector<DecodeResult> out(utterances.size() * np);
  parallel_for(out.size(), threads_, [&](std::size_t k) {
    out[k] = simulate_decode(*truth_, utterances[k / np]->id, pairs[k % np].id, params_, state).result;
  });
  return out;
}

void serve_protocol(std::istream& in, std::ostream& out, const SimTruth& truth, const ChannelParams& params,
                    const TrainState& state) {
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::size_t tab = line.find('\t');
    if (tab == std::string::npos || line.find('\t', tab + 1) != std::string::npos)
      throw DecoderProtocolError(fmt::format("request line {}: expected <utt_id>\\t<pair>", lineno));
    const SimDecode d = simulate_decode(truth, line.substr(0, tab), line.substr(tab + 1), params, state);
    out << format_decode_line(d.result) << '\n' << std::flush;
  }
}

// ---------------------------------------------------------------------------

namespace {

const std::map<std::string, std::pair<std::vector<std::string>, std::vector<std::string>>>& syllables() {
  static const std::map<std::string, std::pair<std::vector<std::string>, std::vector<std::string>>> s = {
      {"en", {{"th", "st", "b", "c", "w", "sh", "gr", "pl"}, {"ing", "er", "at", "ow", "ight", "ed", "and", "ook"}}},
      {"zu", {{"ngi", "uku", "aba", "isi", "ama", "ubu"}, {"hamba", "thanda", "bona", "funda", "khuluma", "dla", "sebenza", "zwa"}}},
      {"xh", {{"ndi", "uku", "aba", "isi", "ama", "ulu"}, {"hamba", "xelela", "bona", "funda", "thetha", "tya", "sebenza", "va"}}},
      {"st", {{"ke", "ho", "ba", "se", "di", "mo"}, {"tsamaya", "rata", "bona", "ithuta", "bua", "ja", "sebetsa", "utlwa"}}},
      {"tn", {{"ke", "go", "ba", "se", "di", "mo"}, {"tsamaya", "rata", "bona", "ithuta", "bua", "ja", "dira", "utlwa"}}},
  };
  return s;
}

std::vector<std::string> make_words(const std::string& lang, std::size_t n, std::mt19937_64& g,
                                    std::set<std::string>& taken) {
  const auto& [pre, post] = syllables().at(lang);
  std::vector<std::string> out;
  std::size_t attempts = 0;
  while (out.size() < n) {
    std::string w = pre[uniform_index(g, pre.size())];
    if (++attempts > 20 * n) w += pre[uniform_index(g, pre.size())];
    w += post[uniform_index(g, post.size())];
    if (attempts > 200 * n) w += std::to_string(out.size());
    if (taken.insert(w).second) out.push_back(w);
  }
  return out;
}

}  // namespace

Fixture make_fixture(const FixtureOptions& o) {
  if (o.min_tokens == 0 || o.max_tokens < o.min_tokens) throw UsageError("fixture token range is empty");
  auto g = derive_stream(o.seed, "fixture");
  const PairRegistry registry = PairRegistry::defaults();
  std::set<std::string> taken;
  std::map<std::string, std::vector<std::string>> words;
  for (const char* l : {"en", "zu", "xh", "st", "tn"}) words[l] = make_words(l, o.words_per_lang, g, taken);
  const std::vector<double> pair_weight = {0.35, 0.15, 0.35, 0.15};

  auto duration = [&](std::size_t n) {
    return std::round((0.5 + 0.35 * static_cast<double>(n) + 0.2 * uniform01(g)) * 100.0) / 100.0;
  };
  auto speaker = [&] { return fmt::format("spk{:02}", uniform_index(g, 20)); };
  auto pick_pair = [&]() -> const LanguagePair& {
    double u = uniform01(g), acc = 0.0;
    for (std::size_t k = 0; k < pair_weight.size(); ++k)
      if (u < (acc += pair_weight[k])) return registry.pairs()[k];
    return registry.pairs().back();
  };
  auto length = [&] { return o.min_tokens + uniform_index(g, o.max_tokens - o.min_tokens + 1); };
  auto word = [&](const LangTag& l) {
    const auto& ws = words.at(l.code);
    return Token{ws[uniform_index(g, ws.size())], l};
  };
  auto bilingual = [&](const std::string& id) {
    const LanguagePair& p = pick_pair();
    Utterance u{id, speaker(), 0.0, {}};
    const std::size_t n = length();
    LangTag cur = uniform01(g) < 0.5 ? p.first : p.second;
    for (std::size_t i = 0; i < n; ++i) {
      if (i > 0 && uniform01(g) < o.switch_prob) cur = cur == p.first ? p.second : p.first;
      u.tokens.push_back(word(cur));
    }
    if (u.languages().size() == 1) u.tokens.back() = word(cur == p.first ? p.second : p.first);
    u.duration_s = duration(n);
    return u;
  };

  std::vector<Utterance> truth;
  std::vector<ManifestEntry> mant, ood, untr;
  for (std::size_t i = 0; i < o.mant; ++i) {
    truth.push_back(bilingual(fmt::format("mant{:05}", i)));
    mant.push_back({truth.back().id, Provenance::mant()});
  }
  const std::vector<std::string> langs = {"en", "zu", "xh", "st", "tn"};
  for (std::size_t i = 0; i < o.ood; ++i) {
    const LangTag l(langs[uniform_index(g, langs.size())]);
    Utterance u{fmt::format("ood{:05}", i), speaker(), 0.0, {}};
    const std::size_t n = length();
    for (std::size_t k = 0; k < n; ++k) u.tokens.push_back(word(l));
    u.duration_s = duration(n);
    truth.push_back(std::move(u));
    ood.push_back({truth.back().id, Provenance::ood()});
  }
  for (std::size_t i = 0; i < o.untranscribed; ++i) {
    truth.push_back(bilingual(fmt::format("untr{:05}", i)));
    untr.push_back({truth.back().id, Provenance::mant()});
  }
  std::vector<Utterance> visible = truth;
  for (Utterance& u : visible)
    if (u.id.starts_with("untr")) u.tokens.clear();

  const LangRegistry reg = LangRegistry::defaults();
  const std::string source = "corpus.jsonl";
  return Fixture{Corpus(reg, truth), Corpus(reg, std::move(visible)), Manifest("mant", source, std::move(mant)),
                 Manifest("ood", source, std::move(ood)), Manifest("untranscribed", source, std::move(untr))};
}

void write_fixture(const std::filesystem::path& dir, const Fixture& f, const ChannelParams& params,
                   ThresholdMode mode, int passes) {
  std::filesystem::create_directories(dir);
  save_corpus(dir / "truth.jsonl", f.truth);
  save_corpus(dir / "corpus.jsonl", f.visible);
  save_manifest(dir / "mant.manifest", f.mant);
  save_manifest(dir / "ood.manifest", f.ood);
  save_manifest(dir / "untranscribed.manifest", f.untranscribed);
  std::string policy = to_string(mode);
  const json config = {{"corpus", "corpus.jsonl"},
                       {"mant", "mant.manifest"},
                       {"ood", "ood.manifest"},
                       {"untranscribed", "untranscribed.manifest"},
                       {"policy", policy},
                       {"passes", passes},
                       {"seed", params.seed},
                       {"run_dir", "run"},
                       {"decoder", {{"type", "sim"}, {"truth", "truth.jsonl"}, {"params", to_json(params)}}},
                       {"trainer", {{"type", "sim"}}}};
  std::ofstream out(dir / "config.json");
  if (!out) throw DataError("cannot write '" + (dir / "config.json").string() + "'");
  out << config.dump(2) << '\n';
}

}  // namespace cswitch
