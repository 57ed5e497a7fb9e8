// python/module.cpp

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

#include <filesystem>
#include <memory>
#include <sstream>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <json.hpp>

#include "cswitch/cli.hpp"
#include "cswitch/corpus.hpp"
#include "cswitch/cs_metrics.hpp"
#include "cswitch/decoder_sim.hpp"
#include "cswitch/error.hpp"
#include "cswitch/ngram_lm.hpp"
#include "cswitch/report.hpp"
#include "cswitch/scoring.hpp"
#include "cswitch/semisup.hpp"
#include "cswitch/version.hpp"
#include "cswitch/vocabulary.hpp"

namespace py = pybind11;
using namespace cswitch;
using nlohmann::json;

namespace {

py::object to_py(const json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

CorpusFormat format_from(const std::string& name) {
  if (name == "jsonl") return CorpusFormat::Jsonl;
  if (name == "tagged" || name == "tagged-text") return CorpusFormat::TaggedText;
  throw UsageError("unknown corpus format '" + name + "' (jsonl or tagged)");
}

// "word/lang" or a bare word
Token token_from(const std::string& s) {
  const auto slash = s.rfind('/');
  if (slash == std::string::npos || slash == 0) return {s, LangTag()};
  return {s.substr(0, slash), LangTag(s.substr(slash + 1))};
}

std::vector<Token> tokens_from(const std::vector<std::string>& words) {
  std::vector<Token> out;
  for (const auto& w : words) out.push_back(token_from(w));
  return out;
}

py::dict utterance_dict(const Utterance& u) {
  py::list toks;
  for (const auto& t : u.tokens) toks.append(t.lang.empty() ? t.surface : t.surface + "/" + t.lang.code);
  py::dict d;
  d["id"] = u.id;
  d["speaker"] = u.speaker;
  d["duration"] = u.duration_s;
  d["tokens"] = toks;
  return d;
}

const char* op_name(EditOp op) {
  switch (op) {
    case EditOp::Match: return "match";
    case EditOp::Sub: return "sub";
    case EditOp::Del: return "del";
    case EditOp::Ins: return "ins";
  }
  return "?";
}

using ModelPtr = std::shared_ptr<LanguageModel>;

ModelPtr train_lm(const std::vector<const Corpus*>& texts, const std::vector<const Corpus*>& vocab_from,
                  int order, const std::string& smoothing, bool allow_fallback, bool open_vocab) {
  if (texts.empty()) throw UsageError("train_lm needs at least one corpus");
  std::vector<const Corpus*> all = texts;
  all.insert(all.end(), vocab_from.begin(), vocab_from.end());
  auto vocab = std::make_shared<const Vocabulary>(Vocabulary::from_corpora(all, open_vocab));
  std::vector<std::vector<std::string>> sentences;
  for (const Corpus* c : texts) {
    auto s = sentences_of(*c);
    sentences.insert(sentences.end(), s.begin(), s.end());
  }
  TrainOptions opt;
  opt.order = order;
  opt.smoothing = smoothing_from_string(smoothing);
  opt.allow_fallback = allow_fallback;
  return std::make_shared<NGramModel>(train(sentences, vocab, opt));
}

py::object score_corpora(const Corpus& ref, const Corpus& hyp, bool switch_metrics, const std::string& label,
                         unsigned threads) {
  const auto pairs = align_corpora(ref, hyp, threads);
  WerRow row;
  row.label = label;
  std::optional<Vocabulary> vocab;
  LangLookup lookup;
  if (switch_metrics) {
    std::vector<const Corpus*> refs{&ref};
    vocab = Vocabulary::from_corpora(refs);
    lookup = lookup_from(*vocab);
  }
  row.test = score(pairs, switch_metrics ? &lookup : nullptr);
  return to_py(to_json(row, langs_present({&ref})));
}

}  // namespace

PYBIND11_MODULE(_cswitch, m) {
  m.doc() = "Code-switched ASR evaluation and semi-supervised selection tools";
  m.attr("__version__") = kVersion;

  auto data_error = py::register_exception<DataError>(m, "DataError", PyExc_ValueError);
  py::register_exception<ParseError>(m, "ParseError", data_error.ptr());
  py::register_exception<UsageError>(m, "UsageError", PyExc_ValueError);

  py::class_<Corpus>(m, "Corpus")
      .def_static("load", [](const std::filesystem::path& p) { return load_corpus(p); }, py::arg("path"))
      .def_static(
          "parse",
          [](const std::string& text, const std::string& format) {
            std::istringstream in(text);
            return parse_corpus(in, format_from(format));
          },
          py::arg("text"), py::arg("format") = "tagged")
      .def_static(
          "from_records",
          [](const std::vector<py::dict>& records, std::optional<std::vector<std::string>> langs) {
            std::vector<Utterance> us;
            for (const auto& r : records) {
              Utterance u;
              u.id = r["id"].cast<std::string>();
              u.speaker = r.contains("speaker") ? r["speaker"].cast<std::string>() : "";
              u.duration_s = r.contains("duration") ? r["duration"].cast<double>() : 0.0;
              if (r.contains("tokens")) u.tokens = tokens_from(r["tokens"].cast<std::vector<std::string>>());
              us.push_back(std::move(u));
            }
            return Corpus(langs ? LangRegistry(*langs) : LangRegistry::defaults(), std::move(us));
          },
          py::arg("records"), py::arg("langs") = py::none())
      .def("save", [](const Corpus& c, const std::filesystem::path& p) { save_corpus(p, c); }, py::arg("path"))
      .def(
          "dumps",
          [](const Corpus& c, const std::string& format) {
            std::ostringstream out;
            write_corpus(out, c, format_from(format));
            return out.str();
          },
          py::arg("format") = "tagged")
      .def("__len__", &Corpus::size)
      .def_property_readonly("langs", [](const Corpus& c) { return c.langs().codes(); })
      .def("ids",
           [](const Corpus& c) {
             std::vector<std::string> out;
             for (const auto& u : c.utterances()) out.push_back(u.id);
             return out;
           })
      .def("__getitem__", [](const Corpus& c, const std::string& id) { return utterance_dict(c.at(id)); })
      .def("__contains__", [](const Corpus& c, const std::string& id) { return c.find(id) != nullptr; })
      .def(
          "stats",
          [](const Corpus& c, bool include_untranscribed) {
            StatsOptions o;
            o.include_untranscribed = include_untranscribed;
            return to_py(to_json(corpus_stats(c, nullptr, o)));
          },
          py::arg("include_untranscribed") = false);

  py::class_<LanguageModel, ModelPtr>(m, "LanguageModel")
      .def_property_readonly("order", &LanguageModel::order)
      .def(
          "logprob",
          [](const LanguageModel& lm, const std::vector<std::string>& context, const std::string& word) {
            return lm.logprob(context, word);
          },
          py::arg("context"), py::arg("word"), "Natural-log probability of `word` after `context`.")
      .def(
          "perplexity",
          [](const LanguageModel& lm, const Corpus& text) { return to_py(to_json(perplexity(lm, text.utterances()))); },
          py::arg("text"))
      .def(
          "cs_perplexity",
          [](const LanguageModel& lm, const Corpus& text, const std::string& label) {
            PerplexityRow row{label, std::nullopt, cs_perplexity(lm, text.utterances())};
            return to_py(to_json(row, langs_present({&text})));
          },
          py::arg("text"), py::arg("label") = "lm");

  py::class_<NGramModel, LanguageModel, std::shared_ptr<NGramModel>>(m, "NGramModel")
      .def_static(
          "load",
          [](const std::filesystem::path& p) -> ModelPtr { return std::make_shared<NGramModel>(load_arpa(p)); },
          py::arg("path"))
      .def("save", [](const NGramModel& lm, const std::filesystem::path& p) { save_arpa(p, lm); }, py::arg("path"))
      .def_property_readonly("smoothing", [](const NGramModel& lm) -> std::optional<std::string> {
        if (!lm.smoothing()) return std::nullopt;
        return to_string(*lm.smoothing());
      })
      .def("ngram_counts", [](const NGramModel& lm) {
        std::vector<std::size_t> out;
        for (int n = 1; n <= lm.order(); ++n) out.push_back(lm.count(n));
        return out;
      });

  py::class_<MixtureLM, LanguageModel, std::shared_ptr<MixtureLM>>(m, "MixtureLM")
      .def(py::init([](const std::vector<ModelPtr>& comps, const std::vector<double>& weights) {
             return std::make_shared<MixtureLM>(std::vector<std::shared_ptr<const LanguageModel>>(comps.begin(), comps.end()),
                                                weights);
           }),
           py::arg("components"), py::arg("weights"))
      .def_property_readonly("weights", &MixtureLM::weights);

  m.def(
      "train_lm",
      [](const Corpus& text, int order, const std::string& smoothing, const std::vector<const Corpus*>& vocab_from,
         bool allow_fallback, bool open_vocab) {
        return train_lm({&text}, vocab_from, order, smoothing, allow_fallback, open_vocab);
      },
      py::arg("text"), py::arg("order") = 3, py::arg("smoothing") = "kneser-ney",
      py::arg("vocab_from") = std::vector<const Corpus*>{}, py::arg("allow_fallback") = true,
      py::arg("open_vocab") = false,
      "Backoff n-gram model; the vocabulary covers `text` and every corpus in `vocab_from`.");

  m.def(
      "uniform_lm",
      [](const std::vector<const Corpus*>& corpora) -> ModelPtr {
        return std::make_shared<NGramModel>(
            make_uniform(std::make_shared<const Vocabulary>(Vocabulary::from_corpora(corpora))));
      },
      py::arg("corpora"));

  m.def(
      "fit_weights",
      [](const std::vector<ModelPtr>& comps, const Corpus& dev, double tolerance, int max_iterations) {
        const auto fit = fit_weights(std::vector<std::shared_ptr<const LanguageModel>>(comps.begin(), comps.end()),
                                     sentences_of(dev), {tolerance, max_iterations});
        py::dict d;
        d["mixture"] = std::const_pointer_cast<MixtureLM>(fit.mixture);
        d["weights"] = fit.mixture->weights();
        d["dev_perplexity"] = fit.dev_perplexity;
        d["loglik_history"] = fit.loglik_history;
        d["iterations"] = fit.iterations;
        d["converged"] = fit.converged;
        return d;
      },
      py::arg("components"), py::arg("dev"), py::arg("tolerance") = 1e-6, py::arg("max_iterations") = 100);

  m.def(
      "align",
      [](const std::vector<std::string>& ref, const std::vector<std::string>& hyp) {
        const AlignedPair p = align(tokens_from(ref), tokens_from(hyp));
        py::list steps;
        for (const auto& s : p.steps)
          steps.append(py::make_tuple(op_name(s.op), s.ref < 0 ? py::object(py::none()) : py::int_(s.ref),
                                      s.hyp < 0 ? py::object(py::none()) : py::int_(s.hyp)));
        py::dict d;
        d["cost"] = p.cost();
        d["steps"] = steps;
        return d;
      },
      py::arg("ref"), py::arg("hyp"), "Minimal Levenshtein alignment as (op, ref index, hyp index) steps.");

  m.def("score", &score_corpora, py::arg("ref"), py::arg("hyp"), py::arg("switch_metrics") = true,
        py::arg("label") = "system", py::arg("threads") = 1);

  m.def(
      "bootstrap",
      [](const Corpus& ref, const Corpus& hyp_a, const Corpus& hyp_b, std::uint64_t seed, std::size_t resamples,
         unsigned threads, const std::string& name_a, const std::string& name_b) {
        BootstrapOptions o;
        o.seed = seed;
        o.resamples = resamples;
        o.threads = threads;
        json j = to_json(bootstrap(align_corpora(ref, hyp_a), align_corpora(ref, hyp_b), o));
        j["name_a"] = name_a;
        j["name_b"] = name_b;
        return to_py(j);
      },
      py::arg("ref"), py::arg("hyp_a"), py::arg("hyp_b"), py::arg("seed"), py::arg("resamples") = 10000,
      py::arg("threads") = 1, py::arg("name_a") = "A", py::arg("name_b") = "B");

  m.def(
      "write_fixture",
      [](const std::filesystem::path& dir, std::uint64_t seed, std::size_t untranscribed, const std::string& policy,
         int passes) {
        FixtureOptions fo;
        fo.seed = seed;
        fo.untranscribed = untranscribed;
        ChannelParams params;
        params.seed = seed;
        write_fixture(dir, make_fixture(fo), params, parse_threshold_mode(policy), passes);
        return dir / "config.json";
      },
      py::arg("dir"), py::arg("seed"), py::arg("untranscribed") = 200, py::arg("policy") = "nt",
      py::arg("passes") = 2, "Synthetic corpus, manifests and a simulated-decoder pipeline config.");

  m.def(
      "run_pipeline",
      [](const std::filesystem::path& config) {
        PipelineRun run;
        {
          py::gil_scoped_release release;
          run = run_pipeline(load_pipeline_config(config));
        }
        py::list passes;
        for (const auto& p : run.passes) passes.append(to_py(to_json(p)));
        return passes;
      },
      py::arg("config"));

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args, const std::string& stdin_text) {
        std::istringstream in(stdin_text);
        std::ostringstream out, err;
        int rc;
        {
          py::gil_scoped_release release;
          rc = run_cli(args, in, out, err);
        }
        return py::make_tuple(rc, out.str(), err.str());
      },
      py::arg("args"), py::arg("stdin") = "", "Runs the command-line tool in process: (exit code, stdout, stderr).");
}
