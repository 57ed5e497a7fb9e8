// tests/test_semisup.cpp

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

#include <doctest.h>

#include <fstream>
#include <sstream>

#include "cswitch/error.hpp"
#include "cswitch/semisup.hpp"
#include "test_util.hpp"

using namespace cswitch;
using namespace cswitch::testing;
namespace fs = std::filesystem;

namespace {

DecodeResult res(const std::string& id, const std::string& pair, double conf, std::string_view hyp = "w/en") {
  auto t = toks(hyp);
  std::vector<double> c(t.size(), conf);
  return DecodeResult::make(id, pair, std::move(t), std::move(c));
}

}  // namespace

TEST_CASE("pair registry") {
  PairRegistry r = PairRegistry::defaults();
  REQUIRE(r.size() == 4);
  CHECK(r.pairs()[0].id == "EZ");
  CHECK(r.pairs()[3].id == "ET");
  CHECK(*r.index("ES") == 2);
  CHECK_THROWS_AS(r.at("ZZ"), DataError);
  CHECK(r.true_pair(utt("u", "a/en b/xh"))->id == "EX");
  CHECK(r.true_pair(utt("u", "a/en"))->id == "EZ");
  CHECK(r.true_pair(utt("u", "a/zu b/xh")) == nullptr);
}

TEST_CASE("mean confidence") {
  std::vector<double> same(7, 0.1);
  CHECK(mean_confidence(same) == 0.1);
  std::vector<double> v{0.2, 0.4, 0.6, 0.8};
  CHECK(mean_confidence(v) == 0.5);
  CHECK(mean_confidence({}) == 0.0);
  CHECK_THROWS_AS(DecodeResult::make("u", "EZ", toks("a/en"), {1.5}), DataError);
  CHECK_THROWS_AS(DecodeResult::make("u", "EZ", toks("a/en"), {}), DataError);
  CHECK(DecodeResult::make("u", "EZ", {}, {}).utt_confidence == 0.0);
}

TEST_CASE("threshold policies") {
  ThresholdPolicy nt{ThresholdMode::NT}, p1{ThresholdMode::TP1}, p12{ThresholdMode::TP1P2};
  CHECK_FALSE(nt.active(1));
  CHECK_FALSE(nt.active(2));
  CHECK(p1.active(1));
  CHECK_FALSE(p1.active(2));
  CHECK(p12.active(1));
  CHECK(p12.active(2));
  CHECK(parse_threshold_mode("T_P1P2") == ThresholdMode::TP1P2);
  CHECK(parse_threshold_mode("tp1") == ThresholdMode::TP1);
  CHECK(parse_threshold_mode("NT") == ThresholdMode::NT);
  CHECK_THROWS_AS(parse_threshold_mode("sometimes"), UsageError);
  CHECK(to_string(ThresholdMode::TP1) == "T_P1");
}

TEST_CASE("pair assignment takes the most confident decoder") {
  PairRegistry reg = PairRegistry::defaults();
  std::vector<DecodeResult> rs{res("u", "EZ", 0.3), res("u", "EX", 0.7), res("u", "ES", 0.5), res("u", "ET", 0.1)};
  CHECK(assign_pair(rs, reg).pair == "EX");
  std::vector<DecodeResult> tie{res("u", "ET", 0.6), res("u", "ES", 0.6), res("u", "EZ", 0.2)};
  CHECK(assign_pair(tie, reg).pair == "ES");
  CHECK_THROWS_AS(assign_pair({}, reg), NoResults);
}

TEST_CASE("threshold fixture keeps the results above the mean") {
  PairRegistry reg = PairRegistry::defaults();
  Corpus corpus = corpus_of({{"a", "s", 1, {}}, {"b", "s", 2, {}}, {"c", "s", 3, {}}, {"d", "s", 4, {}}});
  std::vector<DecodeResult> rs{res("a", "EZ", 0.2), res("b", "EZ", 0.4), res("c", "EZ", 0.6), res("d", "EZ", 0.8)};
  Assignment as = assign_all(rs, reg);
  REQUIRE(as.at("EZ").size() == 4);
  CHECK(as.at("EX").empty());
  auto th = compute_thresholds(as);
  CHECK(*th.at("EZ") == 0.5);
  CHECK_FALSE(th.at("EX"));

  Selection on = filter(as, th, true, 1, corpus, "corpus.jsonl", reg);
  REQUIRE(on.manifest.size() == 2);
  CHECK(on.manifest.entries()[0].id == "c");
  CHECK(on.manifest.entries()[1].id == "d");
  CHECK(on.manifest.entries()[0].provenance == Provenance::autot(1));
  CHECK(on.manifest.source() == "corpus.jsonl");
  CHECK(on.retained_total() == 2);
  CHECK(on.assigned_total() == 4);
  CHECK(on.retained_s() == 7.0);
  CHECK(on.pairs[0].retained_s == 7.0);
  CHECK(on.pair_of.at("c") == "EZ");
  REQUIRE(on.transcripts.size() == 2);
  CHECK(on.transcripts[0].duration_s == 3.0);
  CHECK(on.transcripts[0].tokens == toks("w/en"));

  Selection off = filter(as, th, false, 2, corpus, "corpus.jsonl", reg);
  CHECK(off.retained_total() == 4);
  CHECK(off.manifest.entries()[3].provenance == Provenance::autot(2));
}

TEST_CASE("equal confidences are all retained") {
  PairRegistry reg = PairRegistry::defaults();
  Corpus corpus = corpus_of({{"a", "s", 1, {}}, {"b", "s", 1, {}}, {"c", "s", 1, {}}});
  std::vector<DecodeResult> rs{res("a", "ES", 0.1), res("b", "ES", 0.1), res("c", "ES", 0.1)};
  Assignment as = assign_all(rs, reg);
  Selection s = filter(as, compute_thresholds(as), true, 1, corpus, "x", reg);
  CHECK(s.retained_total() == 3);
}

TEST_CASE("decode lines") {
  LangRegistry langs = LangRegistry::defaults();
  DecodeResult r = res("u1", "EZ", 0.25, "a/en b/zu");
  std::string line = format_decode_line(r);
  CHECK(line == "u1\tEZ\t0.25\ta/en b/zu");
  DecodeResult back = parse_decode_line(line, langs);
  CHECK(back == r);
  DecodeResult empty = parse_decode_line("u2\tET\t0", langs);
  CHECK(empty.hyp.empty());
  CHECK(parse_decode_line(format_decode_line(res("u", "EZ", 0.1 + 0.2)), langs).utt_confidence == 0.1 + 0.2);
  CHECK_THROWS_AS(parse_decode_line("u1\tEZ", langs), DecoderProtocolError);
  CHECK_THROWS_AS(parse_decode_line("u1\tEZ\thigh\ta/en", langs), DecoderProtocolError);
  CHECK_THROWS_AS(parse_decode_line("u1\tEZ\t1.5\ta/en", langs), DecoderProtocolError);
  CHECK_THROWS_AS(parse_decode_line("u1\tEZ\t0.5\ta/qq", langs), DecoderProtocolError);
  CHECK_THROWS_AS(parse_decode_line("u1\tEZ\t0.5\tnolang", langs), DecoderProtocolError);

  std::vector<DecodeResult> rs{r, res("u2", "EX", 1.0)};
  std::ostringstream out;
  write_decodes(out, rs);
  std::istringstream in("# header\n" + out.str());
  CHECK(read_decodes(in, langs) == rs);
}

namespace {

// Fixed confidences per (utterance, pair); hypotheses echo the pair.
class TableDecoder final : public DecoderInterface {
 public:
  std::map<std::pair<std::string, std::string>, double> conf;
  int calls = 0;

  std::vector<DecodeResult> decode(const ModelHandle&, std::span<const Utterance* const> utts,
                                   std::span<const LanguagePair> pairs) override {
    ++calls;
    std::vector<DecodeResult> out;
    for (auto it = utts.rbegin(); it != utts.rend(); ++it)
      for (const auto& p : pairs) out.push_back(res((*it)->id, p.id, conf.at({(*it)->id, p.id}), "w/en"));
    return out;
  }
};

struct PipelineFixture {
  fs::path dir;
  PipelineConfig config;
  TableDecoder decoder;

  explicit PipelineFixture(ThresholdMode mode) {
    dir = fresh_dir("semisup_pipeline");
    std::vector<Utterance> us{utt("m1", "a/en b/zu"), utt("o1", "c/xh"), {"x1", "s", 1, {}},
                              {"x2", "s", 2, {}},      {"x3", "s", 3, {}}, {"x4", "s", 4, {}}};
    save_corpus(dir / "corpus.jsonl", corpus_of(us));
    save_manifest(dir / "mant.manifest", Manifest("mant", "corpus.jsonl", {{"m1", Provenance::mant()}}));
    save_manifest(dir / "ood.manifest", Manifest("ood", "corpus.jsonl", {{"o1", Provenance::ood()}}));
    std::vector<ManifestEntry> ux;
    for (const char* id : {"x1", "x2", "x3", "x4"}) ux.push_back({id, Provenance::mant()});
    save_manifest(dir / "untr.manifest", Manifest("untr", "corpus.jsonl", ux));
    config.corpus = dir / "corpus.jsonl";
    config.mant = dir / "mant.manifest";
    config.ood = dir / "ood.manifest";
    config.untranscribed = dir / "untr.manifest";
    config.policy.mode = mode;
    config.run_dir = dir / "run";
    config.config_hash = "test";
    const char* pairs[] = {"EZ", "EX", "ES", "ET"};
    double c[4][4] = {{0.9, 0.1, 0.1, 0.1}, {0.2, 0.1, 0.1, 0.1}, {0.1, 0.1, 0.8, 0.1}, {0.1, 0.1, 0.7, 0.1}};
    const char* ids[] = {"x1", "x2", "x3", "x4"};
    for (int i = 0; i < 4; ++i)
      for (int p = 0; p < 4; ++p) decoder.conf[{ids[i], pairs[p]}] = c[i][p];
  }
};

}  // namespace

TEST_CASE("pipeline composes the training sets of each pass") {
  PipelineFixture f(ThresholdMode::TP1);
  NullTrainer trainer;
  PipelineRun run = run_pipeline(f.config, f.decoder, trainer);
  REQUIRE(run.passes.size() == 2);
  const PassReport& p1 = run.passes[0];
  // EZ gets x1 (0.9) and x2 (0.2): threshold 0.55; ES gets x3 (0.8) and x4 (0.7): threshold 0.75
  CHECK(p1.filtering);
  CHECK(p1.assigned_total == 4);
  CHECK(p1.retained_total == 2);
  CHECK(p1.pairs[0].assigned == 2);
  CHECK(p1.pairs[2].retained == 1);
  CHECK(*p1.pairs[0].threshold == doctest::Approx(0.55));
  CHECK(p1.autot_trainset_size == 2);  // ManT + OOD
  CHECK(p1.asr_trainset_size == 3);    // ManT + AutoT@1
  CHECK(p1.asr_trainset_ood == 0);
  const PassReport& p2 = run.passes[1];
  CHECK_FALSE(p2.filtering);
  CHECK(p2.retained_total == 4);
  CHECK(p2.autot_trainset_size == 4);  // ManT + OOD + AutoT@1

  Manifest asr2 = load_manifest(f.config.run_dir / "trainset.asr.pass2.manifest");
  CHECK(asr2.size() == 5);
  CHECK(asr2.find("x1")->provenance == Provenance::autot(2));
  CHECK_FALSE(asr2.contains("o1"));
  Manifest at1 = load_manifest(f.config.run_dir / "trainset.autot.pass2.manifest");
  CHECK(at1.find("o1")->provenance == Provenance::ood());
  CHECK(at1.find("x3")->provenance == Provenance::autot(1));
  CHECK(fs::exists(f.config.run_dir / "run.json"));
  CHECK(fs::exists(f.config.run_dir / "model.asr.pass2.json"));
}

TEST_CASE("pipeline resume skips completed passes") {
  PipelineFixture f(ThresholdMode::TP1P2);
  NullTrainer trainer;
  f.config.passes = 1;
  run_pipeline(f.config, f.decoder, trainer);
  const std::string p1 = [&] {
    std::ifstream in(f.config.run_dir / "report.pass1.json");
    return std::string(std::istreambuf_iterator<char>(in), {});
  }();
  f.config.passes = 2;
  PipelineOptions o;
  o.resume = true;
  PipelineRun run = run_pipeline(f.config, f.decoder, trainer, o);
  CHECK(f.decoder.calls == 2);
  REQUIRE(run.passes.size() == 2);
  CHECK(run.passes[1].filtering);
  std::ifstream in(f.config.run_dir / "report.pass1.json");
  CHECK(std::string(std::istreambuf_iterator<char>(in), {}) == p1);

  f.config.config_hash = "other";
  CHECK_THROWS_AS(run_pipeline(f.config, f.decoder, trainer, o), UsageError);
}

TEST_CASE("pipeline rejects incomplete decoder output") {
  PipelineFixture f(ThresholdMode::NT);
  class Partial final : public DecoderInterface {
   public:
    std::vector<DecodeResult> decode(const ModelHandle&, std::span<const Utterance* const> utts,
                                     std::span<const LanguagePair>) override {
      return {res(utts.front()->id, "EZ", 0.5)};
    }
  } partial;
  NullTrainer trainer;
  CHECK_THROWS_AS(run_pipeline(f.config, partial, trainer), DataError);
}

TEST_CASE("external decoder speaks the line protocol") {
  fs::path dir = fresh_dir("external_decoder");
  std::vector<Utterance> us{{"x1", "s", 1, {}}, {"x2", "s", 1, {}}};
  std::vector<const Utterance*> ptrs{&us[0], &us[1]};
  const PairRegistry reg = PairRegistry::defaults();
  auto pairs = reg.pairs();
  ModelHandle model{"autot", 1, dir / "model.json", {}};
  ExternalDecoder echo(
      "while IFS=\"$(printf '\\t')\" read -r id pair; do printf '%s\\t%s\\t0.5\\thi/en\\n' \"$id\" \"$pair\"; done",
      10, LangRegistry::defaults());
  auto out = echo.decode(model, ptrs, pairs);
  REQUIRE(out.size() == 8);
  CHECK(out[0].hyp == toks("hi/en"));
  CHECK(out[0].utt_confidence == 0.5);

  ExternalDecoder wrong("while read -r l; do printf 'zz\\tEZ\\t0.5\\n'; done", 10, LangRegistry::defaults());
  CHECK_THROWS_AS(wrong.decode(model, ptrs, pairs), DecoderProtocolError);
  ExternalDecoder dies("exit 3", 10, LangRegistry::defaults());
  CHECK_THROWS_AS(dies.decode(model, ptrs, pairs), DecoderProtocolError);
  ExternalDecoder slow("sleep 5", 0.2, LangRegistry::defaults());
  CHECK_THROWS_AS(slow.decode(model, ptrs, pairs), DecoderProtocolError);
  ExternalDecoder sees_model("read -r l; printf 'x1\\tEZ\\t1\\t%s/en\\n' \"$(basename \"$CSWITCH_MODEL\" .json)\"",
                             10, LangRegistry::defaults());
  std::vector<const Utterance*> one{&us[0]};
  auto m = sees_model.decode(model, one, pairs.first(1));
  CHECK(m[0].hyp == toks("model/en"));
}

TEST_CASE("pipeline config") {
  fs::path dir = fresh_dir("pipeline_config");
  {
    std::ofstream out(dir / "c.json");
    out << R"({"corpus":"corpus.jsonl","mant":"m.manifest","untranscribed":"u.manifest",
              "policy":"T_P1","passes":2,"seed":5,"run_dir":"run",
              "decoder":{"type":"external","command":"cat"}})";
  }
  PipelineConfig c = load_pipeline_config(dir / "c.json");
  CHECK(c.corpus == dir / "corpus.jsonl");
  CHECK(c.run_dir == dir / "run");
  CHECK_FALSE(c.ood);
  CHECK(c.policy.mode == ThresholdMode::TP1);
  CHECK(c.seed == 5);
  CHECK(c.config_hash.size() == 16);
  {
    std::ofstream out(dir / "noseed.json");
    out << R"({"corpus":"c","mant":"m","untranscribed":"u","policy":"NT","run_dir":"r","decoder":{"type":"sim"}})";
  }
  CHECK_THROWS_AS(load_pipeline_config(dir / "noseed.json"), UsageError);
}
