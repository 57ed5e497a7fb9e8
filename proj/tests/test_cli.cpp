// tests/test_cli.cpp

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

#include <json.hpp>

#include "cswitch/cli.hpp"
#include "test_util.hpp"

using namespace cswitch;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::istringstream in;
  std::ostringstream out, err;
  int code = run_cli(args, in, out, err);
  return {code, out.str(), err.str()};
}

std::string fx(const std::string& name) { return std::string(CSWITCH_FIXTURES) + "/" + name; }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  std::string l;
  while (std::getline(in, l)) out.push_back(l);
  return out;
}

std::vector<std::string> words(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream in(line);
  std::string w;
  while (in >> w) out.push_back(w);
  return out;
}

// Trains a trigram on the fixture text with a closed vocabulary over train/dev/test.
fs::path trained_lm(const fs::path& dir) {
  Run r = run({"train-lm", "--text", fx("train.txt"), "--vocab-from", fx("train.txt"), "--vocab-from",
               fx("dev.txt"), "--vocab-from", fx("test.txt"), "--out", (dir / "lm.arpa").string(),
               "--write-vocab", (dir / "vocab.tsv").string()});
  REQUIRE(r.code == 0);
  return dir / "lm.arpa";
}

}  // namespace

TEST_CASE("usage errors exit with 1") {
  Run r = run({});
  CHECK(r.code == 1);
  r = run({"frobnicate"});
  CHECK(r.code == 1);
  CHECK(r.err.find("Usage") != std::string::npos);
  CHECK(run({"--help"}).code == 0);
  CHECK(run({"--version"}).code == 0);
  CHECK(run({"score", "--ref", fx("test.txt")}).code == 1);
  CHECK(run({"train-lm", "--text", fx("train.txt"), "--order", "9", "--out", "/tmp/x.arpa"}).code == 1);
}

TEST_CASE("data errors exit with 2") {
  Run r = run({"stats", "--corpus", "/nonexistent/corpus.txt"});
  CHECK(r.code == 2);
  CHECK_FALSE(r.err.empty());
  fs::path dir = testing::fresh_dir("cli_data_errors");
  {
    std::ofstream out(dir / "dup.txt");
    out << "a s 1 x/en\na s 1 y/en\n";
  }
  r = run({"stats", "--corpus", (dir / "dup.txt").string()});
  CHECK(r.code == 2);
  CHECK(r.err.find("line 2") != std::string::npos);
  r = run({"score", "--ref", fx("test.txt"), "--hyp", fx("dev.txt")});
  CHECK(r.code == 2);
}

TEST_CASE("randomized commands require a seed") {
  CHECK(run({"bootstrap", "--ref", fx("test.txt"), "--hyp-a", fx("hyp_a.txt"), "--hyp-b", fx("hyp_b.txt")}).code == 1);
  CHECK(run({"simulate", "fixture", "--out-dir", "/tmp/cswitch_test_noseed"}).code == 1);
}

TEST_CASE("stats") {
  Run r = run({"stats", "--corpus", fx("train.txt")});
  REQUIRE(r.code == 0);
  auto header = words(lines(r.out)[0]);
  CHECK(header.front() == "Language");
  r = run({"--json", "stats", "--corpus", fx("train.txt")});
  REQUIRE(r.code == 0);
  json j = json::parse(r.out);
  CHECK(j["utterances"] == 150);
}

TEST_CASE("perplexity report has the code-switch layout") {
  fs::path dir = testing::fresh_dir("cli_perplexity");
  fs::path lm = trained_lm(dir);
  Run r = run({"perplexity", "--model", lm.string(), "--text", fx("test.txt"), "--dev", fx("dev.txt"), "--vocab",
               (dir / "vocab.tsv").string(), "--cs"});
  REQUIRE(r.code == 0);
  auto ls = lines(r.out);
  CHECK(words(ls[0]) == std::vector<std::string>{"LM", "PP", "(dev)", "PP", "MPP_E", "MPP_Z", "MPP", "CPP"});
  CHECK(words(ls[2]).size() == 7);

  r = run({"--json", "perplexity", "--model", lm.string(), "--text", fx("test.txt"), "--vocab",
           (dir / "vocab.tsv").string(), "--cs"});
  REQUIRE(r.code == 0);
  json j = json::parse(r.out);
  CHECK(j["pp"].get<double>() > 1.0);
  CHECK(j["mpp_per_lang"].contains("zu"));

  // training is deterministic
  std::string first = slurp(lm);
  trained_lm(dir);
  CHECK(slurp(lm) == first);
}

TEST_CASE("interpolation writes a usable mixture") {
  fs::path dir = testing::fresh_dir("cli_interpolate");
  fs::path lm = trained_lm(dir);
  Run u = run({"train-lm", "--text", fx("dev.txt"), "--vocab", (dir / "vocab.tsv").string(), "--order", "2",
               "--smoothing", "wb", "--out", (dir / "dev.arpa").string()});
  REQUIRE(u.code == 0);
  Run r = run({"interpolate", "--model", lm.string(), "--model", (dir / "dev.arpa").string(), "--dev",
               fx("dev.txt"), "--vocab", (dir / "vocab.tsv").string(), "--out", (dir / "mix.json").string()});
  REQUIRE(r.code == 0);
  json mix = json::parse(slurp(dir / "mix.json"));
  CHECK(mix["weights"].size() == 2);
  Run p = run({"perplexity", "--mixture", (dir / "mix.json").string(), "--text", fx("test.txt"), "--vocab",
               (dir / "vocab.tsv").string()});
  CHECK(p.code == 0);
}

TEST_CASE("score report layouts") {
  Run r = run({"score", "--ref", fx("test.txt"), "--hyp", fx("hyp_a.txt"), "--dev-ref", fx("dev.txt"), "--dev-hyp",
               fx("dev.txt"), "--switch-metrics"});
  REQUIRE(r.code == 0);
  auto ls = lines(r.out);
  CHECK(words(ls[0]) == std::vector<std::string>{"System", "Dev", "Test", "WER_E", "WER_Z"});
  const std::vector<std::string> rows{"Eng token correct",
                                      "Zul token correct",
                                      "Word correct after switch",
                                      "Zul word correct after switch",
                                      "English word correct after switch",
                                      "Language correct after switch",
                                      "Code-switch bigram correct"};
  std::size_t at = 0;
  while (at < ls.size() && ls[at].rfind("Accuracy", 0) != 0) ++at;
  REQUIRE(at + 2 + rows.size() <= ls.size());
  for (std::size_t i = 0; i < rows.size(); ++i) CHECK(ls[at + 2 + i].rfind(rows[i] + " ", 0) == 0);

  r = run({"--json", "score", "--ref", fx("test.txt"), "--hyp", fx("hyp_a.txt"), "--switch-metrics"});
  REQUIRE(r.code == 0);
  json j = json::parse(r.out);
  CHECK(j["accuracy"]["rows"].size() == 7);
}

TEST_CASE("bootstrap output is reproducible and thread independent") {
  std::vector<std::string> base{"bootstrap", "--ref", fx("test.txt"), "--hyp-a", fx("hyp_a.txt"),
                                "--hyp-b", fx("hyp_b.txt"), "--seed", "11"};
  auto with = [&](std::vector<std::string> pre) {
    pre.insert(pre.end(), base.begin(), base.end());
    return run(pre);
  };
  Run a = with({"--json", "--threads", "1"});
  Run b = with({"--json", "--threads", "1"});
  Run c = with({"--json", "--threads", "8"});
  REQUIRE(a.code == 0);
  CHECK(a.out == b.out);
  CHECK(a.out == c.out);
  json j = json::parse(a.out);
  CHECK(j["seed"] == 11);
}

TEST_CASE("simulated pipeline through the command line") {
  fs::path dir = testing::fresh_dir("cli_pipeline");
  Run f = run({"simulate", "fixture", "--out-dir", dir.string(), "--seed", "5", "--policy", "tp1"});
  REQUIRE(f.code == 0);
  Run p = run({"--json", "pipeline", "run", "--config", (dir / "config.json").string()});
  REQUIRE(p.code == 0);
  json j = json::parse(p.out);
  REQUIRE(j["passes"].size() == 2);
  CHECK(j["passes"][1]["retained_total"] == j["passes"][1]["untranscribed"]);
  CHECK(fs::exists(dir / "run" / "run.json"));

  // the same fixture decoded through the line protocol gives the same files
  json cfg = json::parse(slurp(dir / "config.json"));
  {
    std::ofstream out(dir / "params.json");
    out << cfg["decoder"]["params"].dump();
  }
  cfg["decoder"] = {{"type", "external"},
                    {"command", std::string(CSWITCH_BIN) + " simulate serve --truth " + (dir / "truth.jsonl").string() +
                                    " --params " + (dir / "params.json").string() + " --seed 5"}};
  cfg["trainer"] = {{"type", "sim"}, {"truth", "truth.jsonl"}, {"params_file", "params.json"}};
  cfg["run_dir"] = "run_ext";
  {
    std::ofstream out(dir / "config_ext.json");
    out << cfg.dump(2);
  }
  Run e = run({"pipeline", "run", "--config", (dir / "config_ext.json").string()});
  REQUIRE(e.code == 0);
  for (const char* name : {"decodes.pass1.tsv", "decodes.pass2.tsv", "autot.pass2.manifest", "model.asr.pass2.json"})
    CHECK(slurp(dir / "run" / name) == slurp(dir / "run_ext" / name));

  // the select command reproduces the pipeline's pass-1 selection from its decodes
  Run s = run({"select", "--decodes", (dir / "run" / "decodes.pass1.tsv").string(), "--corpus",
               (dir / "corpus.jsonl").string(), "--threshold-mode", "tp1", "--pass", "1", "--out-dir",
               (dir / "sel").string(), "--source", "corpus.jsonl"});
  REQUIRE(s.code == 0);
  CHECK(slurp(dir / "sel" / "autot.pass1.manifest") == slurp(dir / "run" / "autot.pass1.manifest"));
}
