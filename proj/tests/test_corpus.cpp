// tests/test_corpus.cpp

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

#include <sstream>

#include "cswitch/corpus.hpp"
#include "cswitch/error.hpp"
#include "test_util.hpp"

using namespace cswitch;
using cswitch::testing::corpus_of;
using cswitch::testing::utt;

TEST_CASE("tagged text parses and round-trips") {
  std::istringstream in(
      "# comment\n"
      "u1 spkA 2.5 hello/en sawubona/zu\n"
      "\n"
      "u2 spkB 1 untranscribed\n"
      "u3 spkB 0.75\n");
  // an utterance line without tokens is untranscribed; "untranscribed" alone is a bad token
  CHECK_THROWS_AS(parse_corpus(in, CorpusFormat::TaggedText), ParseError);

  std::istringstream ok("u1 spkA 2.5 hello/en sawubona/zu\nu3 spkB 0.75\n");
  Corpus c = parse_corpus(ok, CorpusFormat::TaggedText);
  REQUIRE(c.size() == 2);
  CHECK(c.at("u1").tokens.size() == 2);
  CHECK(c.at("u1").tokens[1].lang.code == "zu");
  CHECK(c.at("u1").is_code_switched());
  CHECK_FALSE(c.at("u3").is_transcribed());

  std::ostringstream out;
  write_corpus(out, c, CorpusFormat::TaggedText);
  std::istringstream back(out.str());
  CHECK(parse_corpus(back, CorpusFormat::TaggedText) == c);

  std::ostringstream js;
  write_corpus(js, c, CorpusFormat::Jsonl);
  std::istringstream jback(js.str());
  CHECK(parse_corpus(jback, CorpusFormat::Jsonl) == c);
}

TEST_CASE("langs directive restricts the registry") {
  std::istringstream in("#!langs en zu\nu1 s 1 a/en b/xh\n");
  try {
    parse_corpus(in, CorpusFormat::TaggedText);
    FAIL("expected UnknownLang");
  } catch (const UnknownLang& e) {
    CHECK(e.code() == "xh");
    CHECK(e.line() == 2);
  }
}

TEST_CASE("duplicate ids report the offending line") {
  std::istringstream in("a s 1 x/en\nb s 1 y/en\na s 1 z/en\n");
  try {
    parse_corpus(in, CorpusFormat::TaggedText);
    FAIL("expected DuplicateId");
  } catch (const DuplicateId& e) {
    CHECK(e.id() == "a");
    CHECK(e.line() == 3);
  }
  std::istringstream js(
      "{\"langs\":[\"en\"]}\n{\"id\":\"a\",\"speaker\":\"s\",\"duration_s\":1,\"tokens\":[]}\nnot json\n");
  try {
    parse_corpus(js, CorpusFormat::Jsonl);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
  std::istringstream nohdr("{\"id\":\"a\",\"speaker\":\"s\",\"duration_s\":1}\n");
  CHECK_THROWS_AS(parse_corpus(nohdr, CorpusFormat::Jsonl), ParseError);
}

TEST_CASE("surfaces are NFC normalized") {
  const std::string decomposed = "cafe\xCC\x81";  // e + combining acute
  const std::string composed = "caf\xC3\xA9";
  CHECK(nfc(decomposed) == composed);
  std::istringstream in("u1 s 1 " + decomposed + "/en\n");
  Corpus c = parse_corpus(in, CorpusFormat::TaggedText);
  CHECK(c.at("u1").tokens[0].surface == composed);
}

TEST_CASE("manifest parsing and union precedence") {
  std::istringstream in("#source corpus.jsonl\nu1\tManT\nu2\tAutoT@2\n");
  Manifest a = read_manifest(in, "a");
  CHECK(a.source() == "corpus.jsonl");
  CHECK(a.find("u2")->provenance == Provenance::autot(2));

  Manifest b("b", "corpus.jsonl", {{"u2", Provenance::ood()}, {"u0", Provenance::autot(1)}});
  Manifest c("c", "corpus.jsonl", {{"u2", Provenance::autot(1)}, {"u1", Provenance::ood()}});
  std::vector<Manifest> ms{a, b, c};
  Manifest u = manifest_union(ms);
  REQUIRE(u.size() == 3);
  CHECK(u.entries()[0].id == "u0");
  CHECK(u.find("u1")->provenance == Provenance::mant());
  CHECK(u.find("u2")->provenance == Provenance::ood());

  // union is order independent
  std::vector<Manifest> rev{c, b, a};
  CHECK(manifest_union(rev) == u);

  Manifest other("o", "other.jsonl", {});
  std::vector<Manifest> mixed{a, other};
  CHECK_THROWS_AS(manifest_union(mixed), CrossCorpus);

  std::istringstream bad("u1\tManT\nu1\tOOD\n");
  CHECK_THROWS_AS(read_manifest(bad, "bad"), DuplicateId);
  std::istringstream badprov("u1\tAutoT@0\n");
  CHECK_THROWS_AS(read_manifest(badprov, "bad"), ParseError);
}

TEST_CASE("manifest resolution") {
  Corpus c = corpus_of({utt("u1", "a/en")});
  Manifest m("m", "x", {{"u1", Provenance::mant()}, {"u9", Provenance::mant()}});
  CHECK_THROWS_AS(m.resolve(c), UnresolvedId);
}

TEST_CASE("stats credit code-switched durations to every language") {
  Corpus c = corpus_of({
      utt("m1", "a/en b/en a/en", 60),
      utt("m2", "x/zu", 30),
      utt("c1", "a/en x/zu y/zu", 120),
      {"n1", "s", 10, {}},
  });
  CorpusStats s = corpus_stats(c);
  REQUIRE(s.languages.size() == 2);
  const auto& en = s.languages[0];
  const auto& zu = s.languages[1];
  CHECK(en.lang.code == "en");
  CHECK(en.mono_s == 60);
  CHECK(en.cs_s == 120);
  CHECK(en.tokens == 4);
  CHECK(en.types == 2);
  CHECK(zu.mono_s == 30);
  CHECK(zu.cs_s == 120);
  CHECK(zu.tokens == 3);
  CHECK(zu.types == 2);
  CHECK(s.utterances == 3);
  CHECK(s.code_switched == 1);
  CHECK(s.corpus_duration_s == 210);
  CHECK(s.totals.cs_s == 240);
  CHECK(s.untranscribed == 0);
  StatsOptions with;
  with.include_untranscribed = true;
  CorpusStats w = corpus_stats(c, nullptr, with);
  CHECK(w.untranscribed == 1);
  CHECK(w.corpus_duration_s == 220);

  Manifest only("m", "", {{"c1", Provenance::mant()}});
  CorpusStats t = corpus_stats(c, &only);
  CHECK(t.utterances == 1);
  CHECK(t.languages.size() == 2);
  CHECK(t.totals.mono_s == 0);
}
