import json
import math
import os
import subprocess
from pathlib import Path

import jsonschema
import pytest
from referencing import Registry, Resource

import cswitch

FIXTURES = Path(os.environ.get("CSWITCH_FIXTURES", Path(__file__).parent.parent / "fixtures"))
SCHEMAS = Path(os.environ.get("CSWITCH_SCHEMAS", Path(__file__).parent.parent.parent / "schemas"))
BIN = os.environ.get("CSWITCH_BIN")


def _registry():
    resources = []
    for p in SCHEMAS.glob("*.schema.json"):
        resources.append((p.name, Resource.from_contents(json.loads(p.read_text()))))
    return Registry().with_resources(resources)


REGISTRY = _registry()


def validate(name, doc):
    s = REGISTRY.contents(f"{name}.schema.json")
    jsonschema.Draft202012Validator.check_schema(s)
    jsonschema.Draft202012Validator(s, registry=REGISTRY).validate(doc)


@pytest.fixture(scope="module")
def train():
    return cswitch.Corpus.load(FIXTURES / "train.txt")


@pytest.fixture(scope="module")
def dev():
    return cswitch.Corpus.load(FIXTURES / "dev.txt")


@pytest.fixture(scope="module")
def test_set():
    return cswitch.Corpus.load(FIXTURES / "test.txt")


def test_corpus_roundtrip(train):
    assert len(train) == 150
    again = cswitch.Corpus.parse(train.dumps("jsonl"), "jsonl")
    assert again.dumps() == train.dumps()
    first = train.ids()[0]
    assert first in train
    assert all("/" in t for t in train[first]["tokens"])


def test_corpus_errors():
    with pytest.raises(cswitch.ParseError):
        cswitch.Corpus.parse("a s 1 x/en\na s 1 y/zu\n")
    with pytest.raises(cswitch.DataError):
        cswitch.Corpus.parse("a s 1 x/qq\n")


def test_stats(train):
    s = train.stats()
    validate("stats", s)
    assert s["utterances"] == 150


def test_lm_and_cs_perplexity(train, dev, test_set):
    lm = cswitch.train_lm(train, order=3, smoothing="witten-bell", vocab_from=[dev, test_set])
    assert lm.order == 3 and lm.smoothing == "witten-bell"
    ctx = ["<s>"]
    words = [w.split("/")[0] for w in train[train.ids()[0]]["tokens"]]
    total = sum(math.exp(lm.logprob(ctx, w)) for w in set(words))
    assert 0 < total <= 1
    row = lm.cs_perplexity(test_set, label="wb3")
    validate("perplexity", row)
    assert row["cpp"] > 0 and set(row["mpp_per_lang"]) == {"en", "zu"}


def test_uniform_identity(train):
    u = cswitch.uniform_lm([train])
    row = u.cs_perplexity(train)
    v = row["pp"]
    for key in ("mpp", "cpp"):
        assert row[key] == pytest.approx(v, rel=1e-12)


def test_fit_weights(train, dev, test_set):
    a = cswitch.train_lm(train, order=2, vocab_from=[dev, test_set])
    b = cswitch.uniform_lm([train, dev, test_set])
    fit = cswitch.fit_weights([a, b], dev)
    hist = fit["loglik_history"]
    assert all(y >= x for x, y in zip(hist, hist[1:]))
    assert sum(fit["weights"]) == pytest.approx(1.0)
    assert fit["mixture"].perplexity(dev)["pp"] == pytest.approx(fit["dev_perplexity"], rel=1e-9)


def test_align():
    r = cswitch.align(["a", "b", "c"], ["a", "x", "c", "d"])
    assert r["cost"] == 2
    assert [s[0] for s in r["steps"]] == ["match", "sub", "match", "ins"]


def test_score_and_bootstrap(test_set):
    hyp = cswitch.Corpus.load(FIXTURES / "hyp_a.txt")
    hyp_b = cswitch.Corpus.load(FIXTURES / "hyp_b.txt")
    s = cswitch.score(test_set, hyp)
    validate("score", s)
    assert len(s["accuracy"]["rows"]) == 7
    b1 = cswitch.bootstrap(test_set, hyp, hyp_b, seed=3, resamples=1000)
    b8 = cswitch.bootstrap(test_set, hyp, hyp_b, seed=3, resamples=1000, threads=8)
    validate("bootstrap", b1)
    assert b1 == b8


def test_pipeline(tmp_path):
    config = cswitch.write_fixture(tmp_path / "fx", seed=11, policy="tp1p2")
    passes = cswitch.run_pipeline(config)
    doc = {"run_dir": str(tmp_path), "run_record": "run.json", "passes": passes}
    validate("pipeline-run", doc)
    assert passes[0]["assigned_total"] == 200
    assert passes[1]["retained_total"] < 200


def test_in_process_cli_errors():
    rc, out, err = cswitch.run_cli(["score"])
    assert rc == 1 and out == ""
    rc, _, err = cswitch.run_cli(["stats", "--corpus", "/nonexistent/x.txt"])
    assert rc == 2


def cli(*args):
    if BIN:
        p = subprocess.run([BIN, "--json", *args], capture_output=True, text=True)
        return p.returncode, p.stdout
    rc, out, _ = cswitch.run_cli(["--json", *args])
    return rc, out


def test_cli_json_outputs_match_schemas(tmp_path):
    F = FIXTURES
    outputs = {}
    steps = [
        ("stats", ["stats", "--corpus", F / "train.txt"]),
        ("train-lm", ["train-lm", "--text", F / "train.txt", "--vocab-from", F / "dev.txt", "--vocab-from",
                      F / "test.txt", "--smoothing", "wb", "--out", tmp_path / "a.arpa"]),
        ("train-lm", ["train-lm", "--text", F / "dev.txt", "--vocab-from", F / "train.txt", "--vocab-from",
                      F / "test.txt", "--order", "2", "--smoothing", "wb", "--out", tmp_path / "b.arpa"]),
        ("interpolate", ["interpolate", "--model", tmp_path / "a.arpa", tmp_path / "b.arpa", "--dev", F / "dev.txt",
                         "--out", tmp_path / "mix.json"]),
        ("perplexity", ["perplexity", "--model", tmp_path / "a.arpa", "--text", F / "test.txt", "--dev",
                        F / "dev.txt", "--cs"]),
        ("perplexity", ["perplexity", "--mixture", tmp_path / "mix.json", "--text", F / "test.txt"]),
        ("score", ["score", "--ref", F / "test.txt", "--hyp", F / "hyp_a.txt", "--switch-metrics"]),
        ("bootstrap", ["bootstrap", "--ref", F / "test.txt", "--hyp-a", F / "hyp_a.txt", "--hyp-b", F / "hyp_b.txt",
                       "--seed", "9", "--resamples", "1000"]),
        ("simulate-fixture", ["simulate", "fixture", "--out-dir", tmp_path / "fx", "--seed", "5", "--policy", "tp1"]),
        ("pipeline-run", ["pipeline", "run", "--config", tmp_path / "fx" / "config.json"]),
        ("select", ["select", "--decodes", tmp_path / "fx" / "run" / "decodes.pass1.tsv", "--corpus",
                    tmp_path / "fx" / "corpus.jsonl", "--threshold-mode", "tp1", "--out-dir", tmp_path / "sel"]),
        ("simulate-decode", ["simulate", "decode", "--truth", tmp_path / "fx" / "truth.jsonl", "--seed", "5",
                             "--out", tmp_path / "dec.tsv"]),
        ("simulate-train", ["simulate", "train", "--truth", tmp_path / "fx" / "truth.jsonl", "--corpus",
                            tmp_path / "fx" / "corpus.jsonl", "--trainset", tmp_path / "fx" / "mant.manifest",
                            "--seed", "5"]),
    ]
    for name, args in steps:
        rc, out = cli(*map(str, args))
        assert rc == 0, (name, out)
        doc = json.loads(out)
        validate(name, doc)
        outputs[name] = doc
    assert outputs["interpolate"]["fitted"] is True
    assert len(outputs["score"]["accuracy"]["rows"]) == 7
