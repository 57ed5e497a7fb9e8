"""Code-switched ASR evaluation: n-gram LMs, code-switch perplexity, scoring,
bootstrap tests and confidence-based data selection."""

from ._cswitch import (
    Corpus,
    DataError,
    LanguageModel,
    MixtureLM,
    NGramModel,
    ParseError,
    UsageError,
    __version__,
    align,
    bootstrap,
    fit_weights,
    run_cli,
    run_pipeline,
    score,
    train_lm,
    uniform_lm,
    write_fixture,
)

__all__ = [
    "Corpus",
    "DataError",
    "LanguageModel",
    "MixtureLM",
    "NGramModel",
    "ParseError",
    "UsageError",
    "__version__",
    "align",
    "bootstrap",
    "fit_weights",
    "run_cli",
    "run_pipeline",
    "score",
    "train_lm",
    "uniform_lm",
    "write_fixture",
]
