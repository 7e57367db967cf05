"""Operator vocabulary, stopwords, and per-slot question strings.

The operator lexicon maps each aggregation / filter operator id to the
natural-language keywords users say for it; the same lexicon drives both
salient-phrase scoring and synthetic-data fills. All three resources ship
as data files and can be overridden by callers.
"""

from __future__ import annotations

import json
from functools import lru_cache
from importlib import resources
from pathlib import Path

AGGREGATION_OPERATORS = (
    "count_agg",
    "sum_agg",
    "avg_agg",
    "min_agg",
    "max_agg",
    "majority_agg",
)
FILTER_OPERATORS = ("all_fil", "greater_fil", "less_fil", "eq_fil", "neq_fil")

# Sentinel candidate meaning "this slot is intentionally empty".
NONE_ID = "NONE"

Lexicon = dict[str, tuple[str, ...]]


def _data_path(*parts: str) -> Path:
    return Path(resources.files("petelkit").joinpath("data", *parts))  # type: ignore[arg-type]


def fixture_schema_path(name: str) -> Path:
    """Path of a shipped fixture schema: flight_delay, online_delivery,
    or student_performance."""
    return _data_path("schemas", f"{name}.json")


def fixture_vectors_path() -> Path:
    """Path of the shipped 8-dimensional fixture vector file."""
    return _data_path("vectors", "fixture_8d.txt")


def fixture_validation_path(name: str) -> Path:
    """Path of a shipped validation set (JSONL), keyed like the schemas."""
    return _data_path("validation", f"{name}.jsonl")


def default_templates_path() -> Path:
    """Path of the shipped utterance template set."""
    return _data_path("templates", "default.txt")


@lru_cache(maxsize=1)
def load_operator_lexicon() -> Lexicon:
    """Operator id -> keyword tuple, from the shipped lexicon file."""
    raw = json.loads(_data_path("lexicon", "operators.json").read_text("utf-8"))
    return {op: tuple(keywords) for op, keywords in raw.items()}


@lru_cache(maxsize=1)
def load_stopwords() -> frozenset[str]:
    """Small fixed stopword list used to prune all-stopword n-grams."""
    text = _data_path("lexicon", "stopwords.txt").read_text("utf-8")
    return frozenset(w.strip() for w in text.splitlines() if w.strip())


@lru_cache(maxsize=1)
def load_slot_questions() -> dict[str, str]:
    """Per-slot question strings sent to question-answering extractors."""
    return json.loads(_data_path("questions.json").read_text("utf-8"))


def operator_keywords(op_id: str, lexicon: Lexicon | None = None) -> tuple[str, ...]:
    """Keywords for one operator; falls back to the id's own tokens."""
    lex = lexicon if lexicon is not None else load_operator_lexicon()
    keywords = lex.get(op_id)
    if keywords:
        return keywords
    return (op_id.replace("_", " "),)
