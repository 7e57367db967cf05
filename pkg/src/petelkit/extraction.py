"""Salient-phrase extraction with relevance confidences.

Candidate phrases are contiguous word n-grams of the utterance. The
built-in lexical extractor scores them against the slot's candidate
surface forms using the embedding similarity, giving a deterministic,
dependency-free stand-in for learned span extractors; a remote extractor
speaks a small HTTP protocol to an external inference service.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Protocol, Sequence

import requests

from . import lexicon as lex
from .embeddings import VectorStore, phrase_similarity
from .errors import (
    EmptyUtteranceError,
    ExtractorTransportError,
    MalformedResponseError,
    SpanMismatchError,
)
from .petel import ATTRIBUTE_SLOTS, SlotKind
from .schema import Schema

DEFAULT_MAX_NGRAM = 3
DEFAULT_TOP_K = 5
DEFAULT_TIMEOUT = 10.0

_WORD = re.compile(r"[A-Za-z0-9_']+")


@dataclass(frozen=True)
class SalientPhrase:
    """A span of the utterance carrying evidence about a slot's value."""

    text: str
    start: int
    end: int
    confidence: float = 0.0

    @property
    def span(self) -> tuple[int, int]:
        return (self.start, self.end)


@dataclass(frozen=True)
class ExtractionResult:
    """Extracted phrases with confidences normalized to a distribution."""

    slot: SlotKind
    phrases: tuple[SalientPhrase, ...]
    rel_probs: tuple[float, ...]

    @classmethod
    def from_phrases(
        cls, slot: SlotKind, phrases: Sequence[SalientPhrase]
    ) -> "ExtractionResult":
        if not phrases:
            return cls(slot=slot, phrases=(), rel_probs=())
        rel = normalize_confidences([p.confidence for p in phrases])
        return cls(slot=slot, phrases=tuple(phrases), rel_probs=tuple(rel))

    def is_empty(self) -> bool:
        return not self.phrases


class Extractor(Protocol):
    """Anything that turns (utterance, slot) into scored salient phrases."""

    identity: str

    def extract(self, utterance: str, slot: SlotKind) -> list[SalientPhrase]:
        ...


def validate_phrases(
    utterance: str, phrases: Sequence[SalientPhrase]
) -> list[SalientPhrase]:
    """Check that every span slices the utterance to exactly its text."""
    for p in phrases:
        if not (0 <= p.start < p.end <= len(utterance)):
            raise SpanMismatchError(
                f"span ({p.start}, {p.end}) out of range for utterance "
                f"of length {len(utterance)}"
            )
        if utterance[p.start : p.end] != p.text:
            raise SpanMismatchError(
                f"span ({p.start}, {p.end}) slices to "
                f"{utterance[p.start:p.end]!r}, not {p.text!r}"
            )
        if not math.isfinite(p.confidence) or p.confidence < 0:
            raise MalformedResponseError(
                f"phrase {p.text!r} has invalid confidence {p.confidence!r}"
            )
    return list(phrases)


def candidate_phrases(
    utterance: str,
    max_n: int,
    stopwords: frozenset[str] | None = None,
) -> list[SalientPhrase]:
    """All contiguous word n-grams (1..max_n) with character spans.

    N-grams made only of stopwords are dropped. Confidence is left unset.
    """
    if max_n < 1:
        raise ValueError("max_n must be >= 1")
    if not utterance or not utterance.strip():
        raise EmptyUtteranceError("utterance is empty")
    stops = stopwords if stopwords is not None else lex.load_stopwords()
    words = [(m.group(), m.start(), m.end()) for m in _WORD.finditer(utterance)]
    if not words:
        raise EmptyUtteranceError("utterance contains no word characters")
    phrases: list[SalientPhrase] = []
    for i in range(len(words)):
        for n in range(1, max_n + 1):
            if i + n > len(words):
                break
            chunk = words[i : i + n]
            if all(w[0].lower() in stops for w in chunk):
                continue
            start, end = chunk[0][1], chunk[-1][2]
            phrases.append(SalientPhrase(text=utterance[start:end], start=start, end=end))
    return phrases


def normalize_confidences(raw: Sequence[float]) -> list[float]:
    """Scale nonnegative confidences so they sum to one."""
    if not raw:
        raise ValueError("cannot normalize an empty confidence list")
    for value in raw:
        if not math.isfinite(value) or value < 0:
            raise ValueError(f"confidences must be finite and nonnegative, got {value!r}")
    total = sum(raw)
    if total == 0:
        raise ValueError("cannot normalize an all-zero confidence list")
    return [value / total for value in raw]


def slot_surface_forms(
    slot: SlotKind,
    schema: Schema,
    lexicon: lex.Lexicon | None = None,
) -> list[str]:
    """Surface forms the extractor scores against for one slot.

    Attribute slots use every attribute's tokenized name plus its synonyms;
    operator slots use the operator keyword lexicon.
    """
    if slot in ATTRIBUTE_SLOTS:
        forms: list[str] = []
        for attr in schema.attributes:
            forms.extend(attr.surface_forms())
        return forms
    ops = (
        lex.AGGREGATION_OPERATORS
        if slot == SlotKind.AGGREGATION
        else lex.FILTER_OPERATORS
    )
    forms = []
    for op in ops:
        forms.extend(lex.operator_keywords(op, lexicon))
    return forms


def lexical_extract(
    utterance: str,
    slot: SlotKind,
    schema: Schema,
    store: VectorStore,
    lexicon: lex.Lexicon | None = None,
    max_n: int = DEFAULT_MAX_NGRAM,
    k: int = DEFAULT_TOP_K,
    metric: str = "cosine",
    stopwords: frozenset[str] | None = None,
) -> list[SalientPhrase]:
    """Top-k non-overlapping phrases scored against the slot's surfaces.

    Each n-gram's raw confidence is its maximum similarity against any
    surface form of the slot's candidates. Overlapping spans are
    suppressed in favor of the best-scoring one, so the k phrases are
    distinct pieces of evidence rather than re-readings of one span.
    Ties break by earlier span start, then shorter span, so output is
    fully deterministic.
    """
    surfaces = slot_surface_forms(slot, schema, lexicon)
    phrases = candidate_phrases(utterance, max_n, stopwords)
    scored = [
        SalientPhrase(
            text=p.text,
            start=p.start,
            end=p.end,
            confidence=max(
                phrase_similarity(surface, p.text, store, metric)
                for surface in surfaces
            ),
        )
        for p in phrases
    ]
    scored.sort(key=lambda p: (-p.confidence, p.start, p.end - p.start))
    kept: list[SalientPhrase] = []
    for phrase in scored:
        if len(kept) == k:
            break
        if all(
            phrase.end <= other.start or phrase.start >= other.end
            for other in kept
        ):
            kept.append(phrase)
    return kept


@dataclass
class LexicalExtractor:
    """Deterministic embedding-similarity extractor over utterance n-grams."""

    schema: Schema
    store: VectorStore
    lexicon: lex.Lexicon | None = None
    max_n: int = DEFAULT_MAX_NGRAM
    k: int = DEFAULT_TOP_K
    metric: str = "cosine"
    stopwords: frozenset[str] | None = None
    identity: str = field(init=False, default="lexical")

    def extract(self, utterance: str, slot: SlotKind) -> list[SalientPhrase]:
        return lexical_extract(
            utterance,
            slot,
            self.schema,
            self.store,
            lexicon=self.lexicon,
            max_n=self.max_n,
            k=self.k,
            metric=self.metric,
            stopwords=self.stopwords,
        )


def remote_extract(
    endpoint: str,
    utterance: str,
    slot: SlotKind,
    question: str,
    timeout: float = DEFAULT_TIMEOUT,
    http: requests.Session | None = None,
) -> list[SalientPhrase]:
    """Fetch phrases from an external extraction service and validate them.

    Protocol: POST {endpoint}/extract with {utterance, slot, question};
    the response carries {"phrases": [{text, start, end, confidence}]}.
    Transport failures, malformed payloads, and span mismatches raise
    distinct exception types.
    """
    url = endpoint.rstrip("/") + "/extract"
    body = {"utterance": utterance, "slot": slot.value, "question": question}
    client = http if http is not None else requests
    try:
        response = client.post(url, json=body, timeout=timeout)
        response.raise_for_status()
    except requests.RequestException as exc:
        raise ExtractorTransportError(f"extraction endpoint {url} failed: {exc}") from exc
    try:
        payload = response.json()
    except ValueError as exc:
        raise MalformedResponseError(f"non-JSON response from {url}: {exc}") from exc
    if not isinstance(payload, dict) or not isinstance(payload.get("phrases"), list):
        raise MalformedResponseError(f"response from {url} lacks a 'phrases' list")
    phrases = []
    for item in payload["phrases"]:
        try:
            phrases.append(
                SalientPhrase(
                    text=item["text"],
                    start=int(item["start"]),
                    end=int(item["end"]),
                    confidence=float(item.get("confidence", 0.0)),
                )
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise MalformedResponseError(f"malformed phrase entry: {item!r}") from exc
    return validate_phrases(utterance, phrases)


@dataclass
class RemoteExtractor:
    """Extractor backed by an external span-extraction inference service."""

    endpoint: str
    questions: dict[str, str] | None = None
    timeout: float = DEFAULT_TIMEOUT
    fallback: Extractor | None = None
    http: requests.Session | None = None

    @property
    def identity(self) -> str:
        return f"remote:{self.endpoint}"

    def extract(self, utterance: str, slot: SlotKind) -> list[SalientPhrase]:
        questions = (
            self.questions if self.questions is not None else lex.load_slot_questions()
        )
        question = questions.get(slot.value, "")
        try:
            return remote_extract(
                self.endpoint,
                utterance,
                slot,
                question,
                timeout=self.timeout,
                http=self.http,
            )
        except ExtractorTransportError:
            if self.fallback is not None:
                return self.fallback.extract(utterance, slot)
            raise
