"""Engine configuration shared by the library surface, CLI, and service."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable

from .embeddings import VectorStore
from .extraction import (
    DEFAULT_MAX_NGRAM,
    DEFAULT_TIMEOUT,
    DEFAULT_TOP_K,
    Extractor,
    LexicalExtractor,
    RemoteExtractor,
)
from .schema import Schema


@dataclass
class EngineConfig:
    """Knobs for extraction and ranking.

    ``extractor_mode`` is ``lexical`` or ``remote``; remote mode needs an
    ``endpoint`` and may fall back to the lexical extractor on transport
    failure. ``clock`` exists so tests can pin event timestamps.
    """

    metric: str = "cosine"
    max_n: int = DEFAULT_MAX_NGRAM
    k: int = DEFAULT_TOP_K
    extractor_mode: str = "lexical"
    endpoint: str | None = None
    remote_fallback: bool = True
    timeout: float = DEFAULT_TIMEOUT
    clock: Callable[[], float] = field(default=time.time, repr=False, compare=False)

    def build_extractor(self, schema: Schema, store: VectorStore) -> Extractor:
        lexical = LexicalExtractor(
            schema=schema, store=store, max_n=self.max_n, k=self.k, metric=self.metric
        )
        if self.extractor_mode == "lexical":
            return lexical
        if self.extractor_mode == "remote":
            if not self.endpoint:
                raise ValueError("remote extractor mode requires an endpoint")
            return RemoteExtractor(
                endpoint=self.endpoint,
                timeout=self.timeout,
                fallback=lexical if self.remote_fallback else None,
            )
        raise ValueError(f"unknown extractor mode {self.extractor_mode!r}")

    def fingerprint(self, embeddings_name: str = "") -> str:
        extractor = self.extractor_mode
        if self.extractor_mode == "remote" and self.endpoint:
            extractor = f"remote:{self.endpoint}"
        return "|".join(
            [
                f"extractor={extractor}",
                f"embeddings={embeddings_name or 'unnamed'}",
                f"metric={self.metric}",
                f"max_n={self.max_n}",
                f"k={self.k}",
            ]
        )

    def to_document(self) -> dict:
        return {
            "metric": self.metric,
            "max_n": self.max_n,
            "k": self.k,
            "extractor_mode": self.extractor_mode,
            "endpoint": self.endpoint,
            "remote_fallback": self.remote_fallback,
            "timeout": self.timeout,
        }

    @classmethod
    def from_document(cls, document: dict | None) -> "EngineConfig":
        if not document:
            return cls()
        known = {
            key: document[key]
            for key in (
                "metric",
                "max_n",
                "k",
                "extractor_mode",
                "endpoint",
                "remote_fallback",
                "timeout",
            )
            if key in document
        }
        return cls(**known)
