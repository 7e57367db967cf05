"""Word-vector files and the semantic-similarity primitive.

Supports plain-text GloVe-style files and word2vec text files (header line
with count and dimension). Phrases embed as the mean of their in-vocabulary
token vectors; similarity is cosine by default with an inverse-distance
alternative, floored at a small epsilon so downstream normalization is
always well defined.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

import numpy as np

from .errors import VectorFormatError
from .schema import Attribute, _split_tokens

# Floor applied to every similarity so probabilities stay strictly positive.
EPSILON = 1e-6

METRICS = ("cosine", "euclidean")


@dataclass(frozen=True)
class VectorStore:
    """Immutable token -> dense vector table with a single dimension."""

    dim: int
    entries: dict[str, np.ndarray] = field(repr=False)

    def __post_init__(self) -> None:
        for vec in self.entries.values():
            vec.setflags(write=False)

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, token: str) -> bool:
        return token in self.entries

    def get(self, token: str) -> np.ndarray | None:
        return self.entries.get(token)

    def tokens(self) -> Iterable[str]:
        return self.entries.keys()


def _parse_row(parts: list[str], dim: int, line_no: int) -> tuple[str, np.ndarray]:
    token = parts[0]
    if len(parts) - 1 != dim:
        raise VectorFormatError(
            f"line {line_no}: expected {dim} components, found {len(parts) - 1}"
        )
    try:
        vec = np.array([float(p) for p in parts[1:]], dtype=np.float64)
    except ValueError as exc:
        raise VectorFormatError(f"line {line_no}: non-numeric component: {exc}") from exc
    if not np.all(np.isfinite(vec)):
        raise VectorFormatError(f"line {line_no}: non-finite component")
    return token, vec


def load_vectors(source: str | Path, format: str = "glove_text") -> VectorStore:
    """Load a text-format vector file into a VectorStore.

    ``glove_text``: every line is ``token v1 ... vd``. ``word2vec_text``:
    a ``count dim`` header line followed by the same body. Duplicate tokens
    keep their first occurrence. Raises VectorFormatError (with the line
    number) on ragged rows, non-numeric components, or an empty file.
    """
    if format not in ("glove_text", "word2vec_text"):
        raise ValueError(f"unknown vector format {format!r}")
    path = Path(source)
    lines = [ln for ln in path.read_text(encoding="utf-8").splitlines()]

    start = 0
    dim: int | None = None
    if format == "word2vec_text":
        if not lines:
            raise VectorFormatError(f"{path}: empty vector file")
        header = lines[0].split()
        if len(header) != 2:
            raise VectorFormatError("line 1: expected 'count dim' header")
        try:
            dim = int(header[1])
        except ValueError as exc:
            raise VectorFormatError(f"line 1: non-integer header: {exc}") from exc
        if dim < 1:
            raise VectorFormatError("line 1: dimension must be positive")
        start = 1

    entries: dict[str, np.ndarray] = {}
    for offset, line in enumerate(lines[start:], start=start + 1):
        parts = line.split()
        if not parts:
            continue
        if dim is None:
            dim = len(parts) - 1
            if dim < 1:
                raise VectorFormatError(f"line {offset}: row has no components")
        token, vec = _parse_row(parts, dim, offset)
        entries.setdefault(token, vec)
    if not entries:
        raise VectorFormatError(f"{path}: empty vector file")
    assert dim is not None
    return VectorStore(dim=dim, entries=entries)


def tokenize_phrase(phrase: str) -> list[str]:
    """Lowercase tokens of a phrase under the attribute tokenization rules."""
    return _split_tokens(phrase)


def phrase_vector(phrase: str, store: VectorStore) -> np.ndarray | None:
    """Mean vector of the phrase's in-vocabulary tokens; None if all OOV."""
    if not phrase:
        raise ValueError("phrase must be non-empty")
    vectors = [store.entries[t] for t in tokenize_phrase(phrase) if t in store.entries]
    if not vectors:
        return None
    return np.mean(np.stack(vectors), axis=0)


def cosine(u: np.ndarray, v: np.ndarray) -> float:
    """Cosine similarity; zero vectors yield 0.0 by definition."""
    if u.shape != v.shape:
        raise ValueError(f"dimension mismatch: {u.shape} vs {v.shape}")
    nu = float(np.linalg.norm(u))
    nv = float(np.linalg.norm(v))
    if nu == 0.0 or nv == 0.0:
        return 0.0
    return float(np.dot(u, v)) / (nu * nv)


def euclidean_similarity(u: np.ndarray, v: np.ndarray) -> float:
    """Distance-based similarity 1 / (1 + ||u - v||), in (0, 1]."""
    if u.shape != v.shape:
        raise ValueError(f"dimension mismatch: {u.shape} vs {v.shape}")
    return 1.0 / (1.0 + float(np.linalg.norm(u - v)))


def token_jaccard(a: str, b: str) -> float:
    """Jaccard overlap of the two phrases' token sets, in [0, 1]."""
    ta, tb = set(tokenize_phrase(a)), set(tokenize_phrase(b))
    if not ta or not tb:
        return 0.0
    union = ta | tb
    return len(ta & tb) / len(union)


def phrase_similarity(
    a: str, b: str, store: VectorStore, metric: str = "cosine"
) -> float:
    """Similarity between two phrases, always >= EPSILON.

    Embeds both phrases and compares with the chosen metric. If either
    phrase is entirely out of vocabulary the score falls back to token-set
    Jaccard overlap, so lexical matches between OOV identifiers still count.
    """
    if metric not in METRICS:
        raise ValueError(f"unknown metric {metric!r}; expected one of {METRICS}")
    va = phrase_vector(a, store)
    vb = phrase_vector(b, store)
    if va is None or vb is None:
        return max(token_jaccard(a, b), EPSILON)
    score = cosine(va, vb) if metric == "cosine" else euclidean_similarity(va, vb)
    return max(score, EPSILON)


def sem_sim(
    attr: Attribute | str,
    phrase: str,
    store: VectorStore,
    metric: str = "cosine",
) -> float:
    """Semantic similarity between an attribute name and an utterance phrase.

    The attribute side embeds as its space-joined name tokens. Output is
    strictly positive (epsilon floor), which keeps downstream candidate
    normalization well defined even under negative cosines.
    """
    if isinstance(attr, Attribute):
        surface = attr.surface
    else:
        if not attr:
            raise ValueError("attribute name must be non-empty")
        tokens = tokenize_phrase(attr)
        surface = " ".join(tokens) if tokens else attr
    return phrase_similarity(surface, phrase, store, metric)
