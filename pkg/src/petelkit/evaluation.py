"""Ranking metrics, validation-set replay, and paired significance testing.

The replay harness ranks every validation utterance with no user feedback
and reports, per slot, the mean reciprocal rank of the gold value and the
micro-averaged F1 of top-1 predictions. Note the F1 here scores slot-value
decisions of the ranker; it is not a span-extraction F1 of any upstream
extraction model.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from statistics import NormalDist
from typing import Sequence

from .config import EngineConfig
from .embeddings import VectorStore
from .errors import AllZeroDifferencesError, EvaluationError
from .extraction import ExtractionResult, Extractor
from .petel import SLOT_ORDER, SlotKind, init_petel
from .ranker import slot_posterior
from .schema import Schema

F1_SEMANTICS = (
    "micro-averaged F1 over top-1 slot-value decisions (NONE is a "
    "predictable class); not a span-extraction F1"
)

EXACT_WILCOXON_LIMIT = 20


@dataclass(frozen=True)
class ValidationInstance:
    """One labeled utterance: gold candidate id per slot (NONE allowed)."""

    utterance: str
    gold: dict[SlotKind, str]


@dataclass(frozen=True)
class EvalReport:
    """Per-slot ranking quality over a validation set."""

    per_slot_mrr: dict[str, float]
    per_slot_f1: dict[str, float]
    instances: int
    fingerprint: str
    f1_semantics: str = F1_SEMANTICS
    gold_ranks: dict[str, tuple[int, ...]] = field(default_factory=dict, repr=False)

    def to_document(self) -> dict:
        return {
            "instances": self.instances,
            "fingerprint": self.fingerprint,
            "f1_semantics": self.f1_semantics,
            "per_slot": {
                slot: {
                    "mrr": self.per_slot_mrr[slot],
                    "f1": self.per_slot_f1[slot],
                }
                for slot in self.per_slot_mrr
            },
        }

    def as_table(self) -> str:
        lines = [
            f"instances: {self.instances}",
            f"config: {self.fingerprint}",
            f"f1: {self.f1_semantics}",
            "",
            f"{'slot':<20} {'MRR':>10} {'F1':>10}",
        ]
        for slot in self.per_slot_mrr:
            lines.append(
                f"{slot:<20} {self.per_slot_mrr[slot]:>10.6f} "
                f"{self.per_slot_f1[slot]:>10.6f}"
            )
        return "\n".join(lines)


def mrr(ranks: Sequence[int]) -> float:
    """Mean of reciprocal ranks; ranks are 1-based positions."""
    if not ranks:
        raise EvaluationError("cannot compute MRR of an empty rank list")
    for rank in ranks:
        if rank < 1:
            raise EvaluationError(f"ranks must be >= 1, got {rank!r}")
    return sum(1.0 / r for r in ranks) / len(ranks)


def slot_f1(predictions: Sequence[str], golds: Sequence[str]) -> float:
    """Micro-averaged F1 over aligned slot-value decisions."""
    if len(predictions) != len(golds):
        raise EvaluationError(
            f"length mismatch: {len(predictions)} predictions, {len(golds)} golds"
        )
    tp = fp = fn = 0
    for pred, gold in zip(predictions, golds):
        if pred.lower() == gold.lower():
            tp += 1
        else:
            fp += 1
            fn += 1
    if tp == 0:
        return 0.0
    precision = tp / (tp + fp)
    recall = tp / (tp + fn)
    return 2 * precision * recall / (precision + recall)


def load_validation(source: str | Path) -> list[ValidationInstance]:
    """Read a line-delimited JSON validation set."""
    instances = []
    for line_no, raw in enumerate(Path(source).read_text("utf-8").splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise EvaluationError(f"line {line_no}: invalid JSON: {exc}") from exc
        try:
            utterance = record["utterance"]
            gold = {kind: str(record[kind.value]) for kind in SLOT_ORDER}
        except KeyError as exc:
            raise EvaluationError(f"line {line_no}: missing key {exc}") from exc
        instances.append(ValidationInstance(utterance=utterance, gold=gold))
    if not instances:
        raise EvaluationError(f"{source}: empty validation set")
    return instances


def evaluate(
    instances: Sequence[ValidationInstance],
    schema: Schema,
    store: VectorStore,
    config: EngineConfig | None = None,
    extractor: Extractor | None = None,
    embeddings_name: str = "",
) -> EvalReport:
    """Replay a validation set with no user feedback and aggregate metrics.

    For each instance and slot the posterior ranks all candidates
    (lexicographic tie-break); slots with no extracted phrases fall back
    to the uniform prior. Unresolvable gold ids raise EvaluationError
    naming the instance.
    """
    if not instances:
        raise EvaluationError("empty validation set")
    cfg = config or EngineConfig()
    ext = extractor or cfg.build_extractor(schema, store)

    ranks: dict[SlotKind, list[int]] = {kind: [] for kind in SLOT_ORDER}
    predictions: dict[SlotKind, list[str]] = {kind: [] for kind in SLOT_ORDER}
    golds: dict[SlotKind, list[str]] = {kind: [] for kind in SLOT_ORDER}

    for index, instance in enumerate(instances):
        petel = init_petel(schema)
        for slot in SLOT_ORDER:
            dist = petel.slot(slot)
            gold_candidate = dist.candidate(instance.gold[slot])
            if gold_candidate is None:
                raise EvaluationError(
                    f"instance {index}: gold id {instance.gold[slot]!r} does not "
                    f"resolve for slot {slot.value}"
                )
            extraction = ExtractionResult.from_phrases(
                slot, ext.extract(instance.utterance, slot)
            )
            if extraction.is_empty():
                ranked = [cid for cid, _ in sorted(dist.as_mapping().items(), key=lambda kv: (-kv[1], kv[0]))]
            else:
                posterior = slot_posterior(
                    instance.utterance, slot, petel, extraction, store, cfg.metric
                )
                ranked = posterior.ranked_ids()
            ranks[slot].append(ranked.index(gold_candidate.id) + 1)
            predictions[slot].append(ranked[0])
            golds[slot].append(gold_candidate.id)

    return EvalReport(
        per_slot_mrr={k.value: mrr(ranks[k]) for k in SLOT_ORDER},
        per_slot_f1={k.value: slot_f1(predictions[k], golds[k]) for k in SLOT_ORDER},
        instances=len(instances),
        fingerprint=cfg.fingerprint(embeddings_name),
        gold_ranks={k.value: tuple(ranks[k]) for k in SLOT_ORDER},
    )


@dataclass(frozen=True)
class WilcoxonResult:
    w: float
    p_two_sided: float
    n_effective: int


def _average_ranks(values: Sequence[float]) -> list[float]:
    """Ranks of |values| with tied values sharing the average rank."""
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        average = (i + j + 2) / 2.0  # ranks are 1-based
        for k in range(i, j + 1):
            ranks[order[k]] = average
        i = j + 1
    return ranks


def _exact_min_statistic_p(ranks: Sequence[float], w_obs: float) -> float:
    """P(min(W+, W-) <= w_obs) by exact counting over sign assignments.

    Average ranks are half-integers, so doubling them makes every
    achievable rank sum an integer; a subset-sum table over the doubled
    ranks then counts all 2^n assignments without enumerating them.
    """
    doubled = [round(2 * r) for r in ranks]
    total = sum(doubled)
    counts = [0] * (total + 1)
    counts[0] = 1
    for value in doubled:
        for s in range(total, value - 1, -1):
            counts[s] += counts[s - value]
    threshold = round(2 * w_obs)
    favorable = sum(
        count for s, count in enumerate(counts) if min(s, total - s) <= threshold
    )
    return favorable / (2 ** len(ranks))


def wilcoxon_signed_rank(a: Sequence[float], b: Sequence[float]) -> WilcoxonResult:
    """Paired two-sided signed-rank test with W = min(W+, W-).

    Zero differences are dropped; tied absolute differences share average
    ranks. Up to 20 effective pairs the p-value is exact over all sign
    assignments (computed by a subset-sum count); above that a normal
    approximation with tie and continuity corrections is used. All-zero
    differences are an error, not p = 1.
    """
    if len(a) != len(b):
        raise EvaluationError(f"length mismatch: {len(a)} vs {len(b)}")
    if not a:
        raise EvaluationError("empty samples")
    diffs = [x - y for x, y in zip(a, b) if x - y != 0.0]
    if not diffs:
        raise AllZeroDifferencesError(
            "all paired differences are zero; the signed-rank test is undefined"
        )
    n = len(diffs)
    abs_diffs = [abs(d) for d in diffs]
    ranks = _average_ranks(abs_diffs)
    w_plus = sum(r for r, d in zip(ranks, diffs) if d > 0)
    w_minus = sum(r for r, d in zip(ranks, diffs) if d < 0)
    w = min(w_plus, w_minus)

    if n <= EXACT_WILCOXON_LIMIT:
        p = _exact_min_statistic_p(ranks, w)
    else:
        mu = n * (n + 1) / 4.0
        tie_counts: dict[float, int] = {}
        for d in abs_diffs:
            tie_counts[d] = tie_counts.get(d, 0) + 1
        tie_term = sum(t**3 - t for t in tie_counts.values()) / 48.0
        sigma = math.sqrt(n * (n + 1) * (2 * n + 1) / 24.0 - tie_term)
        z = (w - mu + 0.5) / sigma
        p = min(1.0, 2.0 * NormalDist().cdf(z))
    return WilcoxonResult(w=w, p_two_sided=p, n_effective=n)
