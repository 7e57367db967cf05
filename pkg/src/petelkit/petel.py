"""PeTEL expressions: slot distributions, operator typing, (de)serialization.

A PeTEL expression states a forecasting task through four slots -- target
attribute, aggregation constraint, filter attribute, and filtering
constraint. Until the user confirms a value, each slot is a probability
distribution over its candidates; confirming binds the slot and freezes
its distribution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from enum import Enum

from . import lexicon as lex
from .errors import PetelFormatError
from .schema import (
    Attribute,
    AttributeType,
    CATEGORICAL_LIKE,
    NUMERIC_LIKE,
    Schema,
)

PROB_TOLERANCE = 1e-9

PETEL_FORMAT = "petel/1"


class SlotKind(str, Enum):
    TARGET_ATTRIBUTE = "target_attribute"
    AGGREGATION = "aggregation"
    FILTER_ATTRIBUTE = "filter_attribute"
    FILTER_OPERATION = "filter_operation"


# Proposal order for the confirmation loop; also the rendering order.
SLOT_ORDER = (
    SlotKind.TARGET_ATTRIBUTE,
    SlotKind.AGGREGATION,
    SlotKind.FILTER_ATTRIBUTE,
    SlotKind.FILTER_OPERATION,
)

SLOT_DISPLAY = {
    SlotKind.TARGET_ATTRIBUTE: "Target Attribute",
    SlotKind.AGGREGATION: "Aggregation Constraint",
    SlotKind.FILTER_ATTRIBUTE: "Filter Attribute",
    SlotKind.FILTER_OPERATION: "Filtering Constraint",
}

ATTRIBUTE_SLOTS = (SlotKind.TARGET_ATTRIBUTE, SlotKind.FILTER_ATTRIBUTE)
OPERATOR_SLOTS = (SlotKind.AGGREGATION, SlotKind.FILTER_OPERATION)


@dataclass(frozen=True)
class Candidate:
    """One possible slot value; identity is the id alone."""

    id: str
    display: str = field(compare=False)
    surfaces: tuple[str, ...] = field(compare=False, default=())

    def ranking_surfaces(self) -> tuple[str, ...]:
        return self.surfaces if self.surfaces else (self.id.replace("_", " ").lower(),)


def attribute_candidate(attr: Attribute) -> Candidate:
    # Attributes display uppercased, the expression-language convention.
    return Candidate(id=attr.name, display=attr.name.upper(), surfaces=(attr.surface,))


def operator_candidate(op_id: str, lexicon: lex.Lexicon | None = None) -> Candidate:
    return Candidate(
        id=op_id, display=op_id, surfaces=lex.operator_keywords(op_id, lexicon)
    )


def none_candidate() -> Candidate:
    return Candidate(id=lex.NONE_ID, display=lex.NONE_ID, surfaces=("none",))


@dataclass(frozen=True, eq=False)
class SlotDistribution:
    """A slot's candidate set with aligned probabilities and optional bound.

    Equality ignores candidate order (documents store candidates ranked by
    probability) and compares the id -> probability mapping plus the bound
    value exactly.
    """

    kind: SlotKind
    candidates: tuple[Candidate, ...]
    probs: tuple[float, ...]
    bound: Candidate | None = None

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SlotDistribution):
            return NotImplemented
        return (
            self.kind == other.kind
            and self.bound == other.bound
            and self.as_mapping() == other.as_mapping()
        )

    __hash__ = None  # type: ignore[assignment]

    def as_mapping(self) -> dict[str, float]:
        return {c.id: p for c, p in zip(self.candidates, self.probs)}

    def candidate(self, candidate_id: str) -> Candidate | None:
        lowered = candidate_id.lower()
        for c in self.candidates:
            if c.id.lower() == lowered:
                return c
        return None

    def prob_of(self, candidate_id: str) -> float:
        c = self.candidate(candidate_id)
        if c is None:
            raise KeyError(candidate_id)
        return self.as_mapping()[c.id]

    def ranked(self) -> list[tuple[Candidate, float]]:
        """Candidates by descending probability, ties broken by id."""
        pairs = list(zip(self.candidates, self.probs))
        pairs.sort(key=lambda cp: (-cp[1], cp[0].id))
        return pairs

    def with_probs(self, probs_by_id: dict[str, float]) -> "SlotDistribution":
        new_probs = tuple(probs_by_id[c.id] for c in self.candidates)
        return replace(self, probs=new_probs)

    def validate(self) -> None:
        if len(self.candidates) != len(self.probs) or not self.candidates:
            raise PetelFormatError(
                f"slot {self.kind.value}: candidate/probability length mismatch"
            )
        ids = [c.id for c in self.candidates]
        if len(set(ids)) != len(ids):
            raise PetelFormatError(f"slot {self.kind.value}: duplicate candidate ids")
        if any(p < 0 or not math.isfinite(p) for p in self.probs):
            raise PetelFormatError(f"slot {self.kind.value}: invalid probability")
        if self.bound is None:
            total = sum(self.probs)
            if abs(total - 1.0) > PROB_TOLERANCE:
                raise PetelFormatError(
                    f"slot {self.kind.value}: probabilities sum to {total!r}, not 1"
                )
        elif self.candidate(self.bound.id) is None:
            raise PetelFormatError(
                f"slot {self.kind.value}: bound value {self.bound.id!r} "
                "is not a candidate"
            )


@dataclass(eq=False)
class Petel:
    """A full four-slot expression tied to a named schema."""

    schema_name: str
    slots: dict[SlotKind, SlotDistribution]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Petel):
            return NotImplemented
        return self.schema_name == other.schema_name and self.slots == other.slots

    def slot(self, kind: SlotKind) -> SlotDistribution:
        return self.slots[kind]

    def set_slot(self, dist: SlotDistribution) -> None:
        self.slots[dist.kind] = dist

    def is_complete(self) -> bool:
        return all(d.bound is not None for d in self.slots.values())

    def bound_values(self) -> dict[str, str | None]:
        return {
            kind.value: (d.bound.id if d.bound else None)
            for kind, d in self.slots.items()
        }

    def validate(self, schema: Schema | None = None) -> None:
        missing = [k for k in SLOT_ORDER if k not in self.slots]
        if missing:
            raise PetelFormatError(f"missing slots: {[k.value for k in missing]}")
        for dist in self.slots.values():
            dist.validate()
        agg_ids = set(self.slot(SlotKind.AGGREGATION).as_mapping())
        if not agg_ids <= set(lex.AGGREGATION_OPERATORS):
            raise PetelFormatError(f"unknown aggregation candidates: {agg_ids}")
        fil_ids = set(self.slot(SlotKind.FILTER_OPERATION).as_mapping())
        if not fil_ids <= set(lex.FILTER_OPERATORS) | {lex.NONE_ID}:
            raise PetelFormatError(f"unknown filter-operation candidates: {fil_ids}")
        if schema is not None:
            names = set(schema.attribute_names())
            target_ids = set(self.slot(SlotKind.TARGET_ATTRIBUTE).as_mapping())
            if target_ids != names:
                raise PetelFormatError("target candidates do not match the schema")
            filter_ids = set(self.slot(SlotKind.FILTER_ATTRIBUTE).as_mapping())
            if filter_ids != names | {lex.NONE_ID}:
                raise PetelFormatError("filter candidates do not match the schema")


def _uniform(kind: SlotKind, candidates: list[Candidate]) -> SlotDistribution:
    n = len(candidates)
    return SlotDistribution(
        kind=kind, candidates=tuple(candidates), probs=tuple([1.0 / n] * n)
    )


def init_petel(schema: Schema, lexicon: lex.Lexicon | None = None) -> Petel:
    """Fresh expression with a uniform prior over every slot's candidates."""
    attrs = [attribute_candidate(a) for a in schema.attributes]
    slots = {
        SlotKind.TARGET_ATTRIBUTE: _uniform(SlotKind.TARGET_ATTRIBUTE, attrs),
        SlotKind.AGGREGATION: _uniform(
            SlotKind.AGGREGATION,
            [operator_candidate(op, lexicon) for op in lex.AGGREGATION_OPERATORS],
        ),
        SlotKind.FILTER_ATTRIBUTE: _uniform(
            SlotKind.FILTER_ATTRIBUTE, attrs + [none_candidate()]
        ),
        SlotKind.FILTER_OPERATION: _uniform(
            SlotKind.FILTER_OPERATION,
            [operator_candidate(op, lexicon) for op in lex.FILTER_OPERATORS]
            + [none_candidate()],
        ),
    }
    return Petel(schema_name=schema.name, slots=slots)


def allowed_operators(attr_type: AttributeType, slot: SlotKind) -> frozenset[str]:
    """Operator ids compatible with an attribute type for an operator slot.

    The type-agnostic operator (count for aggregation, the pass-through
    filter) is always included; the NONE sentinel is part of the candidate
    space, not of type compatibility. Timestamps count as numeric; binary
    and nominal count as categorical.
    """
    if slot == SlotKind.AGGREGATION:
        ops = {"count_agg"}
        if attr_type in NUMERIC_LIKE:
            ops |= {"sum_agg", "avg_agg", "min_agg", "max_agg"}
        if attr_type in CATEGORICAL_LIKE:
            ops |= {"majority_agg"}
        return frozenset(ops)
    if slot == SlotKind.FILTER_OPERATION:
        ops = {"all_fil"}
        if attr_type in NUMERIC_LIKE:
            ops |= {"greater_fil", "less_fil"}
        if attr_type in CATEGORICAL_LIKE:
            ops |= {"eq_fil", "neq_fil"}
        return frozenset(ops)
    raise ValueError(f"{slot.value} is an attribute slot, not an operator slot")


def serialize_petel(petel: Petel) -> dict:
    """Document form: bound values as strings, candidates ranked descending."""
    slots: dict[str, dict] = {}
    for kind in SLOT_ORDER:
        dist = petel.slot(kind)
        slots[kind.value] = {
            "bound": dist.bound.id if dist.bound else None,
            "bound_display": dist.bound.display if dist.bound else None,
            "candidates": [
                {"id": c.id, "display": c.display, "probability": p}
                for c, p in dist.ranked()
            ],
        }
    return {"format": PETEL_FORMAT, "schema": petel.schema_name, "slots": slots}


def parse_petel(document: dict) -> Petel:
    """Inverse of serialize_petel; raises PetelFormatError on bad documents.

    Parsed candidates carry no similarity surfaces; parsed expressions
    support rendering, binding, and renormalization but fresh posterior
    computation should start from init_petel over a live schema.
    """
    if not isinstance(document, dict):
        raise PetelFormatError("PeTEL document must be an object")
    schema_name = document.get("schema")
    if not isinstance(schema_name, str) or not schema_name:
        raise PetelFormatError("PeTEL document is missing 'schema'")
    raw_slots = document.get("slots")
    if not isinstance(raw_slots, dict):
        raise PetelFormatError("PeTEL document is missing 'slots'")
    slots: dict[SlotKind, SlotDistribution] = {}
    for kind in SLOT_ORDER:
        entry = raw_slots.get(kind.value)
        if not isinstance(entry, dict):
            raise PetelFormatError(f"PeTEL document is missing slot {kind.value!r}")
        raw_candidates = entry.get("candidates")
        if not isinstance(raw_candidates, list) or not raw_candidates:
            raise PetelFormatError(f"slot {kind.value}: missing candidates")
        candidates: list[Candidate] = []
        probs: list[float] = []
        for item in raw_candidates:
            try:
                candidates.append(
                    Candidate(id=item["id"], display=item.get("display", item["id"]))
                )
                probs.append(float(item["probability"]))
            except (KeyError, TypeError, ValueError) as exc:
                raise PetelFormatError(
                    f"slot {kind.value}: malformed candidate entry: {exc}"
                ) from exc
        bound_id = entry.get("bound")
        bound = None
        if bound_id is not None:
            bound = next((c for c in candidates if c.id == bound_id), None)
            if bound is None:
                raise PetelFormatError(
                    f"slot {kind.value}: bound value {bound_id!r} not in candidates"
                )
        dist = SlotDistribution(
            kind=kind, candidates=tuple(candidates), probs=tuple(probs), bound=bound
        )
        dist.validate()
        slots[kind] = dist
    petel = Petel(schema_name=schema_name, slots=slots)
    return petel


def render_petel(petel: Petel, top: int = 3) -> str:
    """Human-readable slot/value block.

    Bound slots print their value; unbound slots print their leading
    candidates with fixed six-decimal probabilities.
    """
    lines = []
    order = (
        SlotKind.TARGET_ATTRIBUTE,
        SlotKind.FILTER_ATTRIBUTE,
        SlotKind.FILTER_OPERATION,
        SlotKind.AGGREGATION,
    )
    for kind in order:
        dist = petel.slot(kind)
        label = SLOT_DISPLAY[kind]
        if dist.bound is not None:
            lines.append(f"{label}: {dist.bound.display}")
        else:
            ranked = dist.ranked()[:top]
            body = ", ".join(f"{c.display} {p:.6f}" for c, p in ranked)
            lines.append(f"{label}: ? [{body}]")
    return "\n".join(lines)
