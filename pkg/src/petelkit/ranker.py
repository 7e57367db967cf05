"""Posterior ranking of slot candidates and the confirmation session loop.

Given phrases X with relevance distribution P(R_x=1|x) and per-phrase
candidate likelihoods proportional to semantic similarity, every candidate
is scored by the joint

    score(c) = max over x of  P(R_x=1|x) * P(c | x, R_x=1)

and the scores are normalized into the slot's distribution. The session
then proposes the top candidate slot by slot; an accept binds the slot, a
reject zeroes the candidate and renormalizes the survivors.
"""

from __future__ import annotations

import uuid
from dataclasses import dataclass, field, replace

from .config import EngineConfig
from .embeddings import VectorStore, phrase_similarity
from .errors import (
    EmptyUtteranceError,
    NotProposedError,
    SessionError,
    SlotBoundError,
    SlotExhaustedError,
)
from .extraction import ExtractionResult, Extractor
from .lexicon import NONE_ID
from .petel import (
    Candidate,
    Petel,
    SLOT_ORDER,
    SlotDistribution,
    SlotKind,
    allowed_operators,
    init_petel,
)
from .schema import Schema

SESSION_FORMAT = "session/1"

STATUS_IN_PROGRESS = "in_progress"
STATUS_COMPLETE = "complete"
STATUS_EXHAUSTED = "exhausted"


@dataclass(frozen=True)
class Provenance:
    """The winning phrase behind a candidate's score, with both factors."""

    phrase: str
    rel_prob: float
    sim_prob: float


@dataclass(frozen=True)
class Posterior:
    """Per-slot joint scores, normalized probabilities, and provenance."""

    slot: SlotKind
    scores: dict[str, float]
    probs: dict[str, float]
    provenance: dict[str, Provenance]

    def ranked_ids(self) -> list[str]:
        return [cid for cid, _ in sorted(self.probs.items(), key=lambda kv: (-kv[1], kv[0]))]


def candidate_similarity(
    candidate: Candidate, phrase_text: str, store: VectorStore, metric: str = "cosine"
) -> float:
    """Best similarity between any of the candidate's surfaces and a phrase."""
    return max(
        phrase_similarity(surface, phrase_text, store, metric)
        for surface in candidate.ranking_surfaces()
    )


def slot_posterior(
    utterance: str,
    slot: SlotKind,
    petel: Petel,
    extraction: ExtractionResult,
    store: VectorStore,
    metric: str = "cosine",
) -> Posterior:
    """Joint-probability ranking of one slot's candidates.

    For each phrase the candidate similarities are normalized into
    P(c | x, R_x=1); each candidate's score is the maximum over phrases of
    the relevance-weighted likelihood, and scores normalize to the slot
    distribution. Plain sequential arithmetic, in candidate order, keeps
    the result reproducible to the bit.
    """
    dist = petel.slot(slot)
    if dist.bound is not None:
        raise SlotBoundError(f"slot {slot.value} is already bound")
    if extraction.is_empty():
        raise EmptyUtteranceError(f"no phrases extracted for slot {slot.value}")
    if extraction.slot != slot:
        raise ValueError(
            f"extraction is for slot {extraction.slot.value}, not {slot.value}"
        )

    candidates = dist.candidates
    sim_rows: list[list[float]] = []
    for phrase in extraction.phrases:
        sims = [
            candidate_similarity(c, phrase.text, store, metric) for c in candidates
        ]
        denom = sum(sims)
        sim_rows.append([s / denom for s in sims])

    scores: dict[str, float] = {}
    provenance: dict[str, Provenance] = {}
    for j, candidate in enumerate(candidates):
        best_joint = -1.0
        best_i = 0
        for i in range(len(extraction.phrases)):
            joint = extraction.rel_probs[i] * sim_rows[i][j]
            if joint > best_joint:
                best_joint = joint
                best_i = i
        scores[candidate.id] = best_joint
        provenance[candidate.id] = Provenance(
            phrase=extraction.phrases[best_i].text,
            rel_prob=extraction.rel_probs[best_i],
            sim_prob=sim_rows[best_i][j],
        )

    total = sum(scores.values())
    probs = {cid: s / total for cid, s in scores.items()}
    return Posterior(slot=slot, scores=scores, probs=probs, provenance=provenance)


@dataclass
class Session:
    """State of one interactive task-formulation conversation."""

    id: str
    schema_name: str
    utterance: str
    petel: Petel
    rejected: dict[SlotKind, set[str]]
    status: str = STATUS_IN_PROGRESS
    events: list[dict] = field(default_factory=list)
    provenance: dict[SlotKind, dict[str, Provenance]] = field(default_factory=dict)
    config: EngineConfig = field(default_factory=EngineConfig)
    _seq: int = 0

    def log(self, event_type: str, **detail) -> None:
        self._seq += 1
        entry = {"seq": self._seq, "type": event_type, "ts": self.config.clock()}
        entry.update(detail)
        self.events.append(entry)

    def current_slot(self) -> SlotKind | None:
        for kind in SLOT_ORDER:
            if self.petel.slot(kind).bound is None:
                return kind
        return None

    def provenance_phrase(self, slot: SlotKind, candidate_id: str) -> str | None:
        record = self.provenance.get(slot, {}).get(candidate_id)
        return record.phrase if record else None


def _bound_attribute_type(session: Session, schema: Schema, slot: SlotKind):
    """Type of the attribute governing an operator slot, if already bound."""
    if slot == SlotKind.AGGREGATION:
        source = SlotKind.TARGET_ATTRIBUTE
    elif slot == SlotKind.FILTER_OPERATION:
        source = SlotKind.FILTER_ATTRIBUTE
    else:
        return None
    bound = session.petel.slot(source).bound
    if bound is None or bound.id == NONE_ID:
        return None
    attribute = schema.get(bound.id)
    return attribute.type if attribute else None


def _eligible(session: Session, slot: SlotKind, schema: Schema | None) -> list[tuple[Candidate, float]]:
    dist = session.petel.slot(slot)
    rejected = session.rejected[slot]
    pairs = [(c, p) for c, p in dist.ranked() if c.id not in rejected]
    if schema is not None:
        attr_type = _bound_attribute_type(session, schema, slot)
        if attr_type is not None:
            allowed = allowed_operators(attr_type, slot)
            compatible = [(c, p) for c, p in pairs if c.id in allowed]
            if compatible:
                pairs = compatible
    return pairs


def start_session(
    schema: Schema,
    utterance: str,
    store: VectorStore,
    config: EngineConfig | None = None,
    extractor: Extractor | None = None,
    session_id: str | None = None,
) -> Session:
    """Initialize a session: uniform prior, then immediate posteriors.

    All four slot distributions are re-ranked from the utterance before
    the first proposal. Slots for which extraction produced no phrases
    keep their uniform prior (logged as ``no_evidence``).
    """
    if not utterance or not utterance.strip():
        raise EmptyUtteranceError("utterance is empty")
    cfg = config or EngineConfig()
    ext = extractor or cfg.build_extractor(schema, store)
    session = Session(
        id=session_id or uuid.uuid4().hex,
        schema_name=schema.name,
        utterance=utterance,
        petel=init_petel(schema),
        rejected={kind: set() for kind in SLOT_ORDER},
        config=cfg,
    )
    session.log("session_started", utterance=utterance, extractor=ext.identity)
    for slot in SLOT_ORDER:
        extraction = ExtractionResult.from_phrases(slot, ext.extract(utterance, slot))
        if extraction.is_empty():
            session.log("no_evidence", slot=slot.value)
            continue
        posterior = slot_posterior(
            utterance, slot, session.petel, extraction, store, metric=cfg.metric
        )
        session.petel.set_slot(session.petel.slot(slot).with_probs(posterior.probs))
        session.provenance[slot] = posterior.provenance
        session.log(
            "slot_ranked",
            slot=slot.value,
            top=[[cid, posterior.probs[cid]] for cid in posterior.ranked_ids()[:3]],
        )
    return session


def peek_top(
    session: Session, slot: SlotKind | None = None, schema: Schema | None = None
) -> tuple[SlotKind, Candidate, float]:
    """The proposal that would be shown next, without logging it."""
    if session.status == STATUS_EXHAUSTED:
        raise SlotExhaustedError("session is exhausted")
    if session.status == STATUS_COMPLETE:
        raise SessionError("session is already complete")
    target = slot or session.current_slot()
    if target is None:
        raise SessionError("session is already complete")
    dist = session.petel.slot(target)
    if dist.bound is not None:
        raise SlotBoundError(f"slot {target.value} is already bound")
    pairs = _eligible(session, target, schema)
    if not pairs:
        session.status = STATUS_EXHAUSTED
        session.log("exhausted", slot=target.value)
        raise SlotExhaustedError(f"slot {target.value} has no candidates left")
    candidate, prob = pairs[0]
    return target, candidate, prob


def propose_top(
    session: Session, slot: SlotKind | None = None, schema: Schema | None = None
) -> Candidate:
    """Show the top non-rejected candidate for the (current) slot."""
    target, candidate, prob = peek_top(session, slot, schema)
    session.log("proposal", slot=target.value, candidate=candidate.id, probability=prob)
    return candidate


def _bind(session: Session, slot: SlotKind, candidate: Candidate) -> None:
    dist = session.petel.slot(slot)
    session.petel.set_slot(replace(dist, bound=candidate))


def feedback(
    session: Session,
    slot: SlotKind,
    candidate_id: str,
    verdict: str,
    schema: Schema | None = None,
) -> Session:
    """Apply an accept/reject verdict to the outstanding proposal.

    Accept binds the slot (and auto-binds the filtering constraint to NONE
    when the filter attribute is bound to NONE). Reject zeroes the
    candidate's probability, renormalizes the remainder by 1/(1 - p), and
    records the rejection. The candidate must be exactly the current
    proposal for the session's current slot.
    """
    if verdict not in ("accept", "reject"):
        raise ValueError(f"verdict must be 'accept' or 'reject', got {verdict!r}")
    dist = session.petel.slot(slot)
    if dist.bound is not None:
        raise SlotBoundError(f"slot {slot.value} is already bound")
    expected_slot, expected, _ = peek_top(session, None, schema)
    if expected_slot != slot or expected.id != candidate_id:
        raise NotProposedError(
            f"{candidate_id!r} is not the outstanding proposal for "
            f"slot {expected_slot.value} (expected {expected.id!r})"
        )

    if verdict == "accept":
        _bind(session, slot, expected)
        session.log("feedback", slot=slot.value, candidate=expected.id, verdict="accept")
        if slot == SlotKind.FILTER_ATTRIBUTE and expected.id == NONE_ID:
            op_dist = session.petel.slot(SlotKind.FILTER_OPERATION)
            none_c = op_dist.candidate(NONE_ID)
            if op_dist.bound is None and none_c is not None:
                _bind(session, SlotKind.FILTER_OPERATION, none_c)
                session.log(
                    "auto_bind", slot=SlotKind.FILTER_OPERATION.value, candidate=NONE_ID
                )
        if session.petel.is_complete():
            session.status = STATUS_COMPLETE
            session.log("completed")
        return session

    # Reject: condition the distribution on the candidate's removal.
    session.rejected[slot].add(expected.id)
    mapping = dist.as_mapping()
    p_rejected = mapping[expected.id]
    remaining = [cid for cid in mapping if cid not in session.rejected[slot]]
    if not remaining:
        session.status = STATUS_EXHAUSTED
        session.log("feedback", slot=slot.value, candidate=expected.id, verdict="reject")
        session.log("exhausted", slot=slot.value)
        return session
    keep = 1.0 - p_rejected
    new_probs = {
        cid: (0.0 if cid in session.rejected[slot] else mapping[cid] / keep)
        for cid in mapping
    }
    session.petel.set_slot(dist.with_probs(new_probs))
    session.log("feedback", slot=slot.value, candidate=expected.id, verdict="reject")
    return session


def session_to_document(session: Session) -> dict:
    """Persistent document form of a session (format-versioned)."""
    slots: dict[str, dict] = {}
    for kind in SLOT_ORDER:
        dist = session.petel.slot(kind)
        slots[kind.value] = {
            "bound": dist.bound.id if dist.bound else None,
            "rejected": sorted(session.rejected[kind]),
            "candidates": [
                {"id": c.id, "display": c.display, "probability": p}
                for c, p in zip(dist.candidates, dist.probs)
            ],
            "provenance": {
                cid: {
                    "phrase": record.phrase,
                    "rel_prob": record.rel_prob,
                    "sim_prob": record.sim_prob,
                }
                for cid, record in session.provenance.get(kind, {}).items()
            },
        }
    return {
        "format": SESSION_FORMAT,
        "id": session.id,
        "schema": session.schema_name,
        "utterance": session.utterance,
        "status": session.status,
        "slots": slots,
        "events": list(session.events),
        "config": session.config.to_document(),
    }


def session_from_document(document: dict) -> Session:
    """Rebuild a session from its persisted document."""
    if document.get("format") != SESSION_FORMAT:
        raise SessionError(f"unsupported session format {document.get('format')!r}")
    slots: dict[SlotKind, SlotDistribution] = {}
    rejected: dict[SlotKind, set[str]] = {}
    provenance: dict[SlotKind, dict[str, Provenance]] = {}
    for kind in SLOT_ORDER:
        entry = document["slots"][kind.value]
        candidates = tuple(
            Candidate(id=item["id"], display=item.get("display", item["id"]))
            for item in entry["candidates"]
        )
        probs = tuple(float(item["probability"]) for item in entry["candidates"])
        bound = None
        if entry.get("bound") is not None:
            bound = next(c for c in candidates if c.id == entry["bound"])
        slots[kind] = SlotDistribution(
            kind=kind, candidates=candidates, probs=probs, bound=bound
        )
        rejected[kind] = set(entry.get("rejected", []))
        provenance[kind] = {
            cid: Provenance(
                phrase=rec["phrase"],
                rel_prob=rec["rel_prob"],
                sim_prob=rec["sim_prob"],
            )
            for cid, rec in entry.get("provenance", {}).items()
        }
    session = Session(
        id=document["id"],
        schema_name=document["schema"],
        utterance=document["utterance"],
        petel=Petel(schema_name=document["schema"], slots=slots),
        rejected=rejected,
        status=document.get("status", STATUS_IN_PROGRESS),
        events=list(document.get("events", [])),
        provenance=provenance,
        config=EngineConfig.from_document(document.get("config")),
    )
    session._seq = max((e.get("seq", 0) for e in session.events), default=0)
    return session
