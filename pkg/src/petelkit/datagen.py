"""Synthetic training-data generation from slot templates.

Templates carry one ``{slot}`` placeholder per targeted slot. Attribute
placeholders take every attribute's name rendering and every synonym;
operator placeholders take every keyword of every operator of that kind.
The resulting annotated utterances serialize losslessly to the two
standard span-annotation corpus shapes: line-per-token BIO tagging and
context/question/answer-with-offset JSON.
"""

from __future__ import annotations

import json
import random
import re
from dataclasses import dataclass
from math import ceil
from pathlib import Path
from typing import Iterable, Sequence

from . import lexicon as lex
from .errors import AlignmentError, TemplateError
from .petel import ATTRIBUTE_SLOTS, SlotKind
from .schema import Schema

_PLACEHOLDER = re.compile(r"\{([a-z_]+)\}")
_CONLL_TOKEN = re.compile(r"\w+|[^\w\s]")


@dataclass(frozen=True)
class Template:
    """A fill-in-the-blank utterance with at most one blank per slot."""

    text: str
    slots: tuple[SlotKind, ...]
    line_no: int | None = None


@dataclass(frozen=True)
class SlotLabel:
    slot: SlotKind
    start: int
    end: int
    fill: str


@dataclass(frozen=True)
class AnnotatedUtterance:
    """A generated utterance plus the spans of its slot fills."""

    text: str
    labels: tuple[SlotLabel, ...]

    def validate(self) -> None:
        previous_end = -1
        for label in sorted(self.labels, key=lambda l: l.start):
            if self.text[label.start : label.end] != label.fill:
                raise AlignmentError(
                    f"label span ({label.start}, {label.end}) slices to "
                    f"{self.text[label.start:label.end]!r}, not {label.fill!r}"
                )
            if label.start < previous_end:
                raise AlignmentError("overlapping labels")
            previous_end = label.end


def parse_template(text: str, line_no: int | None = None) -> Template:
    """Validate one template line: known placeholders, one per slot."""
    kinds: list[SlotKind] = []
    for match in _PLACEHOLDER.finditer(text):
        name = match.group(1)
        try:
            kind = SlotKind(name)
        except ValueError:
            raise TemplateError(
                f"template line {line_no or '?'}: unknown placeholder {{{name}}}"
            ) from None
        if kind in kinds:
            raise TemplateError(
                f"template line {line_no or '?'}: duplicate placeholder {{{name}}}"
            )
        kinds.append(kind)
    if not kinds:
        raise TemplateError(
            f"template line {line_no or '?'}: no slot placeholder found"
        )
    return Template(text=text, slots=tuple(kinds), line_no=line_no)


def load_templates(source: str | Path) -> list[Template]:
    """Read a template file: one template per line, ``#`` comments allowed."""
    templates = []
    for line_no, raw in enumerate(Path(source).read_text("utf-8").splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        templates.append(parse_template(line, line_no))
    if not templates:
        raise TemplateError(f"{source}: no templates found")
    return templates


def _slot_fills(
    slot: SlotKind, schema: Schema, lexicon: lex.Lexicon | None
) -> list[str]:
    if slot in ATTRIBUTE_SLOTS:
        fills: list[str] = []
        for attr in schema.attributes:
            fills.extend(attr.surface_forms())
        return fills
    ops = (
        lex.AGGREGATION_OPERATORS
        if slot == SlotKind.AGGREGATION
        else lex.FILTER_OPERATORS
    )
    return [kw for op in ops for kw in lex.operator_keywords(op, lexicon)]


def _fill_one(template: Template, choice: dict[SlotKind, str]) -> AnnotatedUtterance:
    out: list[str] = []
    labels: list[SlotLabel] = []
    cursor = 0
    position = 0
    for match in _PLACEHOLDER.finditer(template.text):
        out.append(template.text[cursor : match.start()])
        position += match.start() - cursor
        fill = choice[SlotKind(match.group(1))]
        labels.append(
            SlotLabel(
                slot=SlotKind(match.group(1)),
                start=position,
                end=position + len(fill),
                fill=fill,
            )
        )
        out.append(fill)
        position += len(fill)
        cursor = match.end()
    out.append(template.text[cursor:])
    utterance = AnnotatedUtterance(text="".join(out), labels=tuple(labels))
    utterance.validate()
    return utterance


def fill_templates(
    templates: Sequence[Template],
    schema: Schema,
    lexicon: lex.Lexicon | None = None,
) -> list[AnnotatedUtterance]:
    """Cross every template with every surface form of its placeholders.

    For a single attribute placeholder this yields one utterance per
    template per attribute surface form (name rendering plus each
    synonym); multi-placeholder templates take the full product.
    """
    corpus: list[AnnotatedUtterance] = []
    for template in templates:
        fill_sets = []
        for slot in template.slots:
            fills = _slot_fills(slot, schema, lexicon)
            if not fills:
                raise TemplateError(
                    f"template line {template.line_no or '?'}: "
                    f"placeholder {{{slot.value}}} has no candidate fills"
                )
            fill_sets.append(fills)
        combos: list[dict[SlotKind, str]] = [{}]
        for slot, fills in zip(template.slots, fill_sets):
            combos = [dict(c, **{slot: f}) for c in combos for f in fills]
        for choice in combos:
            corpus.append(_fill_one(template, choice))
    return corpus


def _conll_tokens(text: str) -> list[tuple[str, int, int]]:
    """Whitespace tokens with punctuation split off, with offsets."""
    return [(m.group(), m.start(), m.end()) for m in _CONLL_TOKEN.finditer(text)]


def emit_conll(corpus: Sequence[AnnotatedUtterance]) -> str:
    """Line-per-token ``token TAG`` rendering with BIO slot tags.

    Utterances are separated by exactly one blank line. Raises
    AlignmentError (naming the utterance index) when a label span does
    not land on token boundaries.
    """
    blocks: list[str] = []
    for index, utterance in enumerate(corpus):
        tokens = _conll_tokens(utterance.text)
        tags = ["O"] * len(tokens)
        for label in utterance.labels:
            covered = [
                i
                for i, (_, s, e) in enumerate(tokens)
                if s >= label.start and e <= label.end
            ]
            if (
                not covered
                or tokens[covered[0]][1] != label.start
                or tokens[covered[-1]][2] != label.end
            ):
                raise AlignmentError(
                    f"utterance {index}: label {label.fill!r} at "
                    f"({label.start}, {label.end}) does not align to token boundaries"
                )
            name = label.slot.value.upper()
            tags[covered[0]] = f"B-{name}"
            for i in covered[1:]:
                tags[i] = f"I-{name}"
        blocks.append("\n".join(f"{tok} {tag}" for (tok, _, _), tag in zip(tokens, tags)))
    return "\n\n".join(blocks) + "\n"


def parse_conll(text: str) -> list[list[tuple[str, str]]]:
    """Read a ``token TAG`` document back into per-utterance sequences."""
    utterances: list[list[tuple[str, str]]] = []
    current: list[tuple[str, str]] = []
    for line in text.splitlines():
        if not line.strip():
            if current:
                utterances.append(current)
                current = []
            continue
        token, tag = line.rsplit(" ", 1)
        current.append((token, tag))
    if current:
        utterances.append(current)
    return utterances


def emit_squad(
    corpus: Sequence[AnnotatedUtterance],
    questions: dict[str, str] | None = None,
    title: str = "generated",
) -> dict:
    """Context/question/answer document with character offsets.

    One paragraph per utterance; one question-answer entry per labeled
    slot, whose ``answer_start`` is the character offset of the fill.
    """
    qs = questions if questions is not None else lex.load_slot_questions()
    paragraphs = []
    for index, utterance in enumerate(corpus):
        qas = []
        for label in utterance.labels:
            if utterance.text[label.start : label.end] != label.fill:
                raise AlignmentError(
                    f"utterance {index}: offset mismatch for {label.fill!r}"
                )
            qas.append(
                {
                    "id": f"{index}-{label.slot.value}",
                    "question": qs.get(label.slot.value, label.slot.value),
                    "answers": [{"text": label.fill, "answer_start": label.start}],
                }
            )
        paragraphs.append({"context": utterance.text, "qas": qas})
    return {"version": "1.1", "data": [{"title": title, "paragraphs": paragraphs}]}


def squad_to_json(document: dict) -> str:
    """Canonical serialization used for byte-stable corpus files."""
    return json.dumps(document, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def train_test_split(
    corpus: Sequence[AnnotatedUtterance], ratio: float, seed: int = 0
) -> tuple[list[AnnotatedUtterance], list[AnnotatedUtterance]]:
    """Deterministic seeded shuffle split; train takes ceil(N * ratio)."""
    if not corpus:
        raise ValueError("cannot split an empty corpus")
    if not 0 < ratio < 1:
        raise ValueError(f"ratio must be in (0, 1), got {ratio!r}")
    order = list(range(len(corpus)))
    random.Random(seed).shuffle(order)
    cut = ceil(len(corpus) * ratio)
    train = [corpus[i] for i in order[:cut]]
    test = [corpus[i] for i in order[cut:]]
    return train, test
