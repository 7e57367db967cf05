"""Dataset schemas: attribute typing, validation, and name tokenization.

A schema describes the user's (already flattened) table as an ordered list
of typed attributes, optionally carrying user-supplied synonyms. Everything
downstream -- candidate spaces, similarity scoring, template filling --
works off the tokenized attribute names produced here.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from .errors import SchemaError


class AttributeType(str, Enum):
    TIMESTAMP = "timestamp"
    ENTITY = "entity"
    CATEGORICAL = "categorical"
    NUMERICAL = "numerical"
    BINARY = "binary"
    NOMINAL = "nominal"


# Types whose values are ordered numbers (comparison filters, numeric
# aggregation) versus discrete labels (equality filters, majority).
NUMERIC_LIKE = frozenset({AttributeType.NUMERICAL, AttributeType.TIMESTAMP})
CATEGORICAL_LIKE = frozenset(
    {
        AttributeType.CATEGORICAL,
        AttributeType.ENTITY,
        AttributeType.BINARY,
        AttributeType.NOMINAL,
    }
)

_SEPARATOR = re.compile(r"[^A-Za-z0-9]+")
_CAMEL_BOUNDARY = re.compile(r"(?<=[a-z0-9])(?=[A-Z])|(?<=[A-Z])(?=[A-Z][a-z])")


def _split_tokens(text: str) -> list[str]:
    """Split text into lowercase tokens; may return an empty list."""
    tokens: list[str] = []
    for fragment in _SEPARATOR.split(text.replace("'", "")):
        if not fragment:
            continue
        for piece in _CAMEL_BOUNDARY.split(fragment):
            if piece:
                tokens.append(piece.lower())
    return tokens


def tokenize_attribute(name: str) -> list[str]:
    """Tokenize an attribute name for embedding and rendering.

    Splits on separators (underscores, spaces, punctuation) and on
    camel-case boundaries, lowercases, and drops empty fragments.
    Apostrophes are removed before splitting so possessives collapse
    ("Student's school" -> ["students", "school"]).

    Raises ValueError if the name is empty or contains no alphanumeric
    characters at all (such names are rejected at schema load).
    """
    if not name:
        raise ValueError("attribute name must be non-empty")
    tokens = _split_tokens(name)
    if not tokens:
        raise ValueError(f"attribute name {name!r} has no alphanumeric tokens")
    return tokens


@dataclass(frozen=True)
class Attribute:
    """A single schema column with its semantic type and synonyms."""

    name: str
    type: AttributeType
    synonyms: tuple[str, ...] = ()

    @property
    def tokens(self) -> list[str]:
        return tokenize_attribute(self.name)

    @property
    def surface(self) -> str:
        """Space-joined lowercase token rendering of the name."""
        return " ".join(self.tokens)

    def surface_forms(self) -> list[str]:
        """Name rendering plus every synonym, in declaration order."""
        return [self.surface, *self.synonyms]


@dataclass(frozen=True)
class Schema:
    """An ordered, validated collection of attributes."""

    name: str
    attributes: tuple[Attribute, ...]
    _by_name: dict[str, Attribute] = field(
        repr=False, compare=False, default_factory=dict
    )

    def __post_init__(self) -> None:
        for attr in self.attributes:
            self._by_name[attr.name.lower()] = attr

    def __len__(self) -> int:
        return len(self.attributes)

    def get(self, name: str) -> Attribute | None:
        """Case-insensitive attribute lookup."""
        return self._by_name.get(name.lower())

    def attribute_names(self) -> list[str]:
        return [a.name for a in self.attributes]


def _validate_attribute(entry: object, index: int) -> Attribute:
    if not isinstance(entry, dict):
        raise SchemaError(f"attribute #{index} is not an object")
    name = entry.get("name")
    if not isinstance(name, str) or not name.strip():
        raise SchemaError(f"attribute #{index} is missing a non-empty name")
    try:
        surface = " ".join(tokenize_attribute(name))
    except ValueError as exc:
        raise SchemaError(str(exc)) from exc
    type_tag = entry.get("type")
    try:
        attr_type = AttributeType(type_tag)
    except ValueError:
        raise SchemaError(
            f"attribute {name!r} has unknown type tag {type_tag!r}; "
            f"expected one of {sorted(t.value for t in AttributeType)}"
        ) from None
    synonyms = entry.get("synonyms", [])
    if not isinstance(synonyms, list) or not all(
        isinstance(s, str) and s.strip() for s in synonyms
    ):
        raise SchemaError(f"attribute {name!r} has a malformed synonyms list")
    seen: set[str] = set()
    for syn in synonyms:
        key = syn.strip().lower()
        if key in seen:
            raise SchemaError(f"attribute {name!r} repeats synonym {syn!r}")
        if key == surface:
            raise SchemaError(
                f"attribute {name!r} lists its own tokenized name {syn!r} as a synonym"
            )
        seen.add(key)
    return Attribute(name=name, type=attr_type, synonyms=tuple(synonyms))


def load_schema(source: str | Path | dict) -> Schema:
    """Load and validate a schema document.

    Accepts a parsed document (dict) or a path to a JSON file with keys
    ``name`` and ``attributes[] {name, type, synonyms[]}``. Attribute
    order is preserved. Raises SchemaError naming the offending attribute
    on duplicate names, unknown type tags, or an empty attribute list.
    """
    if isinstance(source, dict):
        document = source
    else:
        path = Path(source)
        try:
            document = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise SchemaError(f"schema file {path} is not valid JSON: {exc}") from exc
        if not isinstance(document, dict):
            raise SchemaError(f"schema file {path} must contain a JSON object")

    name = document.get("name")
    if not isinstance(name, str) or not name.strip():
        raise SchemaError("schema document is missing a non-empty 'name'")
    raw_attributes = document.get("attributes")
    if not isinstance(raw_attributes, list) or not raw_attributes:
        raise SchemaError(f"schema {name!r} declares zero attributes")

    attributes: list[Attribute] = []
    seen: set[str] = set()
    for index, entry in enumerate(raw_attributes):
        attr = _validate_attribute(entry, index)
        key = attr.name.lower()
        if key in seen:
            raise SchemaError(f"duplicate attribute name {attr.name!r}")
        seen.add(key)
        attributes.append(attr)
    return Schema(name=name, attributes=tuple(attributes))


def serialize_schema(schema: Schema) -> dict:
    """Render a Schema back to its document form (inverse of load_schema)."""
    return {
        "name": schema.name,
        "attributes": [
            {"name": a.name, "type": a.type.value, "synonyms": list(a.synonyms)}
            for a in schema.attributes
        ],
    }
