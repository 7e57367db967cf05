"""Rank a forecast request against a dataset schema.

Loads the flight-delay fixture schema and the small shipped vector file,
then turns one natural-language request into four ranked slot
distributions. The probability column is the joint of phrase relevance
and phrase/candidate similarity, maximized over the extracted phrases.
"""

from petelkit import EngineConfig, SlotKind, load_schema, load_vectors, start_session
from petelkit.lexicon import fixture_schema_path, fixture_vectors_path
from petelkit.petel import SLOT_DISPLAY

schema = load_schema(fixture_schema_path("flight_delay"))
store = load_vectors(fixture_vectors_path())

utterance = (
    "For each airline, predict the maximum delay that any of its flights "
    "will suffer next week."
)
print(f"utterance: {utterance}\n")

session = start_session(schema, utterance, store, EngineConfig())

for kind in SlotKind:
    print(f"== {SLOT_DISPLAY[kind]} ==")
    for candidate, prob in session.petel.slot(kind).ranked()[:5]:
        phrase = session.provenance_phrase(kind, candidate.id)
        print(f"  {candidate.display:<30} {prob:.6f}   evidence: {phrase!r}")
    print()
