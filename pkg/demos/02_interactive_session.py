"""Walk the accept/reject confirmation loop, scripted.

The session proposes the top candidate for one slot at a time. Here a
scripted user rejects the first target proposal, accepts the runner-up,
and accepts everything else; rejections renormalize the surviving
candidates by 1/(1 - p_rejected). The finished expression prints as the
familiar slot/value block.
"""

from petelkit import EngineConfig, load_schema, load_vectors, render_petel, start_session
from petelkit.lexicon import fixture_schema_path, fixture_vectors_path
from petelkit.petel import SLOT_DISPLAY
from petelkit.ranker import feedback, propose_top

schema = load_schema(fixture_schema_path("flight_delay"))
store = load_vectors(fixture_vectors_path())

session = start_session(
    schema,
    "For each airline, predict the maximum delay that any of its flights "
    "will suffer next week.",
    store,
    EngineConfig(),
)

scripted_verdicts = iter(["reject", "accept", "accept", "accept", "accept", "accept"])

while session.status == "in_progress":
    slot = session.current_slot()
    if slot is None:
        break
    candidate = propose_top(session, schema=schema)
    prob = session.petel.slot(slot).as_mapping()[candidate.id]
    verdict = next(scripted_verdicts)
    print(f"{SLOT_DISPLAY[slot]}: propose {candidate.display} (p={prob:.6f}) -> {verdict}")
    feedback(session, slot, candidate.id, verdict, schema=schema)

print(f"\nsession status: {session.status}\n")
print(render_petel(session.petel))
