"""Replay a validation set and compare two similarity metrics.

Each labeled utterance is ranked with no user feedback; the report
carries the mean reciprocal rank of the gold value and the top-1 micro-F1
per slot. The per-instance reciprocal ranks of two configurations then
feed the paired signed-rank test.
"""

from petelkit import EngineConfig, evaluate, load_schema, load_validation, load_vectors
from petelkit import wilcoxon_signed_rank
from petelkit.lexicon import (
    fixture_schema_path,
    fixture_validation_path,
    fixture_vectors_path,
)

schema = load_schema(fixture_schema_path("flight_delay"))
store = load_vectors(fixture_vectors_path())
instances = load_validation(fixture_validation_path("flight_delay"))[:8]

reports = {}
for metric in ("cosine", "euclidean"):
    config = EngineConfig(metric=metric)
    reports[metric] = evaluate(
        instances, schema, store, config, embeddings_name="fixture_8d.txt"
    )
    print(f"--- metric: {metric} ---")
    print(reports[metric].as_table())
    print()

# Paired comparison on the flattened per-instance reciprocal ranks.
def reciprocal_ranks(report):
    return [
        1.0 / rank
        for slot in sorted(report.gold_ranks)
        for rank in report.gold_ranks[slot]
    ]

a = reciprocal_ranks(reports["cosine"])
b = reciprocal_ranks(reports["euclidean"])
try:
    result = wilcoxon_signed_rank(a, b)
    print(
        f"signed-rank test over {len(a)} paired reciprocal ranks: "
        f"W={result.w:.3f}, n_effective={result.n_effective}, "
        f"p={result.p_two_sided:.4f}"
    )
except Exception as exc:  # identical score vectors make the test undefined
    print(f"signed-rank test not applicable: {exc}")
