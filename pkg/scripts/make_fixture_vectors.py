"""Regenerate the shipped 8-dimensional fixture vector file.

Builds a small controlled embedding space covering the three fixture
schemas, the operator keyword lexicon, and common forecasting-utterance
vocabulary. Tokens are grouped into concept clusters; each cluster gets a
well-separated unit direction and each token a lightly jittered copy, so
same-concept tokens score near 1.0 cosine while unrelated concepts stay
clearly apart. Function words are deliberately left out of vocabulary so
phrase means are driven by content words.

Run from the repository root:  python3 scripts/make_fixture_vectors.py
"""

from __future__ import annotations

import sys
from pathlib import Path

import numpy as np

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "src"))

from petelkit.lexicon import load_operator_lexicon  # noqa: E402
from petelkit.schema import load_schema, tokenize_attribute  # noqa: E402

OUT_PATH = ROOT / "src" / "petelkit" / "data" / "vectors" / "fixture_8d.txt"
DIM = 8
SEED = 20240811
JITTER = 0.06
OPERATOR_MAX_COS = 0.60
GLOBAL_MAX_COS = 0.78

# Function words intentionally out of vocabulary.
SKIP = {
    "a", "an", "the", "of", "to", "for", "in", "on", "at", "by", "with",
    "and", "or", "is", "are", "was", "were", "be", "than", "that", "this",
    "it", "its", "i", "we", "will", "what", "how", "within", "no", "up",
    "caused", "after", "getting",
}

# Common utterance vocabulary beyond schema names and operator keywords.
EXTRA_TOKENS = [
    "predict", "prediction", "forecast", "estimate", "expect", "expected",
    "know", "tell", "show", "suffer", "experience", "next", "coming",
    "tomorrow", "flights", "airlines", "students", "orders", "customer",
    "customers", "grades", "delays", "delayed", "where", "arrive",
]

# Concept clusters; clusters listed earlier get the most separated
# directions. Unlisted tokens become singleton concepts.
CLUSTERS: dict[str, list[str]] = {
    # Operator concepts first: their mutual separation matters most.
    "max": ["maximum", "max", "highest", "largest", "peak", "most"],
    "min": ["minimum", "min", "lowest", "smallest", "least"],
    "sum": ["sum", "total", "overall", "combined"],
    "avg": ["average", "avg", "mean", "typical"],
    "number": ["number", "count", "many", "frequency", "id", "code", "pin"],
    "majority": ["majority", "common", "dominant", "frequent", "popular"],
    "all": ["all", "every", "any", "entire", "each"],
    "greater": ["greater", "more", "above", "over", "exceeds", "higher", "high"],
    "less": ["less", "below", "under", "fewer", "lower", "smaller", "low"],
    "equal": ["equal", "equals", "same", "exactly"],
    "negation": ["not", "different", "except", "excluding", "unequal", "without"],
    "none": ["none", "nothing"],
    "filter": ["filter", "filtering", "where"],
    "predict": ["predict", "prediction", "forecast", "estimate", "expect",
                "expected"],
    "delay": ["delay", "delays", "delayed", "hold"],
    "late": ["late", "lateness"],
    # Domain concepts.
    "time": ["date", "day", "days", "week", "weeks", "weekday", "calendar",
             "time", "hour", "hours", "tomorrow", "month", "year", "minutes",
             "duration", "elapsed", "scheduled", "planned", "next", "coming",
             "long", "weekly", "monthly", "workday", "weekend", "past",
             "current"],
    "flight": ["flight", "flights", "takeoff", "plane", "aircraft", "tail"],
    "airline": ["airline", "airlines", "carrier"],
    "airport": ["airport", "airports", "origin", "destination", "source"],
    "arrival": ["arrival", "landing", "arrive"],
    "departure": ["departure", "depart"],
    "cancel": ["cancelled", "cancellation", "cancel"],
    "weather": ["weather"],
    "security": ["security", "safety"],
    "system": ["system", "air"],
    "status": ["status", "flag", "condition"],
    "reason": ["reason"],
    "know": ["know", "tell", "show", "want", "wants", "give", "take"],
    "suffer": ["suffer", "experience"],
    "order": ["order", "orders", "ordered", "meal", "food", "placed"],
    "delivery": ["delivery", "delivered", "deliver", "picking", "assigned"],
    "person": ["person", "customer", "customers", "captain", "ability"],
    "money": ["income", "salary", "payment", "price", "unaffordable", "saving"],
    "good": ["good", "quality", "politeness", "freshness", "taste"],
    "bad": ["bad", "poor", "wrong", "mistake", "missing", "hygiene",
            "accidental"],
    "choice": ["choices", "option", "preference", "medium", "channel"],
    "location": ["location", "residence", "address", "latitude", "longitude",
                 "home", "postal", "busy"],
    "maps": ["google", "maps", "map", "tracking", "accuracy"],
    "rating": ["rating", "reviews", "review", "influence"],
    "calls": ["calls", "call"],
    "student": ["student", "students"],
    "grade": ["grade", "grades", "mark"],
    "period": ["period", "term", "first", "second", "final"],
    "family": ["family", "parent", "parents", "mother", "mothers", "father",
               "fathers", "guardian", "cohabitation"],
    "education": ["education", "educational", "qualifications", "classes",
                  "class", "course", "subject", "study", "nursery", "school"],
    "support": ["support", "help"],
    "romance": ["romantic", "relationship", "relationships"],
    "leisure": ["going", "out", "friends", "free"],
    "absence": ["absences", "absence", "missed", "failures"],
    "alcohol": ["alcohol", "consumption"],
    "health": ["health", "concern"],
    "occupation": ["occupation", "profession", "job"],
    "size": ["size", "household", "quantity"],
    "convenient": ["ease", "easy", "convenient"],
    "offers": ["offers", "discount"],
    "sex": ["sex", "gender"],
    "travel": ["travel"],
    "item": ["item", "package"],
    "internet": ["internet", "access"],
    "extra": ["extra", "paid", "curricular", "activities", "attended"],
    "arrive_extra": ["arriving"],
}

# Clusters whose pairwise separation is asserted tightly.
OPERATOR_CLUSTERS = [
    "max", "min", "sum", "avg", "number", "majority", "all", "greater",
    "less", "equal", "negation", "none",
]

# Directed pulls between concepts that co-occur heavily in real corpora
# (news text binds "arrival" to "delay" far more tightly than the other
# flight words): cluster -> (anchor cluster, blend weight).
AFFINITY = {
    "arrival": ("delay", 0.65),
    "departure": ("delay", 0.30),
}

# Concepts that get the tightest mutual separation: the operator clusters
# plus everything a flight-domain forecasting utterance leans on.
PRIORITY_CLUSTERS = frozenset(
    OPERATOR_CLUSTERS
    + [
        "filter", "predict", "delay", "time", "flight", "airline", "airport",
        "arrival", "departure", "cancel", "weather", "security", "system", "late",
        "status", "reason", "know", "suffer", "order", "student", "grade",
    ]
)


def wanted_tokens() -> set[str]:
    tokens: set[str] = set()
    for name in ("flight_delay", "online_delivery", "student_performance"):
        schema = load_schema(
            ROOT / "src" / "petelkit" / "data" / "schemas" / f"{name}.json"
        )
        for attr in schema.attributes:
            tokens.update(attr.tokens)
            for syn in attr.synonyms:
                tokens.update(tokenize_attribute(syn))
    for keywords in load_operator_lexicon().values():
        for kw in keywords:
            tokens.update(tokenize_attribute(kw))
    tokens.update(EXTRA_TOKENS)
    return {t for t in tokens if t not in SKIP}


def _repulsion_code(n: int, rng: np.random.Generator, iters: int = 4000) -> np.ndarray:
    """Spherical code via soft repulsion: n directions minimizing max |cos|."""
    points = rng.normal(size=(n, DIM))
    points /= np.linalg.norm(points, axis=1, keepdims=True)
    for _ in range(iters):
        gram = points @ points.T
        np.fill_diagonal(gram, 0.0)
        weights = np.exp(12.0 * np.abs(gram))
        np.fill_diagonal(weights, 0.0)
        grad = (weights * np.sign(gram)) @ points
        points -= 0.05 * grad / weights.sum(axis=1, keepdims=True)
        points /= np.linalg.norm(points, axis=1, keepdims=True)
    return points


def sample_directions(
    n_priority: int, n_total: int, rng: np.random.Generator
) -> np.ndarray:
    """Tightly spread directions for the priority block, greedy for the rest."""
    directions = list(_repulsion_code(n_priority, rng))
    for _ in range(n_total - n_priority):
        candidates = rng.normal(size=(6000, DIM))
        candidates /= np.linalg.norm(candidates, axis=1, keepdims=True)
        chosen = np.stack(directions)
        worst = np.abs(candidates @ chosen.T).max(axis=1)
        directions.append(candidates[int(np.argmin(worst))])
    return np.stack(directions)


def main() -> None:
    tokens = wanted_tokens()
    assigned: dict[str, str] = {}
    for cluster, members in CLUSTERS.items():
        for token in members:
            if token in tokens:
                assigned[token] = cluster
    used = [c for c in CLUSTERS if any(assigned.get(t) == c for t in tokens)]
    used_order = [c for c in used if c in PRIORITY_CLUSTERS] + [
        c for c in used if c not in PRIORITY_CLUSTERS
    ]
    singles = sorted(t for t in tokens if t not in assigned)
    cluster_names = used_order + [f"single:{t}" for t in singles]
    for token in singles:
        assigned[token] = f"single:{token}"

    rng = np.random.default_rng(SEED)
    n_priority = sum(1 for name in cluster_names if name in PRIORITY_CLUSTERS)
    directions = sample_directions(n_priority, len(cluster_names), rng)
    center = {name: directions[i] for i, name in enumerate(cluster_names)}
    for name, (anchor, weight) in AFFINITY.items():
        if name in center and anchor in center:
            pulled = center[name] + weight * center[anchor]
            center[name] = pulled / np.linalg.norm(pulled)

    vectors: dict[str, np.ndarray] = {}
    for token in sorted(tokens):
        base = center[assigned[token]]
        jitter_rng = np.random.default_rng(abs(hash((SEED, token))) % (2**32))
        v = base + JITTER * jitter_rng.normal(size=DIM)
        vectors[token] = v / np.linalg.norm(v)

    # Design checks: operator concepts stay apart, clusters stay tight.
    for i, a in enumerate(OPERATOR_CLUSTERS):
        for b in OPERATOR_CLUSTERS[i + 1 :]:
            separation = abs(float(center[a] @ center[b]))
            assert separation <= OPERATOR_MAX_COS, f"{a} vs {b}: {separation:.3f}"
    gram = directions @ directions.T - np.eye(len(cluster_names))
    worst_pair = float(np.abs(gram).max())
    assert worst_pair <= GLOBAL_MAX_COS, f"global separation {worst_pair:.3f}"
    for cluster, members in CLUSTERS.items():
        present = [m for m in members if m in vectors]
        for m in present[1:]:
            tightness = float(vectors[present[0]] @ vectors[m])
            assert tightness > 0.9, f"{cluster}: {present[0]} vs {m} = {tightness:.3f}"

    OUT_PATH.parent.mkdir(parents=True, exist_ok=True)
    with OUT_PATH.open("w", encoding="utf-8") as fh:
        for token in sorted(vectors):
            comps = " ".join(f"{x:.6f}" for x in vectors[token])
            fh.write(f"{token} {comps}\n")
    print(f"wrote {len(vectors)} vectors (dim {DIM}) to {OUT_PATH}")
    print(f"clusters: {len(cluster_names)}, worst pair |cos|: {worst_pair:.3f}")
    _check_extraction_invariants()


def _check_extraction_invariants() -> None:
    """The behaviors the shipped fixtures promise, re-checked on write."""
    from petelkit.embeddings import load_vectors, phrase_similarity

    store = load_vectors(OUT_PATH)
    schema = load_schema(
        ROOT / "src" / "petelkit" / "data" / "schemas" / "flight_delay.json"
    )
    surfaces: list[str] = []
    for attr in schema.attributes:
        surfaces.append(attr.surface)
        surfaces.extend(attr.synonyms)

    def best_ngram(utterance: str, forms: list[str]) -> str:
        words = utterance.split()
        best, best_score = "", -1.0
        for i in range(len(words)):
            for n in (1, 2, 3):
                if i + n > len(words):
                    break
                text = " ".join(words[i : i + n])
                score = max(phrase_similarity(s, text, store) for s in forms)
                if score > best_score:
                    best, best_score = text, score
        return best

    top = best_ngram("predict the maximum delay", surfaces)
    assert "delay" in top, f"target-slot evidence drifted: top n-gram {top!r}"
    agg_forms = [kw for kws in load_operator_lexicon().values() for kw in kws]
    top = best_ngram("predict the maximum delay", agg_forms)
    assert "maximum" in top, f"operator-slot evidence drifted: top n-gram {top!r}"


if __name__ == "__main__":
    main()
