"""Acceptance gate: every headline guarantee, one pass/fail line each.

Run with ``pytest tests/test_acceptance.py -s`` to see the per-criterion
lines. Each criterion carries its tolerance inline; failures raise.
"""

import json
import random
import time
from contextlib import contextmanager
from dataclasses import replace
from pathlib import Path

import pytest

from petelkit import (
    EngineConfig,
    ExtractionResult,
    SalientPhrase,
    SlotKind,
    emit_conll,
    emit_squad,
    evaluate,
    fill_templates,
    init_petel,
    load_schema,
    load_validation,
    mrr,
    parse_conll,
    slot_posterior,
    wilcoxon_signed_rank,
)
from petelkit.datagen import parse_template
from petelkit.extraction import LexicalExtractor
from petelkit.lexicon import fixture_schema_path, fixture_validation_path
from petelkit.petel import SLOT_ORDER
from petelkit.ranker import candidate_similarity, feedback, peek_top, propose_top

import petelkit.ranker as ranker_module

from conftest import FLAGSHIP_UTTERANCE, FIXTURE_NAMES
from oracles import brute_posterior_from_sims, brute_posterior_full, wilcoxon_enum_p
from test_ranker import _synthetic_session, extraction_of, make_petel, tiny_store, _random_instance
from test_evaluation import GoldSurfaceExtractor

GOLDEN_DIR = Path(__file__).parent / "golden"


@contextmanager
def criterion(name):
    try:
        yield
    except BaseException:
        print(f"[ACCEPTANCE] {name}: FAIL")
        raise
    print(f"[ACCEPTANCE] {name}: PASS")


def test_eq2_oracle_equivalence():
    with criterion("eq2-oracle-equivalence (>=200 randomized, <10s)"):
        started = time.monotonic()
        rng = random.Random(424242)
        for _ in range(220):
            candidate_ids, surfaces, phrases, vocab = _random_instance(rng)
            store = tiny_store(vocab)
            petel = make_petel(candidate_ids, surfaces=surfaces)
            extraction = extraction_of(SlotKind.TARGET_ATTRIBUTE, phrases)
            posterior = slot_posterior(
                "q", SlotKind.TARGET_ATTRIBUTE, petel, extraction, store
            )
            expected = brute_posterior_full(
                list(extraction.rel_probs),
                [p.text for p in extraction.phrases],
                [list(surfaces[cid]) for cid in candidate_ids],
                {t: list(v) for t, v in vocab.items()},
            )
            for cid, value in zip(candidate_ids, expected):
                assert abs(posterior.probs[cid] - value) <= 1e-12
            dist = petel.slot(SlotKind.TARGET_ATTRIBUTE)
            sims = [
                [candidate_similarity(c, p.text, store) for c in dist.candidates]
                for p in extraction.phrases
            ]
            bitwise = brute_posterior_from_sims(list(extraction.rel_probs), sims)
            for cid, value in zip(candidate_ids, bitwise):
                assert posterior.probs[cid] == value  # identical normalization order
        assert time.monotonic() - started < 10.0


def test_worked_example_golden(fd_schema, store):
    with criterion("worked-example (ARRIVAL_DELAY rank == oracle rank, max_agg argmax)"):
        extractor = LexicalExtractor(schema=fd_schema, store=store)
        petel = init_petel(fd_schema)

        ranks = {}
        argmaxes = {}
        for slot in (SlotKind.TARGET_ATTRIBUTE, SlotKind.AGGREGATION):
            extraction = ExtractionResult.from_phrases(
                slot, extractor.extract(FLAGSHIP_UTTERANCE, slot)
            )
            posterior = slot_posterior(
                FLAGSHIP_UTTERANCE, slot, petel, extraction, store
            )
            dist = petel.slot(slot)
            oracle = brute_posterior_full(
                list(extraction.rel_probs),
                [p.text for p in extraction.phrases],
                [list(c.ranking_surfaces()) for c in dist.candidates],
                {t: list(store.get(t)) for t in store.tokens()},
            )
            oracle_by_id = dict(zip((c.id for c in dist.candidates), oracle))
            oracle_ranked = sorted(oracle_by_id, key=lambda cid: (-oracle_by_id[cid], cid))
            impl_ranked = posterior.ranked_ids()
            for cid in oracle_by_id:
                assert abs(posterior.probs[cid] - oracle_by_id[cid]) <= 1e-12
            ranks[slot] = {
                "impl": impl_ranked.index("Arrival_delay") + 1
                if slot == SlotKind.TARGET_ATTRIBUTE
                else None,
                "oracle": oracle_ranked.index("Arrival_delay") + 1
                if slot == SlotKind.TARGET_ATTRIBUTE
                else None,
            }
            argmaxes[slot] = impl_ranked[0]

        target = ranks[SlotKind.TARGET_ATTRIBUTE]
        assert target["impl"] == target["oracle"]
        assert argmaxes[SlotKind.AGGREGATION] == "max_agg"

        golden_path = GOLDEN_DIR / "worked_example.json"
        record = {
            "utterance": FLAGSHIP_UTTERANCE,
            "arrival_delay_rank": target["oracle"],
            "aggregation_argmax": argmaxes[SlotKind.AGGREGATION],
        }
        if not golden_path.exists():
            golden_path.parent.mkdir(exist_ok=True)
            golden_path.write_text(json.dumps(record, indent=2) + "\n", "utf-8")
        golden = json.loads(golden_path.read_text("utf-8"))
        assert golden == record


def test_oracle_extractor_upper_bound(store):
    with criterion("oracle-extractor upper bound (MRR == 1.0 on all slots, <30s)"):
        started = time.monotonic()
        for name in FIXTURE_NAMES:
            schema = load_schema(fixture_schema_path(name))
            instances = load_validation(fixture_validation_path(name))
            extractor = GoldSurfaceExtractor(schema, instances)
            report = evaluate(instances, schema, store, extractor=extractor)
            for slot in SLOT_ORDER:
                assert report.per_slot_mrr[slot.value] == 1.0
        assert time.monotonic() - started < 30.0


def test_cardinality_law():
    with criterion("template cardinality law (100 random pairs, exact)"):
        rng = random.Random(777)
        for _ in range(100):
            attributes = []
            for i in range(rng.randint(1, 7)):
                attributes.append(
                    {
                        "name": f"col_{i}",
                        "type": rng.choice(["numerical", "categorical"]),
                        "synonyms": [f"alias {i} {j}" for j in range(rng.randint(0, 4))],
                    }
                )
            schema = load_schema({"name": "law", "attributes": attributes})
            templates = [
                parse_template(f"Utterance {t} about {{target_attribute}}.", t + 1)
                for t in range(rng.randint(1, 5))
            ]
            corpus = fill_templates(templates, schema)
            expected = len(templates) * sum(1 + len(a["synonyms"]) for a in attributes)
            assert len(corpus) == expected


def test_format_fidelity(fd_schema):
    with criterion("format fidelity (CoNLL round-trip + BIO, SQuAD offsets, goldens)"):
        templates = [
            parse_template("Predict the average {target_attribute} for each airline tomorrow.", 1),
            parse_template("Forecast the {aggregation} {target_attribute} next week.", 2),
            parse_template("Filter on {filter_attribute} being {filter_operation} normal.", 3),
        ]
        corpus = fill_templates(templates, fd_schema)
        conll = emit_conll(corpus)
        parsed = parse_conll(conll)
        assert len(parsed) == len(corpus)
        for utterance, tokens in zip(corpus, parsed):
            assert emit_conll([utterance]).splitlines() == [
                f"{tok} {tag}" for tok, tag in tokens
            ]
            previous = "O"
            for _, tag in tokens:
                if tag.startswith("I-"):
                    assert previous != "O" and previous.endswith(tag[2:])
                previous = tag
        squad = emit_squad(corpus)
        for paragraph in squad["data"][0]["paragraphs"]:
            for qa in paragraph["qas"]:
                answer = qa["answers"][0]
                start = answer["answer_start"]
                assert (
                    paragraph["context"][start : start + len(answer["text"])]
                    == answer["text"]
                )
        # Byte-stable goldens for a fixed corpus live with the datagen tests.
        from test_datagen import _golden_corpus
        from petelkit.datagen import squad_to_json

        fixed = _golden_corpus()
        assert emit_conll(fixed) == (GOLDEN_DIR / "corpus.conll").read_text("utf-8")
        assert squad_to_json(emit_squad(fixed)) == (
            GOLDEN_DIR / "corpus.squad.json"
        ).read_text("utf-8")


def test_rejection_renormalization_and_termination():
    with criterion("rejection renormalization (1000 steps, 1e-12) + termination"):
        rng = random.Random(31337)
        steps = 0
        while steps < 1000:
            n = rng.randint(2, 9)
            raw = [rng.random() + 1e-3 for _ in range(n)]
            total = sum(raw)
            session = _synthetic_session(
                {f"c{i:02d}": raw[i] / total for i in range(n)}
            )
            budget = sum(len(session.petel.slot(k).candidates) for k in SLOT_ORDER)
            proposals = 0
            while session.status == "in_progress":
                slot = session.current_slot()
                if slot is None:
                    break
                before = session.petel.slot(slot).as_mapping()
                candidate = propose_top(session)
                proposals += 1
                assert proposals <= budget
                if rng.random() < 0.25:
                    feedback(session, slot, candidate.id, "accept")
                    continue
                p_r = before[candidate.id]
                feedback(session, slot, candidate.id, "reject")
                if session.status == "exhausted":
                    break
                after = session.petel.slot(slot).as_mapping()
                survivors_before = sorted(
                    (cid for cid in before if cid != candidate.id and before[cid] > 0),
                    key=lambda cid: (-before[cid], cid),
                )
                survivors_after = sorted(
                    (cid for cid in after if after[cid] > 0),
                    key=lambda cid: (-after[cid], cid),
                )
                assert survivors_before == survivors_after
                for cid in survivors_before:
                    assert abs(after[cid] - before[cid] / (1.0 - p_r)) <= 1e-12
                steps += 1
            assert session.status in ("complete", "exhausted")


def _posterior_fixture():
    rng = random.Random(2024)
    candidate_ids, surfaces, phrases, vocab = _random_instance(rng)
    store = tiny_store(vocab)
    petel = make_petel(candidate_ids, surfaces=surfaces)
    return candidate_ids, surfaces, phrases, vocab, store, petel


def test_scale_invariance(monkeypatch):
    with criterion("scale invariance (confidences and similarities, bit-identical)"):
        candidate_ids, surfaces, phrases, vocab, store, petel = _posterior_fixture()
        extraction = extraction_of(SlotKind.TARGET_ATTRIBUTE, phrases)
        base = slot_posterior("q", SlotKind.TARGET_ATTRIBUTE, petel, extraction, store)

        rng = random.Random(5)
        # Powers of two are exact in binary floating point, so any such
        # c > 0 must leave every probability bit-identical.
        for _ in range(8):
            c = 2.0 ** rng.randint(-20, 20)
            scaled = ExtractionResult.from_phrases(
                SlotKind.TARGET_ATTRIBUTE,
                [replace(p, confidence=p.confidence * c) for p in extraction.phrases],
            )
            posterior = slot_posterior(
                "q", SlotKind.TARGET_ATTRIBUTE, petel, scaled, store
            )
            assert posterior.probs == base.probs

            original = candidate_similarity
            monkeypatch.setattr(
                ranker_module,
                "candidate_similarity",
                lambda cand, text, st, metric="cosine", _c=c: _c
                * original(cand, text, st, metric),
            )
            posterior = slot_posterior(
                "q", SlotKind.TARGET_ATTRIBUTE, petel, extraction, store
            )
            monkeypatch.setattr(ranker_module, "candidate_similarity", original)
            assert posterior.probs == base.probs

        # Arbitrary positive scales agree to within rounding noise.
        for c in (0.7371, 3.9, 1.1e-4, 817.3):
            scaled = ExtractionResult.from_phrases(
                SlotKind.TARGET_ATTRIBUTE,
                [replace(p, confidence=p.confidence * c) for p in extraction.phrases],
            )
            posterior = slot_posterior(
                "q", SlotKind.TARGET_ATTRIBUTE, petel, scaled, store
            )
            for cid in candidate_ids:
                assert abs(posterior.probs[cid] - base.probs[cid]) <= 1e-12


def test_wilcoxon_exact_oracle():
    with criterion("wilcoxon exact p == 2^n enumeration (100 cases, 1e-12) + symmetry"):
        rng = random.Random(8888)
        checked = 0
        while checked < 100:
            n = rng.randint(1, 10)
            a = [round(rng.uniform(-3, 3), 2) for _ in range(n)]
            b = [round(rng.uniform(-3, 3), 2) for _ in range(n)]
            if all(x == y for x, y in zip(a, b)):
                continue
            result = wilcoxon_signed_rank(a, b)
            w_obs, p_enum, n_eff = wilcoxon_enum_p(a, b)
            assert result.n_effective == n_eff
            assert result.w == w_obs
            assert abs(result.p_two_sided - p_enum) <= 1e-12
            mirrored = wilcoxon_signed_rank(b, a)
            assert mirrored.p_two_sided == result.p_two_sided
            checked += 1


def test_mrr_arithmetic():
    with criterion("MRR arithmetic ([1,2,4] -> 0.583333, all-ones -> 1.0)"):
        assert abs(mrr([1, 2, 4]) - 0.583333) <= 1e-6 + 1e-9
        assert mrr([1, 2, 4]) == pytest.approx(0.5833333333333334, abs=1e-9)
        assert mrr([1] * 17) == 1.0


def test_service_persistence_and_concurrency(tmp_path):
    with criterion("service persistence (restart identical) + single feedback winner"):
        import threading

        from fastapi.testclient import TestClient

        from petelkit.lexicon import fixture_vectors_path
        from petelkit.service import ServiceConfig, create_app

        config = ServiceConfig(
            data_dir=str(tmp_path / "data"),
            embeddings_path=str(fixture_vectors_path()),
        )
        client = TestClient(create_app(config))
        schema_doc = json.loads(fixture_schema_path("flight_delay").read_text())
        schema_id = client.post("/schemas", json=schema_doc).json()["id"]
        view = client.post(
            "/sessions",
            json={"schema_id": schema_id, "utterance": FLAGSHIP_UTTERANCE},
        ).json()
        session_id = view["id"]
        proposal = client.get(f"/sessions/{session_id}/proposal").json()
        client.post(
            f"/sessions/{session_id}/feedback",
            json={
                "slot": proposal["slot"],
                "candidate": proposal["candidate"]["id"],
                "verdict": "reject",
            },
        )
        before = client.get(f"/sessions/{session_id}").json()

        # Restart: a fresh app over the same data directory sees identical state.
        restarted = TestClient(create_app(config))
        after = restarted.get(f"/sessions/{session_id}").json()
        assert after == before

        # Concurrency: two conflicting posts, exactly one winner.
        app = create_app(config)
        shared = TestClient(app)
        proposal = shared.get(f"/sessions/{session_id}/proposal").json()
        body = {
            "slot": proposal["slot"],
            "candidate": proposal["candidate"]["id"],
            "verdict": "reject",
            "version": proposal["version"],
        }
        results = []
        barrier = threading.Barrier(2)

        def post():
            barrier.wait()
            with TestClient(app) as local:
                results.append(
                    local.post(
                        f"/sessions/{session_id}/feedback", json=body
                    ).status_code
                )

        threads = [threading.Thread(target=post) for _ in range(2)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert sorted(results) == [200, 409]
