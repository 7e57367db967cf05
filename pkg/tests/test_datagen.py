import json
import random
from pathlib import Path

import pytest

from petelkit import (
    emit_conll,
    emit_squad,
    fill_templates,
    load_schema,
    load_templates,
    parse_conll,
    train_test_split,
)
from petelkit.datagen import AnnotatedUtterance, SlotLabel, parse_template, squad_to_json
from petelkit.errors import AlignmentError, TemplateError
from petelkit.lexicon import default_templates_path, load_operator_lexicon
from petelkit.petel import SlotKind

GOLDEN_DIR = Path(__file__).parent / "golden"

GOLDEN_SCHEMA = {
    "name": "golden",
    "attributes": [
        {"name": "Arrival_delay", "type": "numerical", "synonyms": ["landing delay"]},
        {"name": "Airline", "type": "entity", "synonyms": []},
    ],
}

GOLDEN_TEMPLATES = [
    "Predict the average {target_attribute} for each airline tomorrow.",
    "Forecast the {aggregation} {target_attribute} next week.",
]


def _golden_corpus():
    schema = load_schema(GOLDEN_SCHEMA)
    templates = [parse_template(t, i + 1) for i, t in enumerate(GOLDEN_TEMPLATES)]
    return fill_templates(templates, schema)


def test_parse_template_validation():
    template = parse_template("Predict {target_attribute} by {aggregation}.", 1)
    assert template.slots == (SlotKind.TARGET_ATTRIBUTE, SlotKind.AGGREGATION)
    with pytest.raises(TemplateError, match="unknown placeholder"):
        parse_template("Predict the {time_granularity}.", 3)
    with pytest.raises(TemplateError, match="duplicate"):
        parse_template("{aggregation} and {aggregation}", 4)
    with pytest.raises(TemplateError, match="no slot placeholder"):
        parse_template("Predict the weather.", 5)


def test_load_templates_skips_comments(tmp_path):
    path = tmp_path / "t.txt"
    path.write_text("# comment\n\nPredict {target_attribute}.\n")
    templates = load_templates(path)
    assert len(templates) == 1
    assert templates[0].line_no == 3


def test_fill_cardinality_simple():
    schema = load_schema(
        {
            "name": "t",
            "attributes": [
                {"name": "a_x", "type": "numerical", "synonyms": ["alpha value"]},
                {"name": "b_y", "type": "numerical", "synonyms": ["beta value"]},
            ],
        }
    )
    templates = [parse_template("Predict {target_attribute}.", 1)]
    corpus = fill_templates(templates, schema)
    # 1 template x 2 attributes x (name + 1 synonym) = 4
    assert len(corpus) == 4


def test_fill_spans_slice_exactly(fd_schema):
    templates = [
        parse_template("Predict the average {target_attribute} for each airline tomorrow.", 1)
    ]
    corpus = fill_templates(templates, fd_schema)
    filled = [u for u in corpus if "arrival delay" in u.text]
    assert filled
    for utterance in corpus:
        utterance.validate()
        for label in utterance.labels:
            assert utterance.text[label.start : label.end] == label.fill


def test_fill_operator_slot_uses_lexicon(fd_schema):
    templates = [parse_template("Show the {aggregation} value.", 1)]
    corpus = fill_templates(templates, fd_schema)
    fills = {u.labels[0].fill for u in corpus}
    assert "maximum" in fills
    lexicon = load_operator_lexicon()
    expected = {kw for op in ("count_agg", "sum_agg", "avg_agg", "min_agg", "max_agg", "majority_agg") for kw in lexicon[op]}
    assert fills == expected
    maximum = next(u for u in corpus if u.labels[0].fill == "maximum")
    assert maximum.labels[0].slot == SlotKind.AGGREGATION
    start, end = maximum.labels[0].start, maximum.labels[0].end
    assert maximum.text[start:end] == "maximum"


def test_emit_conll_bio_encoding():
    utterance = AnnotatedUtterance(
        text="predict arrival delay",
        labels=(SlotLabel(SlotKind.TARGET_ATTRIBUTE, 8, 21, "arrival delay"),),
    )
    text = emit_conll([utterance])
    assert text.splitlines() == [
        "predict O",
        "arrival B-TARGET_ATTRIBUTE",
        "delay I-TARGET_ATTRIBUTE",
    ]


def test_emit_conll_unlabeled_all_o():
    utterance = AnnotatedUtterance(text="just words here", labels=())
    lines = emit_conll([utterance]).splitlines()
    assert all(line.endswith(" O") for line in lines)


def test_emit_conll_blank_line_between_utterances():
    corpus = [
        AnnotatedUtterance(text="alpha", labels=()),
        AnnotatedUtterance(text="beta", labels=()),
    ]
    assert emit_conll(corpus) == "alpha O\n\nbeta O\n"


def test_emit_conll_misaligned_span_reports_index():
    utterance = AnnotatedUtterance(
        text="predict arrivals", labels=(SlotLabel(SlotKind.TARGET_ATTRIBUTE, 8, 13, "arriv"),)
    )
    with pytest.raises(AlignmentError, match="utterance 0"):
        emit_conll([utterance])


def test_conll_round_trip_and_bio_validity(fd_schema):
    templates = load_templates(default_templates_path())
    corpus = fill_templates(templates[:3], fd_schema)
    text = emit_conll(corpus)
    parsed = parse_conll(text)
    assert len(parsed) == len(corpus)
    for utterance, tokens in zip(corpus, parsed):
        rebuilt = emit_conll([utterance]).splitlines()
        assert [f"{tok} {tag}" for tok, tag in tokens] == rebuilt
        previous = "O"
        for _, tag in tokens:
            if tag.startswith("I-"):
                assert previous.endswith(tag[2:]) and previous != "O"
            previous = tag


def test_emit_squad_offsets_and_grouping():
    corpus = _golden_corpus()
    document = emit_squad(corpus)
    paragraphs = document["data"][0]["paragraphs"]
    assert len(paragraphs) == len(corpus)
    qas_total = 0
    for paragraph in paragraphs:
        for qa in paragraph["qas"]:
            qas_total += 1
            answer = qa["answers"][0]
            start = answer["answer_start"]
            assert (
                paragraph["context"][start : start + len(answer["text"])]
                == answer["text"]
            )
    # Independent walker count: one qa per label.
    expected = sum(len(u.labels) for u in corpus)
    assert qas_total == expected


def test_emit_squad_two_labels_one_paragraph():
    corpus = [
        AnnotatedUtterance(
            text="sum the arrival delay",
            labels=(
                SlotLabel(SlotKind.AGGREGATION, 0, 3, "sum"),
                SlotLabel(SlotKind.TARGET_ATTRIBUTE, 8, 21, "arrival delay"),
            ),
        )
    ]
    document = emit_squad(corpus)
    paragraphs = document["data"][0]["paragraphs"]
    assert len(paragraphs) == 1
    assert len(paragraphs[0]["qas"]) == 2


def test_train_test_split_sizes():
    corpus = _golden_corpus()[:10]
    train, test = train_test_split(corpus, 0.8, seed=1)
    assert (len(train), len(test)) == (8, 2)
    one_train, one_test = train_test_split(corpus[:1], 0.8, seed=1)
    assert (len(one_train), len(one_test)) == (1, 0)


def test_train_test_split_deterministic():
    corpus = _golden_corpus()
    first = train_test_split(corpus, 0.8, seed=42)
    second = train_test_split(corpus, 0.8, seed=42)
    assert first == second
    different = train_test_split(corpus, 0.8, seed=43)
    assert first != different


def test_train_test_split_validation():
    with pytest.raises(ValueError, match="empty"):
        train_test_split([], 0.8)
    with pytest.raises(ValueError, match="ratio"):
        train_test_split(_golden_corpus(), 1.2)


def test_cardinality_law_randomized():
    rng = random.Random(20240811)
    for _ in range(100):
        n_attrs = rng.randint(1, 6)
        attributes = []
        for i in range(n_attrs):
            n_syn = rng.randint(0, 3)
            attributes.append(
                {
                    "name": f"attr_{i}",
                    "type": "numerical",
                    "synonyms": [f"synonym {i} {j}" for j in range(n_syn)],
                }
            )
        schema = load_schema({"name": "r", "attributes": attributes})
        n_templates = rng.randint(1, 4)
        templates = [
            parse_template(f"Template {t} mentions {{target_attribute}} here.", t + 1)
            for t in range(n_templates)
        ]
        corpus = fill_templates(templates, schema)
        expected = n_templates * sum(
            1 + len(a["synonyms"]) for a in attributes
        )
        assert len(corpus) == expected


def test_golden_conll_byte_equality():
    corpus = _golden_corpus()
    text = emit_conll(corpus)
    golden = GOLDEN_DIR / "corpus.conll"
    if not golden.exists():
        golden.parent.mkdir(exist_ok=True)
        golden.write_text(text, "utf-8")
    assert text == golden.read_text("utf-8")


def test_golden_squad_byte_equality():
    corpus = _golden_corpus()
    text = squad_to_json(emit_squad(corpus))
    golden = GOLDEN_DIR / "corpus.squad.json"
    if not golden.exists():
        golden.parent.mkdir(exist_ok=True)
        golden.write_text(text, "utf-8")
    assert text == golden.read_text("utf-8")
    json.loads(text)
