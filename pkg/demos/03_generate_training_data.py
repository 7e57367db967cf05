"""Generate annotated training data from slot templates.

Every template blank is filled with every surface form of its slot:
attribute placeholders take the name rendering plus each synonym,
operator placeholders take the keyword lexicon. The same corpus then
serializes to both span-annotation formats, and an 8:2 seeded split
keeps the output reproducible.
"""

from petelkit import emit_conll, emit_squad, fill_templates, load_schema, train_test_split
from petelkit.datagen import parse_template
from petelkit.lexicon import fixture_schema_path

schema = load_schema(fixture_schema_path("flight_delay"))

templates = [
    parse_template("Predict the average {target_attribute} for each airline tomorrow.", 1),
    parse_template("Forecast the {aggregation} {target_attribute} next week.", 2),
]
corpus = fill_templates(templates, schema)
print(f"{len(templates)} templates x surface forms -> {len(corpus)} annotated utterances\n")

print("one annotated utterance:")
sample = corpus[13]
print(f"  text:   {sample.text}")
for label in sample.labels:
    print(f"  label:  {label.slot.value} -> {sample.text[label.start:label.end]!r} "
          f"at [{label.start}, {label.end})")

print("\nline-per-token BIO rendering (first utterance):")
print("\n".join(emit_conll(corpus[:1]).splitlines()))

squad = emit_squad(corpus[:1])
qa = squad["data"][0]["paragraphs"][0]["qas"][0]
print("\nfirst question/answer entry:")
print(f"  question:     {qa['question']}")
print(f"  answer:       {qa['answers'][0]['text']!r}")
print(f"  answer_start: {qa['answers'][0]['answer_start']}")

train, test = train_test_split(corpus, 0.8, seed=42)
print(f"\n8:2 split -> {len(train)} train / {len(test)} test (seed 42, reproducible)")
