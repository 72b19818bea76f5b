"""Deterministic templated training data over small vocabularies.

Every corpus starts with a fixed set of anchor examples (the sentences the
acceptance tests extract from, plus coverage anchors for instance counts 0-3,
list fields and multi-label tasks) followed by seeded random draws from the
same templates. All gold spans are produced by an assembler that tracks
character offsets, so they are token-aligned by construction.
"""
from __future__ import annotations

import json
import random
from pathlib import Path
from typing import Iterable

from .prompt import PROMPT_SUGAR_TOKENS
from .schema import (
    ClassificationSpec,
    EntitySpec,
    FieldKind,
    FieldSpec,
    LabelSpec,
    Schema,
    StructureSpec,
)
from .training import Example

PERSONS = ["John", "Sarah", "Tom", "Alice", "Steve Jobs", "Maria", "David", "Emma Stone"]
LOCATIONS = ["Paris", "London", "Berlin", "Tokyo", "Madrid", "New York"]
PRODUCTS = ["iPhone", "Galaxy", "Pixel", "MacBook", "Surface", "Kindle", "ThinkPad", "Walkman"]
PRICES = ["$999", "$899", "$499", "$1299", "$249", "$59", "$2199", "$149"]
ITEMS = ["phone", "laptop", "camera", "monitor", "keyboard", "tablet"]

NER_SCHEMA = Schema(entity_task=(EntitySpec("person"), EntitySpec("location")))

PRODUCT_SCHEMA = Schema(
    structure_tasks=(StructureSpec("product", (FieldSpec("name"), FieldSpec("price"))),)
)

SENTIMENT_TASK = ClassificationSpec(
    "sentiment", (LabelSpec("positive"), LabelSpec("negative"), LabelSpec("neutral"))
)
SENTIMENT_SCHEMA = Schema(classification_tasks=(SENTIMENT_TASK,))

COMPOSED_SCHEMA = Schema(
    entity_task=(EntitySpec("person"), EntitySpec("product")),
    classification_tasks=(SENTIMENT_TASK,),
)

TOPICS_SCHEMA = Schema(
    classification_tasks=(
        ClassificationSpec(
            "topics",
            (LabelSpec("tech"), LabelSpec("sports"), LabelSpec("finance")),
            multi_label=True,
            threshold=0.5,
        ),
    )
)

ORDER_SCHEMA = Schema(
    structure_tasks=(StructureSpec("order", (FieldSpec("items", kind=FieldKind.LIST),)),)
)

SENTIMENT_TEXTS = {
    "positive": [
        "This movie is amazing!",
        "I love this phone.",
        "The concert was fantastic.",
        "What a wonderful day.",
    ],
    "negative": [
        "This movie is terrible.",
        "I hate this phone.",
        "The food was awful.",
        "What a disappointing game.",
    ],
    "neutral": [
        "The meeting is on Monday.",
        "The report has ten pages.",
        "The train leaves at noon.",
    ],
}

TOPICS_TEXTS = [
    ("The new laptop shipped today.", ["tech"]),
    ("The team won the final.", ["sports"]),
    ("The stocks fell sharply.", ["finance"]),
    ("The new laptop lifted the stocks.", ["tech", "finance"]),
    ("The team signed a sponsorship deal.", ["sports", "finance"]),
    ("The stadium installed new robots.", ["tech", "sports"]),
]

NO_PRODUCT_TEXTS = [
    "The store is closed today.",
    "Nothing is on sale right now.",
    "The shelves are empty.",
]

COMPOSED_VERBS = [("loved", "positive"), ("hated", "negative"), ("bought", "neutral")]


def _mark(piece: str) -> tuple[str, str]:
    return ("mark", piece)


def _assemble(*parts: str | tuple[str, str]) -> tuple[str, list[tuple[int, int]]]:
    """Concatenate parts; return the text and the span of every marked part."""
    chunks: list[str] = []
    spans: list[tuple[int, int]] = []
    pos = 0
    for part in parts:
        if isinstance(part, tuple):
            _, piece = part
            spans.append((pos, pos + len(piece)))
        else:
            piece = part
        chunks.append(piece)
        pos += len(piece)
    return "".join(chunks), spans


def _ner_example(person: str, location: str, template: int = 0, second: str | None = None) -> Example:
    if template == 0:
        text, spans = _assemble(_mark(person), " works in ", _mark(location))
        people = [spans[0]]
    elif template == 1:
        text, spans = _assemble(_mark(person), " lives in ", _mark(location), ".")
        people = [spans[0]]
    elif template == 2:
        text, spans = _assemble(_mark(person), " visited ", _mark(location), " yesterday.")
        people = [spans[0]]
    else:
        text, spans = _assemble(
            _mark(person), " met ", _mark(second or "Tom"), " in ", _mark(location), "."
        )
        people = [spans[0], spans[1]]
    loc = spans[-1]
    return Example(
        text=text,
        schema=NER_SCHEMA,
        entities=[("person", s, e) for s, e in people] + [("location", loc[0], loc[1])],
    )


def _product_example(names: list[str], prices: list[str]) -> Example:
    parts: list[str | tuple[str, str]] = []
    name_spans_at: list[int] = []
    for i, (name, price) in enumerate(zip(names, prices)):
        if i:
            parts.append(" ")
        parts.extend([_mark(name), " costs " if i % 2 == 0 else " is ", _mark(price), "."])
    text, spans = _assemble(*parts)
    instances = [
        {"name": [spans[2 * i]], "price": [spans[2 * i + 1]]} for i in range(len(names))
    ]
    return Example(text=text, schema=PRODUCT_SCHEMA, structures={"product": instances})


def _no_product_example(text: str) -> Example:
    return Example(text=text, schema=PRODUCT_SCHEMA, structures={"product": []})


def _sentiment_example(label: str, text: str) -> Example:
    return Example(text=text, schema=SENTIMENT_SCHEMA, classifications={"sentiment": [label]})


def _topics_example(text: str, labels: list[str]) -> Example:
    return Example(text=text, schema=TOPICS_SCHEMA, classifications={"topics": labels})


def _composed_example(person: str, product: str, verb: str, sentiment: str) -> Example:
    text, spans = _assemble(_mark(person), f" {verb} the ", _mark(product))
    return Example(
        text=text,
        schema=COMPOSED_SCHEMA,
        entities=[("person", *spans[0]), ("product", *spans[1])],
        classifications={"sentiment": [sentiment]},
    )


def _order_example(items: list[str]) -> Example:
    parts: list[str | tuple[str, str]] = ["The order includes a ", _mark(items[0])]
    for item in items[1:-1]:
        parts.extend([", a ", _mark(item)])
    parts.extend([" and a ", _mark(items[-1]), "."])
    text, spans = _assemble(*parts)
    return Example(
        text=text,
        schema=ORDER_SCHEMA,
        structures={"order": [{"items": list(spans)}]},
    )


def _anchors() -> list[Example]:
    return [
        _product_example(["iPhone", "Galaxy"], ["$999", "$899"]),
        _ner_example("John", "Paris", template=0),
        _sentiment_example("positive", "This movie is amazing!"),
        _composed_example("Steve Jobs", "iPhone", "loved", "positive"),
        _no_product_example(NO_PRODUCT_TEXTS[0]),
        _product_example(["Pixel"], ["$499"]),
        _product_example(["MacBook", "Surface", "Kindle"], ["$1299", "$249", "$59"]),
        _order_example(["phone", "laptop", "camera"]),
        _topics_example(*TOPICS_TEXTS[3]),
    ]


def generate_synthetic(seed: int, n: int) -> list[Example]:
    """Deterministic corpus of n examples; anchors first, then seeded draws."""
    if n < 1:
        raise ValueError("n must be at least 1")
    rng = random.Random(seed)
    out = _anchors()[:n]

    kinds = ["ner", "product", "sentiment", "topics", "composed", "order"]
    weights = [0.20, 0.36, 0.16, 0.08, 0.14, 0.06]
    while len(out) < n:
        kind = rng.choices(kinds, weights)[0]
        if kind == "ner":
            template = rng.randrange(4)
            person, second = rng.sample(PERSONS, 2)
            out.append(_ner_example(person, rng.choice(LOCATIONS), template, second))
        elif kind == "product":
            k = rng.choices([0, 1, 2, 3], [0.12, 0.22, 0.33, 0.33])[0]
            if k == 0:
                out.append(_no_product_example(rng.choice(NO_PRODUCT_TEXTS)))
            else:
                out.append(_product_example(rng.sample(PRODUCTS, k), rng.sample(PRICES, k)))
        elif kind == "sentiment":
            label = rng.choice(list(SENTIMENT_TEXTS))
            out.append(_sentiment_example(label, rng.choice(SENTIMENT_TEXTS[label])))
        elif kind == "topics":
            out.append(_topics_example(*rng.choice(TOPICS_TEXTS)))
        elif kind == "composed":
            verb, sentiment = rng.choice(COMPOSED_VERBS)
            out.append(_composed_example(rng.choice(PERSONS), rng.choice(PRODUCTS), verb, sentiment))
        else:
            out.append(_order_example(rng.sample(ITEMS, rng.choice([2, 3]))))
    return out


def schema_surface_strings(schema: Schema) -> list[str]:
    """Every string the prompt compiler will tokenize for this schema."""
    out: list[str] = []
    if schema.entity_task is not None:
        for e in schema.entity_task:
            out.append(e.label)
            if e.description:
                out.append(e.description)
    for c in schema.classification_tasks:
        out.append(c.task_name)
        for lab in c.labels:
            out.append(lab.label)
            if lab.description:
                out.append(lab.description)
    for st in schema.structure_tasks:
        out.append(st.parent_name)
        for f in st.fields:
            out.append(f.name)
            out.extend(f.choices or ())
            if f.description:
                out.append(f.description)
    return out


def vocab_corpus(examples: Iterable[Example]) -> list[str]:
    """Strings to build the vocabulary from: texts, prompt surfaces and sugar."""
    corpus = [" ".join(PROMPT_SUGAR_TOKENS)]
    for ex in examples:
        corpus.append(ex.text)
        corpus.extend(schema_surface_strings(ex.schema))
    return corpus


def write_jsonl(examples: Iterable[Example], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for ex in examples:
            fh.write(json.dumps(ex.to_dict(), ensure_ascii=False) + "\n")


def read_jsonl(path: str | Path) -> list[Example]:
    examples = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                examples.append(Example.from_dict(json.loads(line)))
    return examples
