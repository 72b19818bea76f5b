"""Compile a Schema plus input text into one marker-token sequence.

Layout, with every task prompt terminated by [SEP] and the text region last::

    [P] entities ( [E] person [E] location ) [SEP]
    [P] sentiment ( [L] positive [L] negative ) [SEP]
    [P] product ( [C] name [C] price ) [SEP]
    <text tokens>

Entity/field/label descriptions follow their owner after a ":" token; field
choice constraints render as "[ opt | opt ]". The plan records a binding for
every marker position so downstream heads can find the hidden state that
belongs to each schema element.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Any

from .errors import ContextOverflow, EmptyLabel, SchemaInvalid
from .schema import (
    ENTITY_TASK_NAME,
    ClassificationSpec,
    EntitySpec,
    Schema,
    StructureSpec,
    validate_schema,
)
from .tokenizer import C_ID, E_ID, L_ID, P_ID, SEP_ID, TokenSeq, Vocabulary, tokenize

#: Plain-text tokens the prompt layout relies on. Corpus builders must make
#: sure these end up in the vocabulary.
PROMPT_SUGAR_TOKENS = (ENTITY_TASK_NAME, "(", ")", "[", "]", "|", ":")

DEFAULT_MAX_LEN = 512


@dataclass(frozen=True)
class Binding:
    """Marker position -> owning schema element.

    ``index`` is the element's position within its task (entity, field or
    label order); it is 0 for P bindings.
    """

    position: int
    role: str  # "P" | "E" | "C" | "L"
    task: str
    index: int = 0


@dataclass(frozen=True)
class PromptPlan:
    ids: tuple[int, ...]
    bindings: tuple[Binding, ...]
    text_start: int
    text_len: int
    source_offsets: tuple[tuple[int, int], ...]
    source_text: str

    def __len__(self) -> int:
        return len(self.ids)


def _word_ids(vocab: Vocabulary, text: str) -> list[int]:
    return list(tokenize(vocab, text).ids)


def compile_entity_prompt(
    entities: tuple[EntitySpec, ...] | list[EntitySpec], vocab: Vocabulary
) -> tuple[list[int], list[Binding]]:
    """Render the entity task prompt; positions are segment-relative."""
    if not entities:
        raise EmptyLabel("entity task needs at least one entity type")
    ids = [P_ID, *_word_ids(vocab, ENTITY_TASK_NAME), *_word_ids(vocab, "(")]
    bindings = [Binding(0, "P", ENTITY_TASK_NAME)]
    for i, ent in enumerate(entities):
        label_ids = _word_ids(vocab, ent.label)
        if not label_ids:
            raise EmptyLabel(f"entity label {ent.label!r} produces no tokens")
        bindings.append(Binding(len(ids), "E", ENTITY_TASK_NAME, i))
        ids.append(E_ID)
        ids.extend(label_ids)
        if ent.description is not None:
            ids.extend(_word_ids(vocab, ":"))
            ids.extend(_word_ids(vocab, ent.description))
    ids.extend(_word_ids(vocab, ")"))
    return ids, bindings


def compile_structure_prompt(
    spec: StructureSpec, vocab: Vocabulary
) -> tuple[list[int], list[Binding]]:
    """Render a structure task prompt; one C binding per field."""
    ids = [P_ID, *_word_ids(vocab, spec.parent_name), *_word_ids(vocab, "(")]
    bindings = [Binding(0, "P", spec.parent_name)]
    for i, f in enumerate(spec.fields):
        bindings.append(Binding(len(ids), "C", spec.parent_name, i))
        ids.append(C_ID)
        ids.extend(_word_ids(vocab, f.name))
        if f.choices is not None:
            ids.extend(_word_ids(vocab, "["))
            for j, opt in enumerate(f.choices):
                if j:
                    ids.extend(_word_ids(vocab, "|"))
                ids.extend(_word_ids(vocab, opt))
            ids.extend(_word_ids(vocab, "]"))
        if f.description is not None:
            ids.extend(_word_ids(vocab, ":"))
            ids.extend(_word_ids(vocab, f.description))
    ids.extend(_word_ids(vocab, ")"))
    return ids, bindings


def compile_classification_prompt(
    spec: ClassificationSpec, vocab: Vocabulary
) -> tuple[list[int], list[Binding]]:
    """Render a classification task prompt; one L binding per label."""
    ids = [P_ID, *_word_ids(vocab, spec.task_name), *_word_ids(vocab, "(")]
    bindings = [Binding(0, "P", spec.task_name)]
    for i, lab in enumerate(spec.labels):
        bindings.append(Binding(len(ids), "L", spec.task_name, i))
        ids.append(L_ID)
        ids.extend(_word_ids(vocab, lab.label))
        if lab.description is not None:
            ids.extend(_word_ids(vocab, ":"))
            ids.extend(_word_ids(vocab, lab.description))
    ids.extend(_word_ids(vocab, ")"))
    return ids, bindings


def compose_tasks(
    schema: Schema, text: str, vocab: Vocabulary, max_len: int = DEFAULT_MAX_LEN
) -> PromptPlan:
    """Concatenate every task prompt (schema order), [SEP]-terminated, then text."""
    violations = validate_schema(schema)
    if violations:
        raise SchemaInvalid(violations)

    segments: list[tuple[list[int], list[Binding]]] = []
    if schema.entity_task is not None:
        segments.append(compile_entity_prompt(schema.entity_task, vocab))
    for c in schema.classification_tasks:
        segments.append(compile_classification_prompt(c, vocab))
    for st in schema.structure_tasks:
        segments.append(compile_structure_prompt(st, vocab))

    ids: list[int] = []
    bindings: list[Binding] = []
    for seg_ids, seg_bindings in segments:
        offset = len(ids)
        bindings.extend(replace(b, position=b.position + offset) for b in seg_bindings)
        ids.extend(seg_ids)
        ids.append(SEP_ID)

    text_seq = tokenize(vocab, text)
    needed = len(ids) + len(text_seq)
    if needed > max_len:
        raise ContextOverflow(needed, max_len)

    return PromptPlan(
        ids=tuple(ids) + text_seq.ids,
        bindings=tuple(bindings),
        text_start=len(ids),
        text_len=len(text_seq),
        source_offsets=text_seq.offsets,
        source_text=text,
    )


def plan_to_dict(plan: PromptPlan, vocab: Vocabulary) -> dict[str, Any]:
    """Readable JSON form of a plan, used by the CLI debug dump and golden tests."""
    return {
        "ids": list(plan.ids),
        "tokens": [vocab.token_for(i) for i in plan.ids],
        "bindings": [
            {"position": b.position, "role": b.role, "task": b.task, "index": b.index}
            for b in plan.bindings
        ],
        "text_start": plan.text_start,
        "text_len": plan.text_len,
        "source_offsets": [list(o) for o in plan.source_offsets],
    }
