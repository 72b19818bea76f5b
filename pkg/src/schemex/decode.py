"""Turn head outputs into final extraction results.

``run_schema`` executes an entire composed schema against a text in exactly
one encoder forward pass (observable through the model's ``encode_calls``
counter) and decodes every declared task from the shared hidden states.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np
import torch

from .errors import SchemaInvalid
from .heads import (
    SpanCandidate,
    classification_logits,
    entity_scores,
    enumerate_spans,
    extract_prompt_embeds,
    occurrence_conditioned_fields,
    predict_count,
    span_representations,
)
from .model import ExtractionModel
from .prompt import compose_tasks
from .schema import ClassificationSpec, FieldKind, Schema, StructureSpec, validate_schema

RESULT_FORMAT_VERSION = 1

DEFAULT_THRESHOLD = 0.5


@dataclass
class EntityMatch:
    text: str
    char_start: int
    char_end: int
    score: float


@dataclass
class FieldValue:
    text: str
    char_start: int
    char_end: int
    score: float


#: One decoded structure occurrence: field name -> value (Str) or values (List).
StructureInstance = dict[str, "FieldValue | list[FieldValue]"]


@dataclass
class ClassificationOutcome:
    labels: list[str]
    probabilities: dict[str, float]


@dataclass
class ExtractionResult:
    """Per-task decoded output; sections exist only for declared tasks."""

    entities: dict[str, list[EntityMatch]] | None = None
    classifications: dict[str, ClassificationOutcome] | None = None
    structures: dict[str, list[StructureInstance]] | None = None

    def to_dict(self) -> dict[str, Any]:
        doc: dict[str, Any] = {"format_version": RESULT_FORMAT_VERSION}
        if self.entities is not None:
            doc["entities"] = {
                label: [_span_dict(m) for m in matches]
                for label, matches in self.entities.items()
            }
        if self.classifications is not None:
            doc["classifications"] = {
                task: {"labels": out.labels, "probabilities": out.probabilities}
                for task, out in self.classifications.items()
            }
        if self.structures is not None:
            doc["structures"] = {
                name: [
                    {
                        fname: [_span_dict(v) for v in val] if isinstance(val, list) else _span_dict(val)
                        for fname, val in instance.items()
                    }
                    for instance in instances
                ]
                for name, instances in self.structures.items()
            }
        return doc


def _span_dict(v: EntityMatch | FieldValue) -> dict[str, Any]:
    return {"text": v.text, "start": v.char_start, "end": v.char_end, "score": v.score}


def decode_entities(
    probs: torch.Tensor,
    spans: list[SpanCandidate],
    labels: list[str],
    source: str,
    threshold: float = DEFAULT_THRESHOLD,
) -> dict[str, list[EntityMatch]]:
    """Every (span, type) pair scoring above threshold; overlaps are kept."""
    p = probs.detach().numpy()
    out: dict[str, list[EntityMatch]] = {}
    for j, label in enumerate(labels):
        hits = [
            EntityMatch(
                text=source[c.char_start : c.char_end],
                char_start=c.char_start,
                char_end=c.char_end,
                score=float(p[i, j]),
            )
            for i, c in enumerate(spans)
            if p[i, j] > threshold
        ]
        hits.sort(key=lambda m: (m.char_start, -m.score, m.char_end))
        out[label] = hits
    return out


def decode_structures(
    k_hat: int,
    scores: torch.Tensor,  # [k, m, n_spans] match probabilities
    spans: list[SpanCandidate],
    spec: StructureSpec,
    source: str,
    threshold: float = DEFAULT_THRESHOLD,
) -> list[StructureInstance]:
    """Per-occurrence field values; occurrences with no field at all are dropped."""
    p = scores.detach().numpy()
    k = min(k_hat, p.shape[0])
    allowed_per_field = [_allowed_span_indices(f, spans, source) for f in spec.fields]

    instances: list[StructureInstance] = []
    for i in range(k):
        instance: StructureInstance = {}
        for j, f in enumerate(spec.fields):
            candidates = [
                (idx, float(p[i, j, idx]))
                for idx in allowed_per_field[j]
                if p[i, j, idx] > threshold
            ]
            if not candidates:
                continue
            if f.kind is FieldKind.STR:
                idx, score = min(
                    candidates,
                    key=lambda c: (-c[1], spans[c[0]].char_start, spans[c[0]].char_end),
                )
                instance[f.name] = _field_value(spans[idx], score, source)
            else:
                candidates.sort(key=lambda c: (spans[c[0]].char_start, spans[c[0]].char_end))
                instance[f.name] = [
                    _field_value(spans[idx], score, source) for idx, score in candidates
                ]
        if instance:
            instances.append(instance)
    return instances


def _allowed_span_indices(f, spans: list[SpanCandidate], source: str) -> list[int]:
    if f.choices is None:
        return list(range(len(spans)))
    options = {opt.lower() for opt in f.choices}
    return [
        i
        for i, c in enumerate(spans)
        if source[c.char_start : c.char_end].lower() in options
    ]


def _field_value(span: SpanCandidate, score: float, source: str) -> FieldValue:
    return FieldValue(
        text=source[span.char_start : span.char_end],
        char_start=span.char_start,
        char_end=span.char_end,
        score=score,
    )


def decode_classification(logits: torch.Tensor, spec: ClassificationSpec) -> ClassificationOutcome:
    """Softmax argmax for single-label tasks, per-label sigmoid for multi-label."""
    raw = logits.detach().numpy().astype(np.float64)
    names = [lab.label for lab in spec.labels]
    if spec.multi_label:
        probs = 1.0 / (1.0 + np.exp(-raw))
        chosen = [name for name, p in zip(names, probs) if p >= spec.threshold]
    else:
        shifted = np.exp(raw - raw.max())
        probs = shifted / shifted.sum()
        chosen = [names[int(np.argmax(raw))]]  # ties go to the first label
    return ClassificationOutcome(
        labels=chosen,
        probabilities={name: float(p) for name, p in zip(names, probs)},
    )


def run_schema(
    model: ExtractionModel,
    schema: Schema,
    text: str,
    threshold: float = DEFAULT_THRESHOLD,
    max_len: int | None = None,
) -> ExtractionResult:
    """Run every task of the schema against the text in one encoder pass.

    ``threshold`` applies to span selection (entities and structure fields);
    multi-label classification keeps the threshold declared in its spec.
    """
    violations = validate_schema(schema)
    if violations:
        raise SchemaInvalid(violations)

    limit = max_len if max_len is not None else model.cfg.max_positions
    plan = compose_tasks(schema, text, model.vocab, max_len=min(limit, model.cfg.max_positions))

    needs_spans = schema.entity_task is not None or bool(schema.structure_tasks)
    if needs_spans and plan.text_len == 0:
        raise ValueError("text must be non-empty for entity or structure extraction")

    with torch.no_grad():
        hidden = model.encode(plan)
        embeds = extract_prompt_embeds(hidden, plan, schema)

        candidates: list[SpanCandidate] = []
        if needs_spans:
            spans = enumerate_spans(plan.text_len, model.cfg.max_span_width)
            candidates = span_representations(hidden, plan, spans, model.heads.span)

        result = ExtractionResult()
        if schema.entity_task is not None:
            labels = [e.label for e in schema.entity_task]
            probs = entity_scores(candidates, torch.stack(list(embeds.entity.values())))
            result.entities = decode_entities(probs, candidates, labels, text, threshold)

        if schema.classification_tasks:
            result.classifications = {}
            for spec in schema.classification_tasks:
                logits = classification_logits(embeds.labels[spec.task_name], model.heads.classifier)
                result.classifications[spec.task_name] = decode_classification(logits, spec)

        if schema.structure_tasks:
            result.structures = {}
            for st in schema.structure_tasks:
                count = predict_count(embeds.tasks[st.parent_name], model.heads.count)
                conditioned = occurrence_conditioned_fields(
                    embeds.fields[st.parent_name], count.k_hat, model.heads.occurrence
                )
                if count.k_hat and candidates:
                    per_occurrence = [
                        entity_scores(candidates, conditioned[i]).T  # [m, n_spans]
                        for i in range(count.k_hat)
                    ]
                    scores = torch.stack(per_occurrence)
                else:
                    scores = conditioned.new_zeros((0, len(st.fields), len(candidates)))
                result.structures[st.parent_name] = decode_structures(
                    count.k_hat, scores, candidates, st, text, threshold
                )

    return result
