"""Losses, gradients, optimizer and the training loop.

Span scoring (entities and structure fields) trains with binary cross-entropy
over every candidate (span, type) pair; the instance-count head and
single-label classification train with categorical cross-entropy; multi-label
classification with per-label binary cross-entropy. Each term is
mean-reduced and all present terms sum with weight 1. Field targets are
conditioned on the ground-truth instance count, not the predicted one.

The optimizer is AdamW with decoupled weight decay, global gradient-norm
clipping before the moment update, linear warmup and differential learning
rates: parameters named ``backbone.*`` get the backbone rate, everything else
the head rate.
"""
from __future__ import annotations

import logging
import random
from dataclasses import dataclass, field as dataclass_field
from typing import Any, Iterable

import torch
import torch.nn.functional as F

from .errors import ContextOverflow
from .heads import enumerate_spans, extract_prompt_embeds, span_rep_matrix
from .model import ExtractionModel
from .prompt import PromptPlan, compose_tasks
from .schema import Schema, schema_from_dict, schema_to_dict
from .tokenizer import split_text

log = logging.getLogger(__name__)

ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8

#: Count targets are clamped here; the count head classifies 0..19.
MAX_COUNT_TARGET = 19


@dataclass
class Example:
    """One training example: text, its schema, and gold outputs.

    Gold spans are half-open character ranges that must line up exactly with
    tokenizer boundaries. ``structures`` maps parent name to instances in
    textual order; each instance maps field name to its gold character spans
    (a single-element list for Str fields).
    """

    text: str
    schema: Schema
    entities: list[tuple[str, int, int]] = dataclass_field(default_factory=list)
    structures: dict[str, list[dict[str, list[tuple[int, int]]]]] = dataclass_field(
        default_factory=dict
    )
    classifications: dict[str, list[str]] = dataclass_field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return {
            "text": self.text,
            "schema": schema_to_dict(self.schema),
            "entities": [[label, s, e] for label, s, e in self.entities],
            "structures": {
                parent: [
                    {fname: [[s, e] for s, e in spans] for fname, spans in inst.items()}
                    for inst in instances
                ]
                for parent, instances in self.structures.items()
            },
            "classifications": self.classifications,
        }

    @classmethod
    def from_dict(cls, doc: dict[str, Any]) -> "Example":
        return cls(
            text=doc["text"],
            schema=schema_from_dict(doc["schema"]),
            entities=[(label, int(s), int(e)) for label, s, e in doc.get("entities", [])],
            structures={
                parent: [
                    {fname: [(int(s), int(e)) for s, e in spans] for fname, spans in inst.items()}
                    for inst in instances
                ]
                for parent, instances in doc.get("structures", {}).items()
            },
            classifications={
                task: list(labels) for task, labels in doc.get("classifications", {}).items()
            },
        )


def check_example(ex: Example) -> list[str]:
    """Invariant violations of a training example (empty list = valid)."""
    problems = []
    boundaries_start = {s for s, _ in split_text(ex.text)}
    boundaries_end = {e for _, e in split_text(ex.text)}

    def check_span(s: int, e: int, where: str) -> None:
        if s not in boundaries_start or e not in boundaries_end or s >= e:
            problems.append(f"{where}: span ({s}, {e}) not aligned to token boundaries")

    for label, s, e in ex.entities:
        check_span(s, e, f"entity {label!r}")
    for parent, instances in ex.structures.items():
        if len(instances) > MAX_COUNT_TARGET:
            problems.append(f"structure {parent!r} has {len(instances)} instances (max 19)")
        for i, inst in enumerate(instances):
            for fname, spans in inst.items():
                for s, e in spans:
                    check_span(s, e, f"structure {parent!r}[{i}].{fname}")
    return problems


@dataclass(frozen=True)
class TrainConfig:
    """Defaults are the production recipe rescaled for the desk model."""

    epochs: int = 10
    lr_backbone: float = 1e-3
    lr_heads: float = 2e-3
    weight_decay: float = 0.01
    warmup_steps: int = 50
    grad_clip: float = 1.0
    batch_size: int = 4
    seed: int = 0

    def validate(self) -> None:
        numeric = {
            "epochs": self.epochs,
            "lr_backbone": self.lr_backbone,
            "lr_heads": self.lr_heads,
            "warmup_steps": self.warmup_steps,
            "grad_clip": self.grad_clip,
            "batch_size": self.batch_size,
        }
        for name, value in numeric.items():
            if value <= 0:
                raise ValueError(f"{name} must be positive")
        if self.weight_decay < 0:
            raise ValueError("weight_decay must be non-negative")


def _token_span(plan: PromptPlan, char_start: int, char_end: int) -> tuple[int, int]:
    start_tok = end_tok = None
    for i, (s, e) in enumerate(plan.source_offsets):
        if s == char_start:
            start_tok = i
        if e == char_end:
            end_tok = i
    if start_tok is None or end_tok is None or start_tok > end_tok:
        raise ValueError(f"gold span ({char_start}, {char_end}) is not token-aligned")
    return start_tok, end_tok


def total_loss(model: ExtractionModel, ex: Example) -> tuple[torch.Tensor, dict[str, float]]:
    """Sum of all present task losses plus a per-task breakdown."""
    plan = compose_tasks(ex.schema, ex.text, model.vocab, max_len=model.cfg.max_positions)
    hidden = model.encode(plan)
    embeds = extract_prompt_embeds(hidden, plan, ex.schema)

    needs_spans = ex.schema.entity_task is not None or bool(ex.schema.structure_tasks)
    reps = None
    span_index: dict[tuple[int, int], int] = {}
    if needs_spans and plan.text_len > 0:
        spans = enumerate_spans(plan.text_len, model.cfg.max_span_width)
        span_index = {span: i for i, span in enumerate(spans)}
        reps = span_rep_matrix(hidden, plan, spans, model.heads.span)

    def span_target_index(char_start: int, char_end: int) -> int:
        tok_span = _token_span(plan, char_start, char_end)
        if tok_span not in span_index:
            raise ValueError(
                f"gold span {tok_span} wider than max_span_width={model.cfg.max_span_width}"
            )
        return span_index[tok_span]

    terms: dict[str, torch.Tensor] = {}

    if ex.schema.entity_task is not None and reps is not None:
        label_index = {e.label: i for i, e in enumerate(ex.schema.entity_task)}
        embed_matrix = torch.stack(list(embeds.entity.values()))
        logits = reps @ embed_matrix.T
        targets = torch.zeros_like(logits)
        for label, s, e in ex.entities:
            targets[span_target_index(s, e), label_index[label]] = 1.0
        terms["entities"] = F.binary_cross_entropy_with_logits(logits, targets)

    for spec in ex.schema.classification_tasks:
        logits = model.heads.classifier(embeds.labels[spec.task_name])
        gold = ex.classifications.get(spec.task_name, [])
        names = [lab.label for lab in spec.labels]
        if spec.multi_label:
            targets = torch.zeros_like(logits)
            for g in gold:
                targets[names.index(g)] = 1.0
            loss = F.binary_cross_entropy_with_logits(logits, targets)
        else:
            if len(gold) != 1:
                raise ValueError(f"single-label task {spec.task_name!r} needs exactly one gold label")
            loss = F.cross_entropy(logits.unsqueeze(0), torch.tensor([names.index(gold[0])]))
        terms[f"classification/{spec.task_name}"] = loss

    for st in ex.schema.structure_tasks:
        instances = ex.structures.get(st.parent_name, [])
        k_true = min(len(instances), MAX_COUNT_TARGET)
        count_logits = model.heads.count(embeds.tasks[st.parent_name])
        terms[f"structure/{st.parent_name}/count"] = F.cross_entropy(
            count_logits.unsqueeze(0), torch.tensor([k_true])
        )
        if instances and reps is not None:
            conditioned = model.heads.occurrence(embeds.fields[st.parent_name], len(instances))
            logits = torch.einsum("kmd,sd->kms", conditioned, reps)
            targets = torch.zeros_like(logits)
            field_index = {f.name: j for j, f in enumerate(st.fields)}
            for i, inst in enumerate(instances):
                for fname, gold_spans in inst.items():
                    for s, e in gold_spans:
                        targets[i, field_index[fname], span_target_index(s, e)] = 1.0
            terms[f"structure/{st.parent_name}/fields"] = F.binary_cross_entropy_with_logits(
                logits, targets
            )

    total = sum(terms.values())
    return total, {name: float(v.detach()) for name, v in terms.items()}


def backward(model: ExtractionModel, ex: Example) -> dict[str, torch.Tensor]:
    """Gradients of total_loss for every trainable tensor (zeros where unused)."""
    model.zero_grad(set_to_none=True)
    loss, _ = total_loss(model, ex)
    loss.backward()
    return {
        name: (p.grad.detach().clone() if p.grad is not None else torch.zeros_like(p))
        for name, p in model.named_parameters()
    }


@dataclass
class OptimizerState:
    """First/second AdamW moments per tensor name."""

    m: dict[str, torch.Tensor] = dataclass_field(default_factory=dict)
    v: dict[str, torch.Tensor] = dataclass_field(default_factory=dict)


def optimizer_step(
    model: ExtractionModel,
    grads: dict[str, torch.Tensor],
    cfg: TrainConfig,
    step_index: int,
    state: OptimizerState,
) -> None:
    """One AdamW update in place; ``step_index`` starts at 1."""
    if step_index < 1:
        raise ValueError("step_index starts at 1")

    total_sq = sum(float(g.pow(2).sum()) for g in grads.values())
    norm = total_sq ** 0.5
    clip_scale = cfg.grad_clip / norm if norm > cfg.grad_clip else 1.0
    lr_scale = min(1.0, step_index / cfg.warmup_steps)

    with torch.no_grad():
        for name, param in model.named_parameters():
            g = grads[name] * clip_scale
            if name not in state.m:
                state.m[name] = torch.zeros_like(param)
                state.v[name] = torch.zeros_like(param)
            m, v = state.m[name], state.v[name]
            m.mul_(ADAM_BETA1).add_(g, alpha=1 - ADAM_BETA1)
            v.mul_(ADAM_BETA2).addcmul_(g, g, value=1 - ADAM_BETA2)
            m_hat = m / (1 - ADAM_BETA1 ** step_index)
            v_hat = v / (1 - ADAM_BETA2 ** step_index)
            base_lr = cfg.lr_backbone if name.startswith("backbone.") else cfg.lr_heads
            lr = base_lr * lr_scale
            param.add_(m_hat / (v_hat.sqrt() + ADAM_EPS) + cfg.weight_decay * param, alpha=-lr)


def train(
    model: ExtractionModel, corpus: list[Example], cfg: TrainConfig
) -> tuple[ExtractionModel, list[float]]:
    """Train in place; returns the model and the mean loss per epoch."""
    cfg.validate()
    if not corpus:
        raise ValueError("training corpus is empty")

    rng = random.Random(cfg.seed)
    state = OptimizerState()
    step = 0
    trace: list[float] = []

    for epoch in range(cfg.epochs):
        order = list(range(len(corpus)))
        rng.shuffle(order)
        epoch_losses: list[float] = []
        for batch_start in range(0, len(order), cfg.batch_size):
            batch = [corpus[i] for i in order[batch_start : batch_start + cfg.batch_size]]
            losses = []
            for ex in batch:
                try:
                    loss, _ = total_loss(model, ex)
                except ContextOverflow as exc:
                    log.warning("skipping example (%s): %s", exc, ex.text[:50])
                    continue
                losses.append(loss)
            if not losses:
                continue
            batch_loss = sum(losses) / len(losses)
            model.zero_grad(set_to_none=True)
            batch_loss.backward()
            grads = {
                name: (p.grad.detach() if p.grad is not None else torch.zeros_like(p))
                for name, p in model.named_parameters()
            }
            step += 1
            optimizer_step(model, grads, cfg, step, state)
            epoch_losses.extend(float(l.detach()) for l in losses)
        mean_loss = sum(epoch_losses) / len(epoch_losses) if epoch_losses else float("nan")
        trace.append(mean_loss)
        log.info("epoch %d/%d mean loss %.5f", epoch + 1, cfg.epochs, mean_loss)
    return model, trace
