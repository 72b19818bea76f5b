"""Task-specific scoring on top of encoder hidden states.

Span candidates are built from endpoint states, entity types score against
spans via dot product + sigmoid, structure instances come from a 20-way count
head plus occurrence-conditioned field embeddings, and classification labels
are scored by a shared per-label MLP. Structure fields reuse the exact
span-scoring path of the entity task.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import torch
from torch import nn

from .encoder import DTYPE, ModelConfig
from .errors import CountOutOfRange
from .prompt import PromptPlan
from .schema import ENTITY_TASK_NAME, Schema


class SpanHead(nn.Module):
    """Span representation from concatenated endpoint states: 2d -> d."""

    def __init__(self, dim: int):
        super().__init__()
        self.net = nn.Sequential(
            nn.Linear(2 * dim, 2 * dim, dtype=DTYPE),
            nn.GELU(),
            nn.Linear(2 * dim, dim, dtype=DTYPE),
        )

    def forward(self, endpoints: torch.Tensor) -> torch.Tensor:
        return self.net(endpoints)


class CountHead(nn.Module):
    """Number of structure instances, as 20-way logits over counts 0..19."""

    def __init__(self, dim: int, max_count: int):
        super().__init__()
        self.net = nn.Sequential(
            nn.Linear(dim, dim, dtype=DTYPE),
            nn.GELU(),
            nn.Linear(dim, max_count, dtype=DTYPE),
        )

    def forward(self, p_embed: torch.Tensor) -> torch.Tensor:
        return self.net(p_embed)


class OccurrenceCombiner(nn.Module):
    """Field embedding + learned occurrence embedding, fused by a shared FFN.

    The occurrence table is shared across all structure types.
    """

    def __init__(self, dim: int, max_count: int):
        super().__init__()
        self.max_count = max_count
        self.occurrence = nn.Embedding(max_count, dim, dtype=DTYPE)
        self.net = nn.Sequential(
            nn.Linear(dim, 2 * dim, dtype=DTYPE),
            nn.GELU(),
            nn.Linear(2 * dim, dim, dtype=DTYPE),
        )

    def forward(self, field_embeds: torch.Tensor, k: int) -> torch.Tensor:
        # field_embeds: [m, d] -> conditioned [k, m, d]
        if k < 0:
            raise ValueError("occurrence count must be non-negative")
        if k > self.max_count:
            raise CountOutOfRange(f"count {k} exceeds the {self.max_count}-instance limit")
        m, d = field_embeds.shape
        if k == 0:
            return field_embeds.new_zeros((0, m, d))
        occ = self.occurrence(torch.arange(k))  # [k, d]
        combined = field_embeds.unsqueeze(0) + occ.unsqueeze(1)
        return self.net(combined)


class LabelScorer(nn.Module):
    """Shared two-layer MLP mapping each label embedding to a scalar logit."""

    def __init__(self, dim: int):
        super().__init__()
        self.net = nn.Sequential(
            nn.Linear(dim, dim, dtype=DTYPE),
            nn.GELU(),
            nn.Linear(dim, 1, dtype=DTYPE),
        )

    def forward(self, label_embeds: torch.Tensor) -> torch.Tensor:
        return self.net(label_embeds).squeeze(-1)


class Heads(nn.Module):
    """All task heads; parameter names under this module get the head learning rate."""

    def __init__(self, cfg: ModelConfig):
        super().__init__()
        self.span = SpanHead(cfg.hidden_dim)
        self.count = CountHead(cfg.hidden_dim, cfg.max_count)
        self.occurrence = OccurrenceCombiner(cfg.hidden_dim, cfg.max_count)
        self.classifier = LabelScorer(cfg.hidden_dim)


@dataclass
class SpanCandidate:
    """A contiguous text-token range with its pooled representation."""

    start_token: int
    end_token: int  # inclusive
    char_start: int
    char_end: int
    rep: torch.Tensor  # [d]


@dataclass
class CountPrediction:
    logits: torch.Tensor  # [20]
    k_hat: int


@dataclass
class PromptEmbeds:
    """Hidden states gathered at marker positions, keyed by schema element."""

    entity: dict[str, torch.Tensor]         # entity label -> [d]
    fields: dict[str, torch.Tensor]         # structure name -> [m, d]
    labels: dict[str, torch.Tensor]         # classification task -> [n, d]
    tasks: dict[str, torch.Tensor]          # task name -> [d]


def enumerate_spans(text_len: int, max_width: int) -> list[tuple[int, int]]:
    """All (start, end) pairs with end inclusive and width <= max_width."""
    return [
        (i, j)
        for i in range(text_len)
        for j in range(i, min(i + max_width, text_len))
    ]


def span_rep_matrix(
    hidden: torch.Tensor, plan: PromptPlan, spans: list[tuple[int, int]], span_head: SpanHead
) -> torch.Tensor:
    """Stacked span representations [n_spans, d] for text-relative spans."""
    starts = torch.tensor([plan.text_start + s for s, _ in spans])
    ends = torch.tensor([plan.text_start + e for _, e in spans])
    endpoints = torch.cat([hidden[starts], hidden[ends]], dim=-1)
    return span_head(endpoints)


def span_representations(
    hidden: torch.Tensor, plan: PromptPlan, spans: list[tuple[int, int]], span_head: SpanHead
) -> list[SpanCandidate]:
    """SpanCandidates (with char offsets) in the order of ``spans``."""
    reps = span_rep_matrix(hidden, plan, spans, span_head)
    out = []
    for row, (s, e) in zip(reps, spans):
        char_start = plan.source_offsets[s][0]
        char_end = plan.source_offsets[e][1]
        out.append(SpanCandidate(s, e, char_start, char_end, row))
    return out


def score_matrix(reps: torch.Tensor, embeds: torch.Tensor) -> torch.Tensor:
    """Pre-sigmoid span-vs-embedding scores: [n_spans, n_embeds]."""
    return reps @ embeds.T


def entity_scores(spans: list[SpanCandidate], entity_embeds: torch.Tensor) -> torch.Tensor:
    """Match probabilities sigmoid(rep . embed) with shape [n_spans, n_embeds]."""
    reps = torch.stack([c.rep for c in spans]) if spans else entity_embeds.new_zeros((0, entity_embeds.shape[-1]))
    return torch.sigmoid(score_matrix(reps, entity_embeds))


def predict_count(p_embed: torch.Tensor, count_head: CountHead) -> CountPrediction:
    """Instance-count prediction; ties resolve toward the smaller count."""
    logits = count_head(p_embed)
    k_hat = int(np.argmax(logits.detach().numpy()))
    return CountPrediction(logits=logits, k_hat=k_hat)


def occurrence_conditioned_fields(
    field_embeds: torch.Tensor, k: int, combiner: OccurrenceCombiner
) -> torch.Tensor:
    """K occurrence-specific variants of each field embedding: [k, m, d]."""
    return combiner(field_embeds, k)


def classification_logits(label_embeds: torch.Tensor, scorer: LabelScorer) -> torch.Tensor:
    """One logit per label from the shared scorer MLP."""
    return scorer(label_embeds)


def extract_prompt_embeds(hidden: torch.Tensor, plan: PromptPlan, schema: Schema) -> PromptEmbeds:
    """Gather hidden rows at marker positions, keyed by the owning schema element."""
    by_task: dict[tuple[str, str], list[tuple[int, int]]] = {}
    for b in plan.bindings:
        by_task.setdefault((b.role, b.task), []).append((b.index, b.position))

    def rows(role: str, task: str) -> torch.Tensor:
        entries = sorted(by_task.get((role, task), []))
        return hidden[torch.tensor([pos for _, pos in entries])]

    entity: dict[str, torch.Tensor] = {}
    if schema.entity_task is not None:
        ent_rows = rows("E", ENTITY_TASK_NAME)
        if ent_rows.shape[0] != len(schema.entity_task):
            raise ValueError("entity bindings do not match the schema")
        entity = {e.label: ent_rows[i] for i, e in enumerate(schema.entity_task)}

    fields = {}
    for st in schema.structure_tasks:
        f_rows = rows("C", st.parent_name)
        if f_rows.shape[0] != len(st.fields):
            raise ValueError(f"field bindings do not match structure {st.parent_name!r}")
        fields[st.parent_name] = f_rows

    labels = {}
    for c in schema.classification_tasks:
        l_rows = rows("L", c.task_name)
        if l_rows.shape[0] != len(c.labels):
            raise ValueError(f"label bindings do not match task {c.task_name!r}")
        labels[c.task_name] = l_rows

    tasks = {
        task: hidden[pos_entries[0][1]]
        for (role, task), pos_entries in by_task.items()
        if role == "P"
    }
    return PromptEmbeds(entity=entity, fields=fields, labels=labels, tasks=tasks)
