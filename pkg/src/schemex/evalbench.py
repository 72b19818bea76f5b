"""Extraction metrics and the single-pass vs per-label latency harness.

The baseline mode emulates a pipeline that spends one encoder pass per class
label (prompting with a single label each time), while composed mode runs the
whole label set through one pass. Both modes reuse the same model, so the
comparison isolates the pass count rather than model size; medians over
repeats are reported with the first warmup iterations discarded.
"""
from __future__ import annotations

import platform
import statistics
import time
from collections import Counter
from dataclasses import dataclass
from typing import Any, Iterable, Sequence

import torch

from .decode import run_schema
from .errors import LengthMismatch
from .heads import classification_logits
from .model import ExtractionModel
from .prompt import PromptPlan, compile_classification_prompt
from .schema import ClassificationSpec, LabelSpec, Schema
from .tokenizer import SEP_ID, tokenize
from .training import Example

MIN_REPEATS = 10
WARMUP_RUNS = 3

#: 16 words cycled to the fixed 64-token benchmark text.
_BENCH_WORDS = "the quick brown fox jumps over a lazy dog near the old stone bridge at dawn".split()
BENCH_TEXT_TOKENS = 64


def span_f1(
    predicted: Iterable[tuple[str, int, int]], gold: Iterable[tuple[str, int, int]]
) -> tuple[float, float, float]:
    """Micro-averaged exact-match precision, recall, F1 over typed spans."""
    pred_counts = Counter(predicted)
    gold_counts = Counter(gold)
    n_pred = sum(pred_counts.values())
    n_gold = sum(gold_counts.values())
    if n_pred == 0 and n_gold == 0:
        return 1.0, 1.0, 1.0
    if n_pred == 0 or n_gold == 0:
        return 0.0, 0.0, 0.0
    correct = sum((pred_counts & gold_counts).values())
    precision = correct / n_pred
    recall = correct / n_gold
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return precision, recall, f1


def accuracy(predicted: Sequence[Any], gold: Sequence[Any]) -> float:
    """Exact-match fraction; unordered collections compare as sets."""
    if len(predicted) != len(gold):
        raise LengthMismatch(f"{len(predicted)} predictions vs {len(gold)} gold labels")
    if not gold:
        return 1.0

    def norm(x: Any) -> Any:
        return frozenset(x) if isinstance(x, (list, tuple, set, frozenset)) else x

    hits = sum(1 for p, g in zip(predicted, gold) if norm(p) == norm(g))
    return hits / len(gold)


def gold_spans(ex: Example) -> list[tuple[str, int, int]]:
    """Typed gold spans: entities plus structure fields as parent.field."""
    spans = [(label, s, e) for label, s, e in ex.entities]
    for parent, instances in ex.structures.items():
        for inst in instances:
            for fname, field_spans in inst.items():
                spans.extend((f"{parent}.{fname}", s, e) for s, e in field_spans)
    return spans


def predicted_spans(result) -> list[tuple[str, int, int]]:
    spans: list[tuple[str, int, int]] = []
    for label, matches in (result.entities or {}).items():
        spans.extend((label, m.char_start, m.char_end) for m in matches)
    for parent, instances in (result.structures or {}).items():
        for inst in instances:
            for fname, value in inst.items():
                values = value if isinstance(value, list) else [value]
                spans.extend((f"{parent}.{fname}", v.char_start, v.char_end) for v in values)
    return spans


def evaluate_model(model: ExtractionModel, corpus: list[Example]) -> dict[str, Any]:
    """Micro span F1 and classification accuracy of the model over a corpus."""
    all_pred: list[tuple[str, int, int]] = []
    all_gold: list[tuple[str, int, int]] = []
    cls_pred: list[Any] = []
    cls_gold: list[Any] = []
    for ex in corpus:
        result = run_schema(model, ex.schema, ex.text)
        all_pred.extend(predicted_spans(result))
        all_gold.extend(gold_spans(ex))
        for spec in ex.schema.classification_tasks:
            outcome = result.classifications[spec.task_name]
            cls_pred.append(outcome.labels)
            cls_gold.append(ex.classifications.get(spec.task_name, []))
    precision, recall, f1 = span_f1(all_pred, all_gold)
    return {
        "span": {
            "precision": precision,
            "recall": recall,
            "f1": f1,
            "predicted": len(all_pred),
            "gold": len(all_gold),
        },
        "classification": {
            "accuracy": accuracy(cls_pred, cls_gold),
            "total": len(cls_gold),
        },
        "examples": len(corpus),
    }


@dataclass
class BenchRow:
    labels: int
    composed_ms: float
    baseline_ms: float
    composed_passes: int
    baseline_passes: int


@dataclass
class BenchReport:
    hardware: str
    text_tokens: int
    repeats: int
    warmup: int
    rows: list[BenchRow]
    composed_ratio: float
    baseline_ratio: float

    def to_dict(self) -> dict[str, Any]:
        return {
            "hardware": self.hardware,
            "text_tokens": self.text_tokens,
            "repeats": self.repeats,
            "warmup": self.warmup,
            "rows": [
                {
                    "labels": r.labels,
                    "composed_ms": r.composed_ms,
                    "baseline_ms": r.baseline_ms,
                    "composed_passes": r.composed_passes,
                    "baseline_passes": r.baseline_passes,
                }
                for r in self.rows
            ],
            "scaling_ratios": {
                "composed": self.composed_ratio,
                "baseline": self.baseline_ratio,
            },
        }

    def format_table(self) -> str:
        lines = [
            f"latency medians over {self.repeats} repeats ({self.warmup} warmup) on {self.hardware}",
            f"{'labels':>7} {'composed ms':>12} {'baseline ms':>12} {'passes':>8}",
        ]
        for r in self.rows:
            lines.append(
                f"{r.labels:>7} {r.composed_ms:>12.2f} {r.baseline_ms:>12.2f} "
                f"{r.composed_passes:>3}/{r.baseline_passes}"
            )
        lines.append(
            f"scaling ratio (max/min labels): composed {self.composed_ratio:.2f}x, "
            f"baseline {self.baseline_ratio:.2f}x"
        )
        return "\n".join(lines)


def bench_text() -> str:
    words = [_BENCH_WORDS[i % len(_BENCH_WORDS)] for i in range(BENCH_TEXT_TOKENS)]
    return " ".join(words)


def _composed_schema(n_labels: int) -> Schema:
    labels = tuple(LabelSpec(f"option{i}") for i in range(n_labels))
    return Schema(classification_tasks=(ClassificationSpec("topic", labels),))


def _single_label_plan(model: ExtractionModel, label: str, text: str) -> PromptPlan:
    """Prompt scoring one label in isolation (the per-pass unit of the baseline)."""
    spec = ClassificationSpec("topic", (LabelSpec(label),))
    ids, bindings = compile_classification_prompt(spec, model.vocab)
    ids.append(SEP_ID)
    text_seq = tokenize(model.vocab, text)
    return PromptPlan(
        ids=tuple(ids) + text_seq.ids,
        bindings=tuple(bindings),
        text_start=len(ids),
        text_len=len(text_seq),
        source_offsets=text_seq.offsets,
        source_text=text,
    )


def _run_baseline(model: ExtractionModel, labels: list[str], text: str) -> list[float]:
    """One encoder pass per label; returns the per-label sigmoid scores."""
    scores = []
    with torch.no_grad():
        for label in labels:
            plan = _single_label_plan(model, label, text)
            hidden = model.encode(plan)
            label_pos = next(b.position for b in plan.bindings if b.role == "L")
            logit = classification_logits(hidden[label_pos].unsqueeze(0), model.heads.classifier)
            scores.append(float(torch.sigmoid(logit)))
    return scores


def latency_bench(
    model: ExtractionModel, label_counts: list[int], repeats: int = MIN_REPEATS
) -> BenchReport:
    """Median wall-clock per label count for composed vs per-label modes."""
    if repeats < MIN_REPEATS:
        raise ValueError(f"repeats must be at least {MIN_REPEATS}")
    if not label_counts:
        raise ValueError("label_counts must be non-empty")

    text = bench_text()
    previous_threads = torch.get_num_threads()
    torch.set_num_threads(1)
    try:
        rows = []
        for n_labels in label_counts:
            schema = _composed_schema(n_labels)
            labels = [f"option{i}" for i in range(n_labels)]

            composed_times = []
            before = model.encode_calls
            run_schema(model, schema, text)
            composed_passes = model.encode_calls - before
            for i in range(WARMUP_RUNS + repeats):
                start = time.perf_counter()
                run_schema(model, schema, text)
                elapsed = (time.perf_counter() - start) * 1000.0
                if i >= WARMUP_RUNS:
                    composed_times.append(elapsed)

            baseline_times = []
            before = model.encode_calls
            _run_baseline(model, labels, text)
            baseline_passes = model.encode_calls - before
            for i in range(WARMUP_RUNS + repeats):
                start = time.perf_counter()
                _run_baseline(model, labels, text)
                elapsed = (time.perf_counter() - start) * 1000.0
                if i >= WARMUP_RUNS:
                    baseline_times.append(elapsed)

            rows.append(
                BenchRow(
                    labels=n_labels,
                    composed_ms=statistics.median(composed_times),
                    baseline_ms=statistics.median(baseline_times),
                    composed_passes=composed_passes,
                    baseline_passes=baseline_passes,
                )
            )
    finally:
        torch.set_num_threads(previous_threads)

    by_labels = {r.labels: r for r in rows}
    low, high = min(label_counts), max(label_counts)
    composed_ratio = by_labels[high].composed_ms / by_labels[low].composed_ms
    baseline_ratio = by_labels[high].baseline_ms / by_labels[low].baseline_ms
    return BenchReport(
        hardware=f"{platform.machine()} / {platform.processor() or 'unknown cpu'} / {platform.system()}",
        text_tokens=BENCH_TEXT_TOKENS,
        repeats=repeats,
        warmup=WARMUP_RUNS,
        rows=rows,
        composed_ratio=composed_ratio,
        baseline_ratio=baseline_ratio,
    )
