"""Span F1, accuracy and the latency harness contracts."""
from __future__ import annotations

import random

import pytest

from schemex.encoder import ModelConfig
from schemex.errors import LengthMismatch
from schemex.evalbench import BenchReport, accuracy, latency_bench, span_f1
from schemex.model import init_params
from schemex.tokenizer import build_vocab


class TestSpanF1:
    def test_perfect_match(self):
        spans = [("person", 0, 4), ("location", 14, 19)]
        assert span_f1(spans, spans) == (1.0, 1.0, 1.0)

    def test_disjoint(self):
        p, r, f1 = span_f1([("a", 0, 1)], [("b", 2, 3)])
        assert f1 == 0.0

    def test_hand_computed_partial(self):
        gold = [("x", 0, 1), ("x", 2, 3), ("x", 4, 5), ("x", 6, 7)]
        pred = [("x", 0, 1), ("x", 2, 3), ("x", 9, 10)]
        p, r, f1 = span_f1(pred, gold)
        assert abs(p - 2 / 3) < 1e-9
        assert abs(r - 0.5) < 1e-9
        assert abs(f1 - 4 / 7) < 1e-9  # 0.5714...

    def test_both_empty_is_one(self):
        assert span_f1([], []) == (1.0, 1.0, 1.0)

    def test_one_empty_is_zero(self):
        assert span_f1([], [("a", 0, 1)])[2] == 0.0
        assert span_f1([("a", 0, 1)], [])[2] == 0.0

    def test_swap_symmetry(self):
        rng = random.Random(4)
        pred = [("t", rng.randrange(5), 9) for _ in range(6)]
        gold = [("t", rng.randrange(5), 9) for _ in range(4)]
        p1, r1, f1 = span_f1(pred, gold)
        p2, r2, f2 = span_f1(gold, pred)
        assert (p1, r1) == (r2, p2)
        assert abs(f1 - f2) < 1e-12

    def test_duplicates_counted_with_multiplicity(self):
        gold = [("x", 0, 1), ("x", 0, 1)]
        pred = [("x", 0, 1)]
        p, r, _ = span_f1(pred, gold)
        assert (p, r) == (1.0, 0.5)


class TestAccuracy:
    def test_all_match(self):
        assert accuracy(["a", "b"], ["a", "b"]) == 1.0

    def test_none_match(self):
        assert accuracy(["a", "b"], ["b", "a"]) == 0.0

    def test_three_of_four(self):
        assert accuracy(["a", "b", "c", "d"], ["a", "b", "c", "x"]) == 0.75

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatch):
            accuracy(["a"], ["a", "b"])

    def test_multilabel_sets_compare_unordered(self):
        assert accuracy([["x", "y"]], [["y", "x"]]) == 1.0


@pytest.fixture(scope="module")
def tiny_model():
    vocab = build_vocab(["topic option0 option1 option2 the quick brown fox"], max_size=64)
    cfg = ModelConfig(vocab_size=vocab.size, hidden_dim=16, layers=1, heads=2, ffn_dim=32, seed=0)
    return init_params(cfg, vocab)


class TestLatencyBench:
    def test_pass_counts_and_report(self, tiny_model):
        report = latency_bench(tiny_model, [2, 3], repeats=10)
        assert isinstance(report, BenchReport)
        for row in report.rows:
            assert row.composed_passes == 1
            assert row.baseline_passes == row.labels
        doc = report.to_dict()
        assert doc["scaling_ratios"]["baseline"] > 0
        assert len(doc["rows"]) == 2
        assert "labels" in report.format_table()

    def test_repeats_minimum_enforced(self, tiny_model):
        with pytest.raises(ValueError):
            latency_bench(tiny_model, [2], repeats=5)

    def test_label_counts_required(self, tiny_model):
        with pytest.raises(ValueError):
            latency_bench(tiny_model, [], repeats=10)
