"""Tokenization rule, offsets and vocabulary construction."""
from __future__ import annotations

from hypothesis import given, settings
from hypothesis import strategies as st
import pytest

from schemex.tokenizer import (
    NUM_SPECIALS,
    SPECIAL_TOKENS,
    UNK_ID,
    Vocabulary,
    build_vocab,
    split_text,
    tokenize,
)


@pytest.fixture(scope="module")
def vocab():
    return build_vocab(["John works in Paris iPhone costs 999 $ ."], max_size=100)


class TestTokenize:
    def test_offsets_exact(self, vocab):
        seq = tokenize(vocab, "John works in Paris")
        assert len(seq) == 4
        assert seq.offsets == ((0, 4), (5, 10), (11, 13), (14, 19))

    def test_punctuation_isolated(self, vocab):
        seq = tokenize(vocab, "iPhone costs $999.")
        assert seq.surfaces() == ["iPhone", "costs", "$", "999", "."]

    def test_empty_text(self, vocab):
        seq = tokenize(vocab, "")
        assert len(seq) == 0

    def test_unknown_tokens_keep_offsets(self, vocab):
        seq = tokenize(vocab, "Zebra works")
        assert seq.ids[0] == UNK_ID
        assert seq.surface(0) == "Zebra"

    def test_deterministic(self, vocab):
        assert tokenize(vocab, "a b c.") == tokenize(vocab, "a b c.")

    def test_markers_never_produced(self, vocab):
        seq = tokenize(vocab, "[SEP] [P] [E] text")
        marker_ids = {0, 1, 2, 3, 4, 6}
        assert not marker_ids.intersection(seq.ids)

    @given(st.text(max_size=80))
    @settings(max_examples=300, deadline=None)
    def test_offsets_reconstruct_source(self, text):
        offsets = split_text(text)
        # monotone, non-overlapping
        for (s1, e1), (s2, e2) in zip(offsets, offsets[1:]):
            assert s1 < e1 <= s2 < e2
        joined = "".join(text[s:e] for s, e in offsets)
        assert joined == "".join(ch for ch in text if not ch.isspace())


class TestBuildVocab:
    def test_contains_corpus_tokens(self):
        vocab = build_vocab(["a a b"], max_size=9)
        assert "a" in vocab.token_to_id and "b" in vocab.token_to_id
        assert vocab.size == 9

    def test_determinism(self):
        v1 = build_vocab(["x y z y"], max_size=20)
        v2 = build_vocab(["x y z y"], max_size=20)
        assert v1 == v2

    def test_truncation_keeps_most_frequent(self):
        corpus = [" ".join(f"tok{i}" for i in range(1000))]
        corpus.append("tok5 " * 10)
        vocab = build_vocab(corpus, max_size=107)
        assert vocab.size == 107
        assert len(vocab.id_to_token) - NUM_SPECIALS == 100
        assert "tok5" in vocab.token_to_id

    def test_ties_break_lexicographically(self):
        vocab = build_vocab(["b a c"], max_size=9)
        assert vocab.id_to_token[NUM_SPECIALS:] == ("a", "b")

    def test_specials_occupy_first_ids(self):
        vocab = build_vocab(["a"], max_size=8)
        assert vocab.id_to_token[:NUM_SPECIALS] == SPECIAL_TOKENS

    def test_maps_are_inverse(self):
        vocab = build_vocab(["alpha beta gamma"], max_size=20)
        for token, idx in vocab.token_to_id.items():
            assert vocab.id_to_token[idx] == token

    def test_min_size_enforced(self):
        with pytest.raises(ValueError):
            build_vocab(["a"], max_size=7)

    def test_duplicate_tokens_rejected(self):
        with pytest.raises(ValueError):
            Vocabulary.from_tokens(["a", "a"])
