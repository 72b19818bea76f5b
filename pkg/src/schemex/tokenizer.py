"""Deterministic rule tokenizer and the special-token vocabulary.

The rule: split on Unicode whitespace and isolate every punctuation or symbol
character (anything neither alphanumeric nor whitespace) as its own token.
Character offsets are exact, so decoded spans can always be sliced verbatim
out of the source text; "$999" splits into "$" and "999" but a span covering
both tokens reads back as "$999".

Ids 0..6 are reserved for marker tokens; text tokenization can never produce
them because their surface forms contain brackets, which the rule isolates.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Iterable

SPECIAL_TOKENS = ("[P]", "[E]", "[C]", "[L]", "[SEP]", "[UNK]", "[PAD]")

P_ID, E_ID, C_ID, L_ID, SEP_ID, UNK_ID, PAD_ID = range(7)

NUM_SPECIALS = len(SPECIAL_TOKENS)


def split_text(text: str) -> list[tuple[int, int]]:
    """Apply the tokenization rule, returning (start, end) character offsets."""
    offsets: list[tuple[int, int]] = []
    start: int | None = None
    for i, ch in enumerate(text):
        if ch.isspace():
            if start is not None:
                offsets.append((start, i))
                start = None
        elif not ch.isalnum():
            if start is not None:
                offsets.append((start, i))
                start = None
            offsets.append((i, i + 1))
        else:
            if start is None:
                start = i
    if start is not None:
        offsets.append((start, len(text)))
    return offsets


@dataclass(frozen=True)
class Vocabulary:
    """Immutable token <-> id mapping with the seven reserved marker ids."""

    id_to_token: tuple[str, ...]
    token_to_id: dict[str, int]

    @property
    def size(self) -> int:
        return len(self.id_to_token)

    def id_for(self, token: str) -> int:
        return self.token_to_id.get(token, UNK_ID)

    def token_for(self, token_id: int) -> str:
        return self.id_to_token[token_id]

    @classmethod
    def from_tokens(cls, text_tokens: Iterable[str]) -> "Vocabulary":
        id_to_token = SPECIAL_TOKENS + tuple(text_tokens)
        token_to_id = {tok: i for i, tok in enumerate(id_to_token)}
        if len(token_to_id) != len(id_to_token):
            raise ValueError("duplicate tokens in vocabulary")
        return cls(id_to_token=id_to_token, token_to_id=token_to_id)


@dataclass(frozen=True)
class TokenSeq:
    """Token ids plus exact character offsets into the source text."""

    ids: tuple[int, ...]
    offsets: tuple[tuple[int, int], ...]
    source: str

    def __len__(self) -> int:
        return len(self.ids)

    def surface(self, index: int) -> str:
        start, end = self.offsets[index]
        return self.source[start:end]

    def surfaces(self) -> list[str]:
        return [self.surface(i) for i in range(len(self.ids))]


def build_vocab(corpus: Iterable[str], max_size: int) -> Vocabulary:
    """Most frequent corpus tokens (ties lexicographic) after the 7 specials."""
    if max_size < NUM_SPECIALS + 1:
        raise ValueError(f"max_size must be at least {NUM_SPECIALS + 1}")
    counts: Counter[str] = Counter()
    for text in corpus:
        for start, end in split_text(text):
            counts[text[start:end]] += 1
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    kept = [tok for tok, _ in ranked[: max_size - NUM_SPECIALS]]
    return Vocabulary.from_tokens(kept)


def tokenize(vocab: Vocabulary, text: str) -> TokenSeq:
    """Tokenize text against a vocabulary; unknown tokens keep their offsets."""
    offsets = split_text(text)
    ids = tuple(vocab.id_for(text[s:e]) for s, e in offsets)
    return TokenSeq(ids=ids, offsets=tuple(offsets), source=text)
