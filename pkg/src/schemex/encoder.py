"""Trainable bidirectional transformer backbone.

Pre-layer-norm stack with learned absolute position embeddings, full
(unmasked) self-attention and a final layer norm. Everything runs in float64
so finite-difference gradient checks are meaningful; the model is small
enough that CPU double precision is not a bottleneck.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import torch
from torch import nn

from .errors import SequenceTooLong
from .tokenizer import NUM_SPECIALS

DTYPE = torch.float64

# Small epsilon keeps normalized rows at unit variance to well below the 1e-6
# check tolerance in double precision.
LAYER_NORM_EPS = 1e-12


@dataclass(frozen=True)
class ModelConfig:
    """Hyperparameters of the desk-scale model."""

    vocab_size: int
    hidden_dim: int = 64
    layers: int = 2
    heads: int = 4
    ffn_dim: int = 128
    max_positions: int = 512
    max_span_width: int = 8
    max_count: int = 20
    seed: int = 0

    def validate(self) -> None:
        if self.vocab_size < NUM_SPECIALS + 1:
            raise ValueError("vocab_size must cover the reserved marker tokens")
        if self.hidden_dim % self.heads != 0:
            raise ValueError("hidden_dim must be divisible by heads")
        if self.max_span_width < 1:
            raise ValueError("max_span_width must be >= 1")
        if self.max_count != 20:
            raise ValueError("max_count is fixed at 20 (counts 0-19)")
        if min(self.layers, self.ffn_dim, self.max_positions) < 1:
            raise ValueError("layers, ffn_dim and max_positions must be positive")

    def to_dict(self) -> dict:
        return {
            "vocab_size": self.vocab_size,
            "hidden_dim": self.hidden_dim,
            "layers": self.layers,
            "heads": self.heads,
            "ffn_dim": self.ffn_dim,
            "max_positions": self.max_positions,
            "max_span_width": self.max_span_width,
            "max_count": self.max_count,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ModelConfig":
        cfg = cls(**d)
        cfg.validate()
        return cfg


class MultiHeadSelfAttention(nn.Module):

    def __init__(self, dim: int, heads: int):
        super().__init__()
        self.heads = heads
        self.head_dim = dim // heads
        self.q = nn.Linear(dim, dim, dtype=DTYPE)
        self.k = nn.Linear(dim, dim, dtype=DTYPE)
        self.v = nn.Linear(dim, dim, dtype=DTYPE)
        self.out = nn.Linear(dim, dim, dtype=DTYPE)

    def forward(self, x: torch.Tensor, collect: list | None = None) -> torch.Tensor:
        # x: [L, dim] -> [heads, L, head_dim]
        length = x.shape[0]
        q = self.q(x).view(length, self.heads, self.head_dim).transpose(0, 1)
        k = self.k(x).view(length, self.heads, self.head_dim).transpose(0, 1)
        v = self.v(x).view(length, self.heads, self.head_dim).transpose(0, 1)
        scores = q @ k.transpose(1, 2) / math.sqrt(self.head_dim)
        weights = torch.softmax(scores, dim=-1)  # [heads, L, L]
        if collect is not None:
            collect.append(weights)
        ctx = (weights @ v).transpose(0, 1).reshape(length, -1)
        return self.out(ctx)


class EncoderLayer(nn.Module):

    def __init__(self, cfg: ModelConfig):
        super().__init__()
        d = cfg.hidden_dim
        self.norm1 = nn.LayerNorm(d, eps=LAYER_NORM_EPS, dtype=DTYPE)
        self.attn = MultiHeadSelfAttention(d, cfg.heads)
        self.norm2 = nn.LayerNorm(d, eps=LAYER_NORM_EPS, dtype=DTYPE)
        self.ffn = nn.Sequential(
            nn.Linear(d, cfg.ffn_dim, dtype=DTYPE),
            nn.GELU(),
            nn.Linear(cfg.ffn_dim, d, dtype=DTYPE),
        )

    def forward(self, x: torch.Tensor, collect: list | None = None) -> torch.Tensor:
        x = x + self.attn(self.norm1(x), collect)
        x = x + self.ffn(self.norm2(x))
        return x


class Backbone(nn.Module):
    """Embeddings plus the transformer stack; maps token ids to hidden states."""

    def __init__(self, cfg: ModelConfig):
        super().__init__()
        self.max_positions = cfg.max_positions
        self.token_emb = nn.Embedding(cfg.vocab_size, cfg.hidden_dim, dtype=DTYPE)
        self.pos_emb = nn.Embedding(cfg.max_positions, cfg.hidden_dim, dtype=DTYPE)
        self.blocks = nn.ModuleList(EncoderLayer(cfg) for _ in range(cfg.layers))
        self.final_norm = nn.LayerNorm(cfg.hidden_dim, eps=LAYER_NORM_EPS, dtype=DTYPE)

    def forward(self, ids: torch.Tensor, collect: list | None = None) -> torch.Tensor:
        length = ids.shape[0]
        if length > self.max_positions:
            raise SequenceTooLong(
                f"sequence of {length} tokens exceeds max_positions={self.max_positions}"
            )
        x = self.token_emb(ids) + self.pos_emb(torch.arange(length))
        for block in self.blocks:
            x = block(x, collect)
        return self.final_norm(x)

    def attention_maps(self, ids: torch.Tensor) -> list[torch.Tensor]:
        """Per-layer attention weights [heads, L, L]; testing hook."""
        collect: list[torch.Tensor] = []
        with torch.no_grad():
            self.forward(ids, collect)
        return collect


def init_module_weights(module: nn.Module, hidden_dim: int, generator: torch.Generator) -> None:
    """Seeded init: zero-mean normals at scale 1/sqrt(d), unit norm gains, zero biases.

    Walks submodules in registration order, so a fixed seed gives bit-identical
    parameters.
    """
    std = 1.0 / math.sqrt(hidden_dim)
    for sub in module.modules():
        if isinstance(sub, (nn.Linear, nn.Embedding)):
            sub.weight.data.normal_(0.0, std, generator=generator)
            if isinstance(sub, nn.Linear) and sub.bias is not None:
                sub.bias.data.zero_()
        elif isinstance(sub, nn.LayerNorm):
            sub.weight.data.fill_(1.0)
            sub.bias.data.zero_()
