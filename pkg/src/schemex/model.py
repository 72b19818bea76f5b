"""Model bundle (backbone + heads + vocabulary) and its file format.

The file layout is: 6-byte magic, little-endian u16 format version, u32
header length, a JSON header (config, vocabulary, named tensor manifest with
shapes/dtype/byte offsets), then raw little-endian tensor payloads in
manifest order. Doubles round-trip bit-exactly.
"""
from __future__ import annotations

import hashlib
import json
import struct
from pathlib import Path

import numpy as np
import torch
from torch import nn

from .encoder import DTYPE, Backbone, ModelConfig, init_module_weights
from .errors import BadMagic, SequenceTooLong, ShapeMismatch, TruncatedFile, VersionMismatch
from .heads import Heads
from .prompt import PromptPlan
from .tokenizer import NUM_SPECIALS, SPECIAL_TOKENS, Vocabulary

MAGIC = b"GLNR2\x00"
FORMAT_VERSION = 1

_NUMPY_DTYPES = {"f8": "<f8", "f4": "<f4"}


class ExtractionModel(nn.Module):
    """Backbone and heads over a fixed vocabulary.

    Parameters under ``backbone.`` take the backbone learning rate during
    training; everything under ``heads.`` takes the head rate. Inference never
    mutates parameters, so a loaded model can serve concurrent callers;
    ``encode_calls`` counts forward passes for the single-pass contract tests.
    """

    def __init__(self, cfg: ModelConfig, vocab: Vocabulary):
        super().__init__()
        cfg.validate()
        if cfg.vocab_size != vocab.size:
            raise ValueError(
                f"config vocab_size={cfg.vocab_size} does not match vocabulary of {vocab.size}"
            )
        self.cfg = cfg
        self.vocab = vocab
        self.backbone = Backbone(cfg)
        self.heads = Heads(cfg)
        self.encode_calls = 0

    def encode(self, plan: PromptPlan) -> torch.Tensor:
        """One full-attention forward pass over the plan; returns [L, d]."""
        if len(plan) > self.cfg.max_positions:
            raise SequenceTooLong(
                f"plan of {len(plan)} tokens exceeds max_positions={self.cfg.max_positions}"
            )
        self.encode_calls += 1
        ids = torch.tensor(plan.ids, dtype=torch.long)
        return self.backbone(ids)


def init_params(cfg: ModelConfig, vocab: Vocabulary) -> ExtractionModel:
    """Fresh model with seeded zero-mean init (scale 1/sqrt(d))."""
    model = ExtractionModel(cfg, vocab)
    generator = torch.Generator().manual_seed(cfg.seed)
    init_module_weights(model, cfg.hidden_dim, generator)
    return model


def save_model(model: ExtractionModel, path: str | Path) -> None:
    manifest = []
    payloads = []
    offset = 0
    for name, param in model.named_parameters():
        data = param.detach().numpy().astype("<f8")
        raw = data.tobytes()
        manifest.append(
            {
                "name": name,
                "shape": list(param.shape),
                "dtype": "f8",
                "offset": offset,
                "nbytes": len(raw),
            }
        )
        payloads.append(raw)
        offset += len(raw)

    header = {
        "config": model.cfg.to_dict(),
        "vocab": list(model.vocab.id_to_token),
        "tensors": manifest,
    }
    header_raw = json.dumps(header).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<H", FORMAT_VERSION))
        fh.write(struct.pack("<I", len(header_raw)))
        fh.write(header_raw)
        for raw in payloads:
            fh.write(raw)


def load_model(path: str | Path) -> ExtractionModel:
    blob = Path(path).read_bytes()
    if len(blob) < len(MAGIC) + 6 or blob[: len(MAGIC)] != MAGIC:
        raise BadMagic(f"{path} is not a model file")
    (version,) = struct.unpack_from("<H", blob, len(MAGIC))
    if version != FORMAT_VERSION:
        raise VersionMismatch(f"format version {version}, expected {FORMAT_VERSION}")
    (header_len,) = struct.unpack_from("<I", blob, len(MAGIC) + 2)
    header_start = len(MAGIC) + 6
    if header_start + header_len > len(blob):
        raise TruncatedFile("header extends past end of file")
    try:
        header = json.loads(blob[header_start : header_start + header_len])
        cfg = ModelConfig.from_dict(header["config"])
        tokens = header["vocab"]
        manifest = header["tensors"]
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise TruncatedFile(f"unreadable model header: {exc}") from exc
    if tuple(tokens[:NUM_SPECIALS]) != SPECIAL_TOKENS:
        raise TruncatedFile("vocabulary does not start with the reserved tokens")

    vocab = Vocabulary.from_tokens(tokens[NUM_SPECIALS:])
    model = ExtractionModel(cfg, vocab)

    params = dict(model.named_parameters())
    names = [entry.get("name") for entry in manifest]
    if sorted(names) != sorted(params):
        raise TruncatedFile(
            f"tensor manifest lists {len(names)} tensors, model needs {len(params)}"
        )
    payload = blob[header_start + header_len :]
    for entry in manifest:
        param = params[entry["name"]]
        if list(param.shape) != list(entry["shape"]):
            raise ShapeMismatch(
                f"{entry['name']}: file has {entry['shape']}, model needs {list(param.shape)}"
            )
        np_dtype = _NUMPY_DTYPES.get(entry["dtype"])
        if np_dtype is None:
            raise ShapeMismatch(f"{entry['name']}: unsupported dtype {entry['dtype']!r}")
        start, nbytes = entry["offset"], entry["nbytes"]
        if start + nbytes > len(payload):
            raise TruncatedFile(f"{entry['name']}: payload ends early")
        arr = np.frombuffer(payload[start : start + nbytes], dtype=np_dtype)
        if arr.size != param.numel():
            raise ShapeMismatch(f"{entry['name']}: payload size does not match shape")
        with torch.no_grad():
            param.copy_(torch.from_numpy(arr.astype("=f8").reshape(param.shape)).to(DTYPE))
    return model


def model_file_hash(path: str | Path) -> str:
    """Stable identifier for a model file (sha256 of its bytes)."""
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()
