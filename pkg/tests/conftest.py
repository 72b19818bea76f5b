"""Shared fixtures: corpora, vocabularies and models (trained and untrained)."""
from __future__ import annotations

import pytest

from schemex.datagen import generate_synthetic, vocab_corpus
from schemex.encoder import ModelConfig
from schemex.model import init_params
from schemex.tokenizer import build_vocab
from schemex.training import TrainConfig, train

TRAIN_SEED = 1
TRAIN_SIZE = 200


@pytest.fixture(scope="session")
def corpus():
    return generate_synthetic(TRAIN_SEED, TRAIN_SIZE)


@pytest.fixture(scope="session")
def vocab(corpus):
    return build_vocab(vocab_corpus(corpus), max_size=2000)


@pytest.fixture(scope="session")
def fresh_model(corpus, vocab):
    """Untrained desk-config model (immutable: tests must not train it)."""
    return init_params(ModelConfig(vocab_size=vocab.size, seed=0), vocab)


@pytest.fixture(scope="session")
def trained(corpus, vocab):
    """The overfit desk model used by the acceptance and service tests."""
    import time

    model = init_params(ModelConfig(vocab_size=vocab.size, seed=0), vocab)
    start = time.perf_counter()
    model, trace = train(model, corpus, TrainConfig())
    seconds = time.perf_counter() - start
    return model, trace, seconds
