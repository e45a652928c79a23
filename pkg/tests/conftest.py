"""Shared fixtures: the canonical desk-scale experiment.

One 2-16-16-2 network trained on softly overlapping 2-D blobs. Every trend
assertion in the suite runs against this exact configuration; the seeds pin
every number, so the whole suite is deterministic.
"""

from __future__ import annotations

import pytest

from gnconvert import TrainConfig, ann_to_snn, gaussian_blobs, replace_if_with_gn, train

TRAIN_BLOBS = dict(n_samples=512, std=1.0, seed=11)
EVAL_BLOBS = dict(n_samples=512, std=1.0, seed=12)
DESK_CONFIG = TrainConfig(
    architecture=(2, 16, 16, 2),
    levels=64,
    epochs=80,
    learning_rate=0.1,
    batch_size=32,
    seed=8,
)


@pytest.fixture(scope="session")
def train_blobs():
    return gaussian_blobs(**TRAIN_BLOBS)


@pytest.fixture(scope="session")
def eval_blobs():
    return gaussian_blobs(**EVAL_BLOBS)


@pytest.fixture(scope="session")
def desk_model(train_blobs):
    return train(train_blobs, DESK_CONFIG)


@pytest.fixture(scope="session")
def desk_if(desk_model):
    return ann_to_snn(desk_model)


@pytest.fixture(scope="session")
def desk_gn4(desk_if):
    return replace_if_with_gn(desk_if, 4)
