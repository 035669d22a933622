"""Batch construction for estimation and validation.

Training batches are drawn so that their treatment exposure varies from
batch to batch, which gives the batch-level regressions something to learn
from. Validation batches are a deterministic partition of units ranked by
exposure.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .core import Batch, exposures
from .errors import ConfigurationError, EstimatorError


@dataclass(frozen=True)
class BatchParams:
    batch_size: int
    batch_count: int

    def __post_init__(self) -> None:
        if int(self.batch_size) < 1:
            raise ConfigurationError("batch_size must be a positive integer")
        if int(self.batch_count) < 1:
            raise ConfigurationError("batch_count must be a positive integer")

    def check(self, n_units: int) -> None:
        if self.batch_size > n_units:
            raise ConfigurationError(f"batch_size {self.batch_size} exceeds population size {n_units}")


def duration_order(W) -> np.ndarray:
    """Unit indices sorted by number of treated periods (ties by index)."""
    W = np.asarray(W)
    return np.argsort(W[:, 1:].sum(axis=1), kind="stable")


def systematic_starts(n_units: int, size: int, count: int) -> np.ndarray:
    span = n_units - size
    i = np.arange(count)
    return np.clip((i * span) // max(count - 1, 1), 0, span)


def _draw_one(order: np.ndarray, start: int, size: int, rng: np.random.Generator) -> np.ndarray:
    n = order.size
    systematic = order[start:start + size]
    r = int(rng.integers(n - size + 1))
    random_block = order[r:r + size]
    pool = np.union1d(systematic, random_block)
    prob = min(1.0, size / pool.size)
    keep = rng.random(pool.size) < prob
    return pool[keep]


def create_training_batches(W, params: BatchParams, rng: np.random.Generator) -> list[Batch]:
    """``params.batch_count`` batches with expected size ``params.batch_size``.

    Each batch pools a systematic block (evenly spaced through the
    duration-sorted units) with a uniformly placed block of the same size and
    then subsamples the pool to hit the target size on average.
    """
    W = np.asarray(W)
    n = W.shape[0]
    params.check(n)
    order = duration_order(W)
    starts = systematic_starts(n, params.batch_size, params.batch_count)
    batches = []
    for start in starts:
        idx = _draw_one(order, int(start), params.batch_size, rng)
        if idx.size == 0:
            idx = _draw_one(order, int(start), params.batch_size, rng)
        if idx.size == 0:
            raise EstimatorError("sampled an empty training batch twice; increase batch_size")
        batches.append(Batch(idx))
    return batches


def create_validation_batches(W, n_batches: int) -> list[Batch]:
    """Split units into ``n_batches`` contiguous groups by descending exposure.

    Group sizes differ by at most one, with the larger groups first. Equal
    exposures keep unit-index order.
    """
    W = np.asarray(W)
    n = W.shape[0]
    if not 1 <= n_batches <= n:
        raise ConfigurationError(f"number of validation batches must lie in [1, {n}], got {n_batches}")
    order = np.argsort(-exposures(W), kind="stable")
    return [Batch(part) for part in np.array_split(order, n_batches)]


def batches_to_json(batches: Sequence[Batch]) -> str:
    return json.dumps([b.to_list() for b in batches])


def save_batches(batches: Sequence[Batch], path) -> None:
    Path(path).write_text(batches_to_json(batches))


def load_batches(path) -> list[Batch]:
    return [Batch(np.asarray(ids, dtype=np.int64)) for ids in json.loads(Path(path).read_text())]
