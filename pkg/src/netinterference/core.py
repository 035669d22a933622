"""Panel data model, experimental designs and basic estimands.

Treatment matrices and outcome panels are ``N x (T+1)`` arrays: one row per
unit, one column per period, with column 0 reserved for the all-control
initial period. The wrappers below validate once and then behave like plain
(read-only) numpy arrays, so every function in the package also accepts raw
``ndarray`` inputs.
"""

from __future__ import annotations

import csv
import json
import zlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from .errors import ConfigurationError, ContractError


def rng_stream(seed: int, name: str, *keys: int) -> np.random.Generator:
    """Independent generator for a named stream, e.g. ``("world", 3)``.

    Streams with different names or keys are statistically independent and
    the mapping is stable across processes and Python versions.
    """
    spawn_key = (zlib.crc32(name.encode()),) + tuple(int(k) for k in keys)
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=spawn_key))


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=np.float64, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class TreatmentMatrix:
    """Binary ``N x (T+1)`` assignment matrix with an all-zero column 0."""

    values: np.ndarray

    def __post_init__(self) -> None:
        v = np.asarray(self.values)
        if v.ndim != 2 or v.shape[0] < 1 or v.shape[1] < 2:
            raise ContractError(f"treatment matrix must be N x (T+1) with T >= 1, got shape {v.shape}")
        if not np.all((v == 0) | (v == 1)):
            raise ContractError("treatment entries must be 0 or 1")
        if np.any(v[:, 0] != 0):
            raise ContractError("column 0 of a treatment matrix must be all zeros")
        object.__setattr__(self, "values", _frozen(v))

    @property
    def n_units(self) -> int:
        return self.values.shape[0]

    @property
    def horizon(self) -> int:
        return self.values.shape[1] - 1

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)

    def period_means(self) -> np.ndarray:
        return self.values.mean(axis=0)


@dataclass(frozen=True)
class OutcomePanel:
    """Finite real ``N x (T+1)`` outcome panel."""

    values: np.ndarray

    def __post_init__(self) -> None:
        v = np.asarray(self.values, dtype=np.float64)
        if v.ndim != 2 or v.shape[1] < 1:
            raise ContractError(f"outcome panel must be 2-D, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ContractError("outcome panel contains NaN or inf")
        object.__setattr__(self, "values", _frozen(v))

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)

    def period_means(self) -> np.ndarray:
        return self.values.mean(axis=0)


@dataclass(frozen=True)
class ExperimentDesign:
    """Staged Bernoulli design: stage ``k`` lasts ``stage_lengths[k]`` periods.

    With ``monotone=True`` a unit stays treated once it is first treated
    (staggered adoption); by default each period is an independent draw.
    """

    stage_lengths: tuple[int, ...]
    stage_probs: tuple[float, ...]
    monotone: bool = False

    def __post_init__(self) -> None:
        lengths = tuple(int(x) for x in self.stage_lengths)
        probs = tuple(float(p) for p in self.stage_probs)
        if not lengths:
            raise ConfigurationError("design needs at least one stage")
        if len(lengths) != len(probs):
            raise ConfigurationError(
                f"stage_lengths ({len(lengths)}) and stage_probs ({len(probs)}) differ in length"
            )
        if any(x < 1 for x in lengths):
            raise ConfigurationError("stage lengths must be positive")
        if any(not 0.0 <= p <= 1.0 for p in probs):
            raise ConfigurationError("stage probabilities must lie in [0, 1]")
        object.__setattr__(self, "stage_lengths", lengths)
        object.__setattr__(self, "stage_probs", probs)

    @property
    def horizon(self) -> int:
        return sum(self.stage_lengths)

    def probs_per_period(self) -> np.ndarray:
        """Marginal treatment probability for columns ``0..T`` (column 0 is 0)."""
        return np.concatenate([[0.0], np.repeat(self.stage_probs, self.stage_lengths)])

    def stage_of_period(self) -> np.ndarray:
        """Stage index for columns ``0..T``; column 0 gets -1."""
        return np.concatenate([[-1], np.repeat(np.arange(len(self.stage_lengths)), self.stage_lengths)])

    def to_dict(self) -> dict[str, Any]:
        return {
            "stage_lengths": list(self.stage_lengths),
            "stage_probs": list(self.stage_probs),
            "monotone": self.monotone,
        }


@dataclass(frozen=True)
class Batch:
    """A sorted, duplicate-free, nonempty subset of unit indices."""

    indices: np.ndarray

    def __post_init__(self) -> None:
        idx = np.asarray(self.indices, dtype=np.int64).ravel()
        if idx.size == 0:
            raise ContractError("batch must be nonempty")
        if np.any(idx < 0):
            raise ContractError("batch indices must be nonnegative")
        uniq = np.unique(idx)
        if uniq.size != idx.size:
            raise ContractError("batch indices contain duplicates")
        uniq.setflags(write=False)
        object.__setattr__(self, "indices", uniq)

    def __len__(self) -> int:
        return int(self.indices.size)

    def check(self, n_units: int) -> None:
        if self.indices[-1] >= n_units:
            raise ContractError(f"batch index {self.indices[-1]} out of range for {n_units} units")

    def exposure(self, W) -> np.ndarray:
        """Per-period mean treatment over the batch."""
        W = np.asarray(W)
        self.check(W.shape[0])
        return W[self.indices].mean(axis=0)

    def to_list(self) -> list[int]:
        return [int(i) for i in self.indices]


def full_batch(n_units: int) -> Batch:
    return Batch(np.arange(n_units))


def generate_staggered_design(n_units: int, design: ExperimentDesign, seed: int,
                              replicate: int | None = None) -> TreatmentMatrix:
    """Draw a treatment matrix for ``design``; deterministic in ``(seed, replicate)``.

    ``replicate`` selects an independent re-randomization under the same seed,
    used when resampling treatments against a fixed world.
    """
    if n_units < 1:
        raise ConfigurationError("n_units must be >= 1")
    if not isinstance(design, ExperimentDesign):
        raise ConfigurationError("design must be an ExperimentDesign")
    keys = () if replicate is None else (replicate,)
    rng = rng_stream(seed, "treatment", *keys)
    probs = design.probs_per_period()
    W = (rng.random((n_units, probs.size)) < probs).astype(np.float64)
    W[:, 0] = 0.0
    if design.monotone:
        W = np.maximum.accumulate(W, axis=1)
    return TreatmentMatrix(W)


def _check_period(t: int, n_cols: int) -> int:
    if not 0 <= t < n_cols:
        raise IndexError(f"period {t} out of range [0, {n_cols - 1}]")
    return t


def batch_mean(panel, batch: Batch, t: int) -> float:
    """Mean of the panel over ``batch`` at period ``t``."""
    Y = np.asarray(panel)
    _check_period(t, Y.shape[1])
    batch.check(Y.shape[0])
    return float(Y[batch.indices, t].mean())


def batch_means(panel, batches: Sequence[Batch]) -> np.ndarray:
    """``len(batches) x (T+1)`` table of batch means for every period."""
    Y = np.asarray(panel)
    out = np.empty((len(batches), Y.shape[1]))
    for j, b in enumerate(batches):
        b.check(Y.shape[0])
        out[j] = Y[b.indices].mean(axis=0)
    return out


def compute_tte(panel_all_treat, panel_all_control, L: int) -> float:
    """Average total treatment effect over the last ``L`` periods."""
    Y1 = np.asarray(panel_all_treat, dtype=np.float64)
    Y0 = np.asarray(panel_all_control, dtype=np.float64)
    if Y1.shape != Y0.shape:
        raise ContractError(f"panel shapes differ: {Y1.shape} vs {Y0.shape}")
    T = Y1.shape[1] - 1
    if not 1 <= L <= T:
        raise ContractError(f"window L={L} must satisfy 1 <= L <= T={T}")
    return float((Y1[:, T - L + 1 :] - Y0[:, T - L + 1 :]).mean())


def exposures(W) -> np.ndarray:
    """Fraction of periods ``1..T`` each unit is treated."""
    W = np.asarray(W)
    return W[:, 1:].mean(axis=1)


def treatment_exposure(W, unit: int) -> float:
    W = np.asarray(W)
    if not 0 <= unit < W.shape[0]:
        raise IndexError(f"unit {unit} out of range")
    return float(W[unit, 1:].mean())


def all_level_matrix(n_units: int, horizon: int, level: int) -> TreatmentMatrix:
    """All-treat (``level=1``) or all-control matrix; column 0 stays zero."""
    W = np.full((n_units, horizon + 1), float(level))
    W[:, 0] = 0.0
    return TreatmentMatrix(W)


# --------------------------------------------------------------------------
# serialization


def save_csv(array_like, path) -> None:
    """Write a panel or treatment matrix; header row ``t0..tT``."""
    a = np.asarray(array_like, dtype=np.float64)
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"t{t}" for t in range(a.shape[1])])
        for row in a:
            writer.writerow([repr(float(x)) for x in row])


def load_csv(path) -> np.ndarray:
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise ContractError(f"{path}: empty file")
        expected = [f"t{t}" for t in range(len(header))]
        if header != expected:
            raise ContractError(f"{path}: header must be t0..tT, got {header[:3]}...")
        rows = [[float(x) for x in row] for row in reader if row]
    return np.array(rows, dtype=np.float64).reshape(len(rows), len(header))


def to_envelope(array_like, kind: str, seed: int | None = None, design: ExperimentDesign | None = None,
                **metadata: Any) -> dict[str, Any]:
    a = np.asarray(array_like, dtype=np.float64)
    return {
        "kind": kind,
        "shape": list(a.shape),
        "seed": seed,
        "design": design.to_dict() if design is not None else None,
        "metadata": metadata,
        "values": a.tolist(),
    }


def save_json(array_like, path, kind: str, seed: int | None = None,
              design: ExperimentDesign | None = None, **metadata: Any) -> None:
    env = to_envelope(array_like, kind, seed=seed, design=design, **metadata)
    Path(path).write_text(json.dumps(env, sort_keys=True))


def load_json(path) -> tuple[Any, dict[str, Any]]:
    """Return ``(TreatmentMatrix | OutcomePanel, envelope)`` from a JSON envelope."""
    env = json.loads(Path(path).read_text())
    values = np.array(env["values"], dtype=np.float64).reshape(env["shape"])
    obj = TreatmentMatrix(values) if env.get("kind") == "treatment" else OutcomePanel(values)
    return obj, env
