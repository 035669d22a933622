"""Counterfactual cross-validation.

Each candidate (estimator, lag, batching, ridge penalty) is trained with one
time block hidden and asked to reproduce the observed means of fixed
validation batches inside that block, using the observed treatments as the
"counterfactual" target. Held-out segments from all folds are stitched into
a full-horizon series per validation batch and scored against the observed
batch means.
"""

from __future__ import annotations

import csv
import io
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Any, Callable, Sequence

import numpy as np

from .core import Batch, batch_means, rng_stream
from .dpnb import BatchParams, create_training_batches
from .errors import ConfigurationError, ContractError, EstimatorError, NetInterferenceError
from .estimators import DEFAULT_ALPHA, ESTIMATORS, FeatureSpec, run_estimator


@dataclass(frozen=True)
class CandidateConfig:
    """One point of the selection grid.

    Training batches are either ``batch_size`` units or ``batch_fraction`` of
    the population, ``batch_count`` of them; with neither set the estimator
    trains on the population alone.
    """

    estimator: str
    lag: int = 1
    batch_size: int | None = None
    batch_fraction: float | None = None
    batch_count: int = 1
    alpha: float = DEFAULT_ALPHA
    features: FeatureSpec | None = None

    def __post_init__(self) -> None:
        if self.estimator not in ESTIMATORS:
            raise ConfigurationError(f"unknown estimator {self.estimator!r}")
        if self.lag < 1:
            raise ConfigurationError("lag must be >= 1")
        if self.estimator in ("bcmp", "ho_rec") and self.lag != 1:
            raise ConfigurationError(f"{self.estimator} supports lag 1 only")
        if self.batch_size is not None and self.batch_fraction is not None:
            raise ConfigurationError("give batch_size or batch_fraction, not both")
        if self.batch_fraction is not None and not 0 < self.batch_fraction <= 1:
            raise ConfigurationError("batch_fraction must lie in (0, 1]")
        if self.alpha < 0:
            raise ConfigurationError("alpha must be nonnegative")

    def batch_params(self, n_units: int) -> BatchParams | None:
        if self.batch_size is not None:
            return BatchParams(self.batch_size, self.batch_count)
        if self.batch_fraction is not None:
            return BatchParams(max(1, int(round(self.batch_fraction * n_units))), self.batch_count)
        return None

    def label(self) -> str:
        parts = [self.estimator, f"l={self.lag}"]
        if self.batch_size is not None:
            parts.append(f"s={self.batch_size}")
        elif self.batch_fraction is not None:
            parts.append(f"s={self.batch_fraction:g}N")
        if self.batch_size is not None or self.batch_fraction is not None:
            parts.append(f"m={self.batch_count}")
        parts.append(f"alpha={self.alpha:g}")
        return " ".join(parts)

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        if self.features is not None:
            d["features"] = {"order": self.features.order, "phi": list(self.features.phi),
                             "psi": list(self.features.psi)}
        return d

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "CandidateConfig":
        d = dict(d)
        if d.get("features") is not None:
            f = d["features"]
            d["features"] = FeatureSpec(f.get("order", 2), tuple(f["phi"]) if "phi" in f else None,
                                        tuple(f["psi"]) if "psi" in f else None)
        return cls(**d)


def candidate_grid(estimators: Sequence[str], lags: Sequence[int] = (1,),
                   batch_fractions: Sequence[float | None] = (None,), batch_counts: Sequence[int] = (1,),
                   alphas: Sequence[float] = (DEFAULT_ALPHA,)) -> list[CandidateConfig]:
    """Cartesian grid in a fixed order.

    ``bcmp`` contributes a single unbatched least-squares entry and ``ho_rec``
    only lag 1; a ``None`` fraction means population-only training.
    """
    out = []
    for est in estimators:
        if est == "bcmp":
            out.append(CandidateConfig("bcmp", alpha=0.0))
            continue
        for lag in (lags if est != "ho_rec" else (1,)):
            for frac in batch_fractions:
                for m in (batch_counts if frac is not None else (1,)):
                    for a in alphas:
                        out.append(CandidateConfig(est, lag, None, frac, m, a))
    return list(dict.fromkeys(out))


@dataclass(frozen=True)
class TimeBlocks:
    """Contiguous half-open column ranges ``[a, b)`` covering ``0..T``."""

    bounds: tuple[tuple[int, int], ...]

    def __post_init__(self) -> None:
        b = tuple((int(a), int(c)) for a, c in self.bounds)
        if not b:
            raise ConfigurationError("need at least one time block")
        if b[0][0] != 0:
            raise ConfigurationError("time blocks must start at column 0")
        for (a, c), nxt in zip(b, b[1:] + ((None, None),)):
            if c <= a:
                raise ConfigurationError(f"empty time block [{a}, {c})")
            if nxt[0] is not None and nxt[0] != c:
                raise ConfigurationError("time blocks must be contiguous and disjoint")
        object.__setattr__(self, "bounds", b)

    @classmethod
    def from_edges(cls, edges: Sequence[int]) -> "TimeBlocks":
        return cls(tuple(zip(edges[:-1], edges[1:])))

    @classmethod
    def equal(cls, horizon: int, n_blocks: int = 3) -> "TimeBlocks":
        """Split columns ``0..horizon`` into ``n_blocks`` near-equal blocks (earlier ones larger)."""
        n_cols = horizon + 1
        if not 1 <= n_blocks <= n_cols:
            raise ConfigurationError(f"cannot split {n_cols} columns into {n_blocks} blocks")
        sizes = [len(part) for part in np.array_split(np.arange(n_cols), n_blocks)]
        return cls.from_edges(np.concatenate(([0], np.cumsum(sizes))).tolist())

    @property
    def n_cols(self) -> int:
        return self.bounds[-1][1]

    def check(self, n_cols: int) -> None:
        if self.n_cols != n_cols:
            raise ContractError(f"time blocks cover {self.n_cols} columns, panel has {n_cols}")

    def held_out_mask(self, k: int) -> np.ndarray:
        a, b = self.bounds[k]
        m = np.ones(self.n_cols, dtype=bool)
        m[a:b] = False
        return m

    def __len__(self) -> int:
        return len(self.bounds)


def reference_truth(panel, validation_batches: Sequence[Batch]) -> np.ndarray:
    """Observed mean of each validation batch in every period."""
    return batch_means(panel, validation_batches)


def mse_loss(truth, est) -> float:
    truth = np.asarray(truth, dtype=np.float64)
    est = np.asarray(est, dtype=np.float64)
    if truth.shape != est.shape:
        raise ContractError(f"shape mismatch: truth {truth.shape} vs estimate {est.shape}")
    return float(np.mean((truth - est) ** 2))


@dataclass
class CCVResult:
    candidates: list[CandidateConfig]
    losses: np.ndarray
    selected_index: int
    truth: np.ndarray                           # b_v x (T+1)
    estimates: list[np.ndarray | None]          # per candidate, b_v x (T+1)
    blocks: TimeBlocks
    diagnostics: dict[int, str] = field(default_factory=dict)

    @property
    def selected(self) -> CandidateConfig:
        return self.candidates[self.selected_index]

    def loss_table(self) -> list[dict[str, Any]]:
        return [
            {"index": i, "candidate": c.label(), "config": c.to_dict(),
             "loss": float(self.losses[i]) if np.isfinite(self.losses[i]) else None,
             "error": self.diagnostics.get(i)}
            for i, c in enumerate(self.candidates)
        ]

    def to_dict(self) -> dict[str, Any]:
        return {
            "selected_index": self.selected_index,
            "selected": self.selected.label(),
            "blocks": [list(b) for b in self.blocks.bounds],
            "losses": self.loss_table(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    def estimates_csv(self) -> str:
        """Per-fold held-out estimates in long form."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["candidate", "fold", "batch", "t", "estimate", "truth"])
        for i, est in enumerate(self.estimates):
            if est is None:
                continue
            for k, (a, b) in enumerate(self.blocks.bounds):
                for j in range(est.shape[0]):
                    for t in range(a, b):
                        w.writerow([i, k, j, t, f"{est[j, t]:.12g}", f"{self.truth[j, t]:.12g}"])
        return buf.getvalue()


def _evaluate_candidate(args) -> tuple[np.ndarray | None, str | None]:
    panel, W, cand, blocks, validation, seed, index = args
    n = panel.shape[0]
    try:
        params = cand.batch_params(n)
        train = None
        if params is not None and cand.estimator != "bcmp":
            train = create_training_batches(W, params, rng_stream(seed, "batches", index))
        out = np.empty((len(validation), panel.shape[1]))
        for k, (a, b) in enumerate(blocks.bounds):
            mask = blocks.held_out_mask(k)
            for j, vb in enumerate(validation):
                est = run_estimator(cand.estimator, panel, W, W, target_batch=vb, train_batches=train,
                                    lag=cand.lag, alpha=cand.alpha, spec=cand.features,
                                    observed_mask=mask, start=a)
                out[j, a:b] = est.series(batch=True)[a:b]
        if not np.all(np.isfinite(out)):
            return None, "non-finite estimates"
        return out, None
    except (NetInterferenceError, ValueError, np.linalg.LinAlgError) as exc:
        return None, f"{type(exc).__name__}: {exc}"


def run_ccv(panel, W, candidates: Sequence[CandidateConfig], blocks: TimeBlocks,
            validation_batches: Sequence[Batch], loss: Callable = mse_loss, seed: int = 0,
            threads: int = 1) -> CCVResult:
    """Score every candidate by leave-one-block-out reconstruction and pick the best.

    A candidate that fails on any fold gets an infinite loss and a
    diagnostic. Ties go to the earliest candidate.
    """
    Y = np.asarray(panel, dtype=np.float64)
    W = np.asarray(W, dtype=np.float64)
    if Y.shape != W.shape:
        raise ContractError("panel and treatment shapes differ")
    candidates = list(candidates)
    if not candidates:
        raise ConfigurationError("no candidates to evaluate")
    blocks.check(Y.shape[1])
    if len(blocks) < 2 and len(candidates) > 1:
        raise ConfigurationError("cross-validation needs at least two time blocks")
    truth = reference_truth(Y, validation_batches)
    jobs = [(Y, W, c, blocks, list(validation_batches), seed, i) for i, c in enumerate(candidates)]
    if threads > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_evaluate_candidate, jobs))
    else:
        results = [_evaluate_candidate(j) for j in jobs]

    losses = np.full(len(candidates), np.inf)
    diagnostics: dict[int, str] = {}
    estimates: list[np.ndarray | None] = []
    for i, (est, err) in enumerate(results):
        estimates.append(est)
        if est is None:
            diagnostics[i] = err
            continue
        value = loss(truth, est)
        losses[i] = value if np.isfinite(value) else np.inf
    if not np.isfinite(losses).any():
        raise EstimatorError("every candidate failed: " + "; ".join(f"[{i}] {m}" for i, m in diagnostics.items()))
    return CCVResult(candidates, losses, int(np.argmin(losses)), truth, estimates, blocks, diagnostics)
