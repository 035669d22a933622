"""Recursive estimator over means and central moments."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations_with_replacement
from typing import Sequence

import numpy as np

from ..core import Batch, full_batch
from ..errors import ConfigurationError, ContractError, EstimatorError
from .cmp import DEFAULT_ALPHA, EstimateSeries, _mask
from .ridge import ridge_fit


def _variables(order: int) -> list[str]:
    return ["mean"] + [f"m{k}" for k in range(2, order + 1)] + ["p"]


def polynomial_features(order: int, degree: int = 2, constant: bool = True) -> tuple[str, ...]:
    """All monomials up to ``degree`` in the mean, central moments and treatment mean."""
    names = ["1"] if constant else []
    for d in range(1, degree + 1):
        names += ["*".join(c) for c in combinations_with_replacement(_variables(order), d)]
    return tuple(names)


@dataclass(frozen=True)
class FeatureSpec:
    """Feature lists for the population (``phi``) and batch (``psi``) maps.

    A feature is a ``*``-joined product of ``1``, ``mean``, ``p`` and
    ``m2``..``m{order}`` (central moments). Only ``phi`` should carry the
    constant, otherwise the two maps share an intercept.
    """

    order: int = 2
    phi: tuple[str, ...] = field(default=None)
    psi: tuple[str, ...] = field(default=None)

    def __post_init__(self) -> None:
        if self.order < 2:
            raise ConfigurationError("moment order must be >= 2")
        if self.phi is None:
            object.__setattr__(self, "phi", polynomial_features(self.order, 2, constant=True))
        if self.psi is None:
            object.__setattr__(self, "psi", polynomial_features(self.order, 2, constant=False))
        allowed = set(_variables(self.order)) | {"1"}
        for name in (*self.phi, *self.psi):
            bad = [f for f in name.split("*") if f not in allowed]
            if bad:
                raise ConfigurationError(f"unknown feature factor(s) {bad} in {name!r}")
        if not self.phi or not self.psi:
            raise ConfigurationError("feature lists must be nonempty")

    @property
    def state_names(self) -> list[str]:
        return ["mean"] + [f"m{k}" for k in range(2, self.order + 1)]


def moment_stats(Y: np.ndarray, order: int) -> np.ndarray:
    """``(order) x (T+1)`` table: the mean, then central moments 2..order."""
    mean = Y.mean(axis=0)
    dev = Y - mean
    return np.vstack([mean] + [(dev**k).mean(axis=0) for k in range(2, order + 1)])


def _evaluate(features: Sequence[str], state: np.ndarray, p: float, order: int) -> np.ndarray:
    values = {"1": 1.0, "mean": state[0], "p": p}
    for k in range(2, order + 1):
        values[f"m{k}"] = state[k - 1]
    out = np.empty(len(features))
    for i, name in enumerate(features):
        prod = 1.0
        for f in name.split("*"):
            prod *= values[f]
        out[i] = prod
    return out


def ho_recursive(panel, W_obs, W_target, target_batch: Batch | None = None,
                 train_batches: Sequence[Batch] | None = None, spec: FeatureSpec | None = None,
                 alpha: float = DEFAULT_ALPHA, observed_mask=None, start: int = 0) -> EstimateSeries:
    """Jointly roll the mean and central moments forward under ``W_target``.

    A multi-output ridge fit maps population features at ``t`` (with the
    treatment mean at ``t+1``) plus batch features to the batch's next
    ``(mean, m2, ..., m_order)``.
    """
    spec = FeatureSpec() if spec is None else spec
    Y = np.asarray(panel, dtype=np.float64)
    W = np.asarray(W_obs, dtype=np.float64)
    Wt = np.asarray(W_target, dtype=np.float64)
    if Y.shape != W.shape or W.shape != Wt.shape:
        raise ContractError("panel and treatment shapes differ")
    if not np.array_equal(W[:, 0], Wt[:, 0]):
        raise ContractError("observed and target treatments must agree on column 0")
    n, n_cols = Y.shape
    m = spec.order
    mask = _mask(observed_mask, n_cols)
    target_batch = full_batch(n) if target_batch is None else target_batch
    train_batches = [full_batch(n)] if not train_batches else list(train_batches)

    pop = moment_stats(Y, m)
    pop_p = W.mean(axis=0)
    rows, targets = [], []
    for b in train_batches:
        b.check(n)
        bs = moment_stats(Y[b.indices], m)
        bp = W[b.indices].mean(axis=0)
        for t in range(n_cols - 1):
            if mask[t] and mask[t + 1]:
                rows.append(np.concatenate((_evaluate(spec.phi, pop[:, t], pop_p[t + 1], m),
                                            _evaluate(spec.psi, bs[:, t], bp[t + 1], m))))
                targets.append(bs[:, t + 1])
    if not rows:
        raise EstimatorError("no usable transitions to fit")
    X, Ymat = np.asarray(rows), np.asarray(targets)
    unpenalized = [i for i, f in enumerate(spec.phi) if f == "1"]
    theta = ridge_fit(X, Ymat, alpha, unpenalized=unpenalized)
    k_phi = len(spec.phi)
    theta_g, theta_h = theta[:k_phi].T, theta[k_phi:].T

    target_batch.check(n)
    tb = moment_stats(Y[target_batch.indices], m)
    pop_t = Wt.mean(axis=0)
    tb_t = Wt[target_batch.indices].mean(axis=0)
    first = max(int(start), 1)
    est, est_b = pop.copy(), tb.copy()
    for t in range(first, n_cols):
        r_g = theta_g @ _evaluate(spec.phi, est[:, t - 1], pop_t[t], m)
        est[:, t] = r_g + theta_h @ _evaluate(spec.psi, est[:, t - 1], pop_t[t], m)
        est_b[:, t] = r_g + theta_h @ _evaluate(spec.psi, est_b[:, t - 1], tb_t[t], m)
    params = {"order": m, "phi": list(spec.phi), "psi": list(spec.psi),
              "theta_g": theta_g.tolist(), "theta_h": theta_h.tolist()}
    return EstimateSeries(est[0], "ho_rec", 1, est_b[0], pop_t, params,
                          {"moments": est[1:], "batch_moments": est_b[1:]})
