"""Causal message-passing estimators built on a first-order mean recursion.

All estimators share one data model: period means of the outcome panel (for
the population and for each training batch) follow

    ybar^B_{t} = b + sum_j c_gj ybar_{t-j} + d_g p_t + e_g p_t ybar_{t-1}
                   + sum_j c_hj ybar^B_{t-j} + d_h p^B_t + e_h p^B_t ybar^B_{t-1}

where the ``g`` terms use population quantities and the ``h`` terms use the
batch's own. The coefficients are fitted by ridge regression on rows pooled
over batches and periods, then used to roll counterfactual means forward
under a target treatment matrix.

Two optional arguments support cross-validation. ``observed_mask`` marks the
periods whose data may be used (design rows only use windows lying entirely
inside it), and ``start`` is the first period to estimate; earlier periods
are copied from observed means.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from ..core import Batch, full_batch
from ..errors import ContractError, EstimatorError
from .ridge import ridge_fit

DEFAULT_ALPHA = 1e-4


# --------------------------------------------------------------------------
# fitted parameters and results


def coefficient_names(lag: int) -> list[str]:
    lags = [f"lag{k}" for k in range(lag, 0, -1)]
    return (["const"]
            + [f"pop_mean_{s}" for s in lags] + ["pop_treat", "pop_treat_x_mean_lag1"]
            + [f"batch_mean_{s}" for s in lags] + ["batch_treat", "batch_treat_x_mean_lag1"])


@dataclass(frozen=True)
class SEParams:
    """Fitted recursion coefficients in design-column order.

    Lag coefficients run from the oldest lag to the most recent one.
    """

    coef: np.ndarray
    lag: int

    def __post_init__(self) -> None:
        coef = np.asarray(self.coef, dtype=np.float64).ravel()
        if self.lag < 1:
            raise ContractError("lag must be >= 1")
        if coef.size != 2 * self.lag + 5:
            raise ContractError(f"expected {2 * self.lag + 5} coefficients for lag {self.lag}, got {coef.size}")
        coef.setflags(write=False)
        object.__setattr__(self, "coef", coef)

    @property
    def b(self) -> float:
        return float(self.coef[0])

    @property
    def c_g(self) -> np.ndarray:
        return self.coef[1:1 + self.lag]

    @property
    def d_g(self) -> float:
        return float(self.coef[1 + self.lag])

    @property
    def e_g(self) -> float:
        return float(self.coef[2 + self.lag])

    @property
    def c_h(self) -> np.ndarray:
        return self.coef[3 + self.lag:3 + 2 * self.lag]

    @property
    def d_h(self) -> float:
        return float(self.coef[3 + 2 * self.lag])

    @property
    def e_h(self) -> float:
        return float(self.coef[4 + 2 * self.lag])

    def g_part(self, lags: np.ndarray, p: float) -> float:
        """Population terms; ``lags`` holds the last ``lag`` means, oldest first."""
        return float(self.c_g @ lags + self.d_g * p + self.e_g * p * lags[-1])

    def h_part(self, lags: np.ndarray, p: float) -> float:
        return float(self.c_h @ lags + self.d_h * p + self.e_h * p * lags[-1])

    def to_dict(self) -> dict[str, Any]:
        return {"lag": self.lag, "columns": coefficient_names(self.lag), "coef": [float(c) for c in self.coef]}

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "SEParams":
        if d.get("columns", coefficient_names(d["lag"])) != coefficient_names(d["lag"]):
            raise ContractError("column order does not match this version's design layout")
        return cls(np.asarray(d["coef"]), int(d["lag"]))


@dataclass(frozen=True)
class EstimateSeries:
    """Counterfactual mean series for the population and, optionally, a batch."""

    values: np.ndarray
    estimator: str
    lag: int = 1
    batch_values: np.ndarray | None = None
    target_means: np.ndarray | None = None
    params: Any = None
    extras: dict[str, Any] = field(default_factory=dict)

    @property
    def horizon(self) -> int:
        return self.values.size - 1

    def series(self, batch: bool = False) -> np.ndarray:
        if batch and self.batch_values is not None:
            return self.batch_values
        return self.values

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "estimator": self.estimator,
            "lag": self.lag,
            "values": [float(v) for v in self.values],
        }
        if self.batch_values is not None:
            out["batch_values"] = [float(v) for v in self.batch_values]
        if self.target_means is not None:
            out["target_means"] = [float(v) for v in self.target_means]
        if isinstance(self.params, SEParams):
            out["params"] = self.params.to_dict()
        elif self.params is not None:
            out["params"] = self.params
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


# --------------------------------------------------------------------------
# input handling


@dataclass
class _Inputs:
    pop_y: np.ndarray
    pop_p: np.ndarray
    pop_target: np.ndarray
    tb_y: np.ndarray
    tb_p: np.ndarray
    tb_target: np.ndarray
    train_y: np.ndarray     # b x (T+1)
    train_p: np.ndarray
    mask: np.ndarray        # usable periods
    first: int              # first estimated period


def target_with_prefix(W_obs, W_target, lag: int) -> np.ndarray:
    """``W_target`` with its first ``lag`` columns copied from ``W_obs``.

    Estimators copy observed means before period ``lag``, so targets must
    agree with the observed assignment there.
    """
    W_target = np.array(W_target, dtype=np.float64, copy=True)
    W_target[:, :lag] = np.asarray(W_obs)[:, :lag]
    return W_target


def _mask(observed_mask, n_cols: int) -> np.ndarray:
    if observed_mask is None:
        return np.ones(n_cols, dtype=bool)
    m = np.asarray(observed_mask, dtype=bool)
    if m.shape != (n_cols,):
        raise ContractError(f"observed_mask must have length {n_cols}")
    return m


def _prepare(panel, W_obs, W_target, target_batch, train_batches, lag, observed_mask, start) -> _Inputs:
    Y = np.asarray(panel, dtype=np.float64)
    W = np.asarray(W_obs, dtype=np.float64)
    Wt = np.asarray(W_target, dtype=np.float64)
    if Y.shape != W.shape or W.shape != Wt.shape:
        raise ContractError(f"panel {Y.shape}, observed {W.shape} and target {Wt.shape} shapes differ")
    n, n_cols = Y.shape
    T = n_cols - 1
    if not 1 <= lag <= T:
        raise ContractError(f"lag {lag} must lie in [1, {T}]")
    if not np.array_equal(W[:, :lag], Wt[:, :lag]):
        raise ContractError(f"observed and target treatments must agree on the first {lag} columns")
    if not 0 <= start <= n_cols:
        raise ContractError(f"start {start} out of range")
    target_batch = full_batch(n) if target_batch is None else target_batch
    train_batches = [full_batch(n)] if not train_batches else list(train_batches)
    for b in [target_batch, *train_batches]:
        b.check(n)
    idx = target_batch.indices
    return _Inputs(
        pop_y=Y.mean(axis=0), pop_p=W.mean(axis=0), pop_target=Wt.mean(axis=0),
        tb_y=Y[idx].mean(axis=0), tb_p=W[idx].mean(axis=0), tb_target=Wt[idx].mean(axis=0),
        train_y=np.stack([Y[b.indices].mean(axis=0) for b in train_batches]),
        train_p=np.stack([W[b.indices].mean(axis=0) for b in train_batches]),
        mask=_mask(observed_mask, n_cols),
        first=max(int(start), lag),
    )


def _usable_targets(mask: np.ndarray, lag: int) -> list[int]:
    """Periods ``t >= lag`` whose window ``t-lag..t`` lies inside ``mask``."""
    return [t for t in range(lag, mask.size) if mask[t - lag:t + 1].all()]


# --------------------------------------------------------------------------
# regression


def build_design_rows(pop_means, batch_means, pop_p, batch_p, lag: int,
                      observed_mask=None) -> tuple[np.ndarray, np.ndarray]:
    """Stack regression rows for every batch and usable period.

    Rows are ordered batch-major. Columns follow :func:`coefficient_names`.
    """
    pop_means = np.asarray(pop_means, dtype=np.float64)
    pop_p = np.asarray(pop_p, dtype=np.float64)
    bm = np.atleast_2d(np.asarray(batch_means, dtype=np.float64))
    bp = np.atleast_2d(np.asarray(batch_p, dtype=np.float64))
    n_cols = pop_means.size
    if pop_p.shape != (n_cols,) or bm.shape[1] != n_cols or bp.shape != bm.shape:
        raise ContractError("population and batch series must all have the same length")
    if n_cols < lag + 1:
        raise ContractError(f"series of length {n_cols} too short for lag {lag}")
    periods = _usable_targets(_mask(observed_mask, n_cols), lag)
    rows, targets = [], []
    for j in range(bm.shape[0]):
        for t in periods:
            rows.append(np.concatenate((
                [1.0],
                pop_means[t - lag:t], [pop_p[t], pop_p[t] * pop_means[t - 1]],
                bm[j, t - lag:t], [bp[j, t], bp[j, t] * bm[j, t - 1]],
            )))
            targets.append(bm[j, t])
    k = 2 * lag + 5
    if not rows:
        return np.empty((0, k)), np.empty(0)
    return np.asarray(rows), np.asarray(targets)


def fit_se_params(pop_means, batch_means, pop_p, batch_p, lag: int, alpha: float = DEFAULT_ALPHA,
                  observed_mask=None, intercept: bool = True) -> SEParams:
    X, y = build_design_rows(pop_means, batch_means, pop_p, batch_p, lag, observed_mask)
    if X.shape[0] == 0:
        raise EstimatorError("no usable design rows; training window shorter than the lag")
    treat_cols = X[:, [1 + lag, 3 + 2 * lag]]
    if np.ptp(treat_cols, axis=0).max() == 0:
        raise EstimatorError("treatment means do not vary across training rows; treatment effects are not identifiable")
    if intercept:
        coef = ridge_fit(X, y, alpha, unpenalized=(0,))
    else:
        coef = np.concatenate(([0.0], ridge_fit(X[:, 1:], y, alpha)))
    return SEParams(coef, lag)


def _fit(inp: _Inputs, lag: int, alpha: float, intercept: bool = True) -> SEParams:
    return fit_se_params(inp.pop_y, inp.train_y, inp.pop_p, inp.train_p, lag, alpha, inp.mask, intercept)


# --------------------------------------------------------------------------
# estimators


def _reference(params: SEParams, inp: _Inputs) -> tuple[np.ndarray, np.ndarray]:
    """Observed means where usable, one-step model predictions elsewhere."""
    l = params.lag
    known = inp.mask.copy()
    known[:inp.first] = True
    ref, ref_b = inp.pop_y.copy(), inp.tb_y.copy()
    for t in range(l, ref.size):
        if known[t]:
            continue
        g = params.g_part(ref[t - l:t], inp.pop_p[t])
        ref[t] = params.b + g + params.h_part(ref[t - l:t], inp.pop_p[t])
        ref_b[t] = params.b + g + params.h_part(ref_b[t - l:t], inp.tb_p[t])
    return ref, ref_b


def fo_semi_recursive(panel, W_obs, W_target, target_batch: Batch | None = None,
                      train_batches: Sequence[Batch] | None = None, lag: int = 1,
                      alpha: float = DEFAULT_ALPHA, observed_mask=None, start: int = 0) -> EstimateSeries:
    """Observed means corrected by the fitted effect of switching to the target.

    Each step adds the change in the fitted ``g`` and ``h`` terms when the
    observed treatment means and outcome history are replaced by the target
    ones; with ``W_target == W_obs`` every correction vanishes.
    """
    inp = _prepare(panel, W_obs, W_target, target_batch, train_batches, lag, observed_mask, start)
    params = _fit(inp, lag, alpha)
    ref, ref_b = _reference(params, inp)
    est, est_b = ref.copy(), ref_b.copy()
    l = lag
    for t in range(inp.first, est.size):
        r_g = (params.g_part(est[t - l:t], inp.pop_target[t])
               - params.g_part(ref[t - l:t], inp.pop_p[t]))
        r_h = (params.h_part(est[t - l:t], inp.pop_target[t])
               - params.h_part(ref[t - l:t], inp.pop_p[t]))
        r_hb = (params.h_part(est_b[t - l:t], inp.tb_target[t])
                - params.h_part(ref_b[t - l:t], inp.tb_p[t]))
        est[t] = ref[t] + r_g + r_h
        est_b[t] = ref_b[t] + r_g + r_hb
    return EstimateSeries(est, "fo_semi", lag, est_b, inp.pop_target, params)


def _roll(params: SEParams, inp: _Inputs, pop_init: np.ndarray, batch_init: np.ndarray,
          pop_target: np.ndarray, tb_target: np.ndarray, horizon: int | None = None):
    l = params.lag
    n_cols = pop_target.size if horizon is None else horizon + 1
    est = np.empty(n_cols)
    est_b = np.empty(n_cols)
    est[:inp.first] = pop_init[:inp.first]
    est_b[:inp.first] = batch_init[:inp.first]
    for t in range(inp.first, n_cols):
        g = params.g_part(est[t - l:t], pop_target[t])
        est[t] = params.b + g + params.h_part(est[t - l:t], pop_target[t])
        est_b[t] = params.b + g + params.h_part(est_b[t - l:t], tb_target[t])
    return est, est_b


def fo_recursive(panel, W_obs, W_target, target_batch: Batch | None = None,
                 train_batches: Sequence[Batch] | None = None, lag: int = 1,
                 alpha: float = DEFAULT_ALPHA, observed_mask=None, start: int = 0,
                 extend_target=None, intercept: bool = True) -> EstimateSeries:
    """Roll the fitted recursion forward from the first ``lag`` observed means.

    ``extend_target`` optionally supplies target treatment means for periods
    beyond the observed horizon, as ``(population, batch)`` arrays covering
    ``0..T'``; their first ``T+1`` entries are ignored in favour of
    ``W_target``.
    """
    inp = _prepare(panel, W_obs, W_target, target_batch, train_batches, lag, observed_mask, start)
    params = _fit(inp, lag, alpha, intercept)
    pop_target, tb_target = inp.pop_target, inp.tb_target
    if extend_target is not None:
        ext_pop, ext_b = (np.asarray(a, dtype=np.float64) for a in extend_target)
        if ext_pop.shape != ext_b.shape or ext_pop.size < pop_target.size:
            raise ContractError("extended target series must cover the observed horizon")
        pop_target = np.concatenate((pop_target, ext_pop[pop_target.size:]))
        tb_target = np.concatenate((tb_target, ext_b[tb_target.size:]))
    est, est_b = _roll(params, inp, inp.pop_y, inp.tb_y, pop_target, tb_target)
    return EstimateSeries(est, "fo_rec", lag, est_b, pop_target, params)


def detrend_estimate(panel, W_obs, W_target, target_batch: Batch | None = None,
                     train_batches: Sequence[Batch] | None = None, lag: int = 1,
                     alpha: float = DEFAULT_ALPHA, observed_mask=None, start: int = 0) -> EstimateSeries:
    """Baseline by the semi-recursive estimator, effects by the recursive one.

    The all-control baseline is estimated first and subtracted from every
    unit; the recursive estimator then models treatment effects on the
    residual panel with no intercept (zero treatment keeps residuals at zero),
    and the baseline is added back.
    """
    Y = np.asarray(panel, dtype=np.float64)
    zero = target_with_prefix(W_obs, np.zeros_like(Y), lag)
    base = fo_semi_recursive(Y, W_obs, zero, target_batch, train_batches, lag, alpha, observed_mask, start)
    filtered = Y - base.values[None, :]
    effect = fo_recursive(filtered, W_obs, W_target, target_batch, train_batches, lag, alpha,
                          observed_mask, start, intercept=False)
    values = effect.values + base.values
    batch_values = effect.batch_values + base.values
    # the prefix is copied, not reconstructed, so it must match observed means bit for bit
    first = max(int(start), lag)
    values[:first] = base.values[:first]
    batch_values[:first] = base.batch_values[:first]
    return EstimateSeries(values, "detrend", lag, batch_values, effect.target_means, effect.params,
                          {"baseline": base.values, "baseline_params": base.params})


def bcmp_estimate(panel, W_obs, W_target, target_batch: Batch | None = None,
                  observed_mask=None, start: int = 0) -> EstimateSeries:
    """Four-term population recursion fitted by least squares.

    ``ybar_{t+1} = b + c*ybar_t + d*p_{t+1} + e*ybar_t*p_{t+1}``. When a
    target batch is given, the same map is applied to the batch's own means
    and target treatment to produce ``batch_values``.
    """
    inp = _prepare(panel, W_obs, W_target, target_batch, None, 1, observed_mask, start)
    periods = _usable_targets(inp.mask, 1)
    if not periods:
        raise EstimatorError("no usable transitions to fit")
    ps = inp.pop_p[periods]
    if np.unique(ps).size < 2:
        raise EstimatorError("observed treatment means take fewer than two distinct values; "
                             "the recursion is not identifiable")
    y_prev = inp.pop_y[[t - 1 for t in periods]]
    X = np.column_stack((np.ones(len(periods)), y_prev, ps, y_prev * ps))
    y = inp.pop_y[periods]
    coef = ridge_fit(X, y, 0.0)
    b, c, d, e = (float(v) for v in coef)

    def roll(init, target):
        out = np.empty(target.size)
        out[:inp.first] = init[:inp.first]
        for t in range(inp.first, target.size):
            out[t] = b + c * out[t - 1] + d * target[t] + e * out[t - 1] * target[t]
        return out

    values = roll(inp.pop_y, inp.pop_target)
    batch_values = None if target_batch is None else roll(inp.tb_y, inp.tb_target)
    params = {"columns": ["const", "mean_lag1", "treat", "treat_x_mean_lag1"], "coef": [b, c, d, e]}
    return EstimateSeries(values, "bcmp", 1, batch_values, inp.pop_target, params)
