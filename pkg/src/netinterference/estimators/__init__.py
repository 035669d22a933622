"""Counterfactual and treatment-effect estimators."""

from __future__ import annotations

from typing import Callable

import numpy as np

from ..errors import ContractError
from .baselines import dm, ht
from .cmp import (
    DEFAULT_ALPHA,
    EstimateSeries,
    SEParams,
    bcmp_estimate,
    build_design_rows,
    coefficient_names,
    detrend_estimate,
    fit_se_params,
    fo_recursive,
    fo_semi_recursive,
    target_with_prefix,
)
from .higher_order import FeatureSpec, ho_recursive, moment_stats, polynomial_features
from .ridge import IllConditionedWarning, ridge_fit

ESTIMATORS: dict[str, Callable[..., EstimateSeries]] = {
    "bcmp": bcmp_estimate,
    "fo_semi": fo_semi_recursive,
    "fo_rec": fo_recursive,
    "ho_rec": ho_recursive,
    "detrend": detrend_estimate,
}


def run_estimator(name: str, panel, W_obs, W_target, *, target_batch=None, train_batches=None,
                  lag: int = 1, alpha: float = DEFAULT_ALPHA, spec: FeatureSpec | None = None,
                  observed_mask=None, start: int = 0) -> EstimateSeries:
    """Uniform entry point over the estimator family (irrelevant options are dropped)."""
    if name not in ESTIMATORS:
        raise ContractError(f"unknown estimator {name!r}; choose from {sorted(ESTIMATORS)}")
    common = dict(target_batch=target_batch, observed_mask=observed_mask, start=start)
    if name == "bcmp":
        return bcmp_estimate(panel, W_obs, W_target, **common)
    if name == "ho_rec":
        return ho_recursive(panel, W_obs, W_target, train_batches=train_batches, spec=spec,
                            alpha=alpha, **common)
    return ESTIMATORS[name](panel, W_obs, W_target, train_batches=train_batches, lag=lag,
                            alpha=alpha, **common)


def estimate_tte(name: str, panel, W_obs, L: int, **kwargs) -> float:
    """TTE over the last ``L`` periods from all-treat and all-control counterfactuals.

    Both targets copy the observed assignment for periods before the lag.
    """
    W_obs = np.asarray(W_obs, dtype=np.float64)
    T = W_obs.shape[1] - 1
    if not 1 <= L <= T:
        raise ContractError(f"window L={L} must satisfy 1 <= L <= T={T}")
    lag = 1 if name in ("bcmp", "ho_rec") else kwargs.get("lag", 1)
    treat = np.ones_like(W_obs)
    treat[:, 0] = 0.0
    treat = target_with_prefix(W_obs, treat, lag)
    control = target_with_prefix(W_obs, np.zeros_like(W_obs), lag)
    hi = run_estimator(name, panel, W_obs, treat, **kwargs).values
    lo = run_estimator(name, panel, W_obs, control, **kwargs).values
    return float((hi - lo)[T - L + 1:].mean())


__all__ = [
    "DEFAULT_ALPHA", "ESTIMATORS", "EstimateSeries", "FeatureSpec", "IllConditionedWarning", "SEParams",
    "bcmp_estimate", "build_design_rows", "coefficient_names", "detrend_estimate", "dm", "estimate_tte",
    "fit_se_params", "fo_recursive", "fo_semi_recursive", "ho_recursive", "ht", "moment_stats",
    "polynomial_features", "ridge_fit", "run_estimator", "target_with_prefix",
]
