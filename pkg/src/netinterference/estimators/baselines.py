"""Difference-in-means and Horvitz-Thompson TTE estimators."""

from __future__ import annotations

import numpy as np

from ..errors import ContractError, EstimatorError


def _window(Y: np.ndarray, W: np.ndarray, L: int) -> slice:
    if Y.shape != W.shape:
        raise ContractError(f"panel shape {Y.shape} does not match treatment shape {W.shape}")
    T = Y.shape[1] - 1
    if not 1 <= L <= T:
        raise ContractError(f"window L={L} must satisfy 1 <= L <= T={T}")
    return slice(T - L + 1, T + 1)


def dm(panel, W, L: int) -> float:
    """Treated-minus-control mean, averaged over the last ``L`` periods."""
    Y = np.asarray(panel, dtype=np.float64)
    W = np.asarray(W, dtype=np.float64)
    cols = _window(Y, W, L)
    diffs = []
    for t in range(Y.shape[1])[cols]:
        treated = W[:, t] == 1
        if treated.all() or not treated.any():
            raise EstimatorError(f"period {t} has an empty treatment arm")
        diffs.append(Y[treated, t].mean() - Y[~treated, t].mean())
    return float(np.mean(diffs))


def ht(panel, W, probs, L: int) -> float:
    """Inverse-probability-weighted contrast over the last ``L`` periods.

    ``probs[t]`` is the design's assignment probability for period ``t``.
    """
    Y = np.asarray(panel, dtype=np.float64)
    W = np.asarray(W, dtype=np.float64)
    cols = _window(Y, W, L)
    p = np.asarray(probs, dtype=np.float64)
    if p.shape != (Y.shape[1],):
        raise ContractError(f"need one probability per period ({Y.shape[1]}), got {p.shape}")
    p = p[cols]
    if np.any((p <= 0) | (p >= 1)):
        raise EstimatorError("assignment probabilities in the window must lie strictly in (0, 1)")
    y, w = Y[:, cols], W[:, cols]
    return float((y * w / p - y * (1 - w) / (1 - p)).mean())
