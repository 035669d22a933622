"""Panels that satisfy the linear mean recursion exactly, for oracle checks."""

from __future__ import annotations

import numpy as np

from ..errors import ContractError


def linear_se_panel(coef, lag: int, W, y_init) -> np.ndarray:
    """Unit-level linear dynamics whose batch means follow the recursion exactly.

    ``y^i_t = b + sum_j c_gj ybar_{t-j} + d_g p_t + e_g p_t ybar_{t-1}
              + sum_j c_hj y^i_{t-j} + d_h w^i_t``

    ``coef`` uses the fitted-parameter layout ``(b, c_g oldest..newest, d_g,
    e_g, c_h oldest..newest, d_h, e_h)``. ``e_h`` must be zero, since a
    unit-level ``w*y`` term does not average to a function of batch means.
    ``y_init`` gives the first ``lag`` columns (shape ``N x lag``).
    """
    coef = np.asarray(coef, dtype=np.float64)
    W = np.asarray(W, dtype=np.float64)
    n, n_cols = W.shape
    if coef.size != 2 * lag + 5:
        raise ContractError(f"expected {2 * lag + 5} coefficients")
    b = coef[0]
    c_g, d_g, e_g = coef[1:1 + lag], coef[1 + lag], coef[2 + lag]
    c_h, d_h, e_h = coef[3 + lag:3 + 2 * lag], coef[3 + 2 * lag], coef[4 + 2 * lag]
    if e_h != 0:
        raise ContractError("batch-level interaction coefficient must be zero for exact batch means")
    Y = np.empty((n, n_cols))
    Y[:, :lag] = np.asarray(y_init, dtype=np.float64).reshape(n, lag)
    p = W.mean(axis=0)
    for t in range(lag, n_cols):
        ybar = Y[:, t - lag:t].mean(axis=0)
        Y[:, t] = (b + c_g @ ybar + d_g * p[t] + e_g * p[t] * ybar[-1]
                   + Y[:, t - lag:t] @ c_h + d_h * W[:, t])
    return Y


def scalar_recursion(b: float, c: float, d: float, e: float, probs, y0: float) -> np.ndarray:
    """``ybar_{t+1} = b + c*ybar_t + d*p_{t+1} + e*ybar_t*p_{t+1}`` from ``ybar_0 = y0``."""
    probs = np.asarray(probs, dtype=np.float64)
    out = np.empty(probs.size)
    out[0] = y0
    for t in range(1, probs.size):
        out[t] = b + c * out[t - 1] + d * probs[t] + e * out[t - 1] * probs[t]
    return out
