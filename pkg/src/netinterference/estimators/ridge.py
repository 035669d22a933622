from __future__ import annotations

import warnings
from typing import Iterable

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from ..errors import ContractError, SolverError

CONDITION_WARN = 1e12


class IllConditionedWarning(RuntimeWarning):
    pass


def ridge_fit(X, y, alpha: float = 0.0, unpenalized: Iterable[int] = ()) -> np.ndarray:
    """Solve ``(X'X + alpha*D) beta = X'y``.

    ``D`` is the identity with zeros at the ``unpenalized`` column indices
    (typically the intercept). ``y`` may be a vector or an ``n x q`` matrix
    of outputs sharing one design.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 1 or X.shape[1] < 1:
        raise ContractError(f"design must be a nonempty 2-d array, got shape {X.shape}")
    if y.shape[0] != X.shape[0] or y.ndim not in (1, 2):
        raise ContractError(f"response shape {y.shape} does not match design rows {X.shape[0]}")
    if alpha < 0 or not np.isfinite(alpha):
        raise ContractError("alpha must be a finite nonnegative number")
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
        raise ContractError("design and response must be finite")

    k = X.shape[1]
    penalty = np.ones(k)
    for j in unpenalized:
        penalty[j] = 0.0
    gram = X.T @ X + alpha * np.diag(penalty)
    rhs = X.T @ y

    if alpha == 0 and np.linalg.matrix_rank(X) < k:
        raise SolverError("normal equations are singular at alpha=0; use a positive ridge penalty")
    cond = np.linalg.cond(gram)
    if not np.isfinite(cond):
        raise SolverError("normal equations are singular; increase alpha or penalize more columns")
    if cond > CONDITION_WARN:
        warnings.warn(f"normal equations are ill-conditioned (condition number {cond:.3g})",
                      IllConditionedWarning, stacklevel=2)
    try:
        factor = cho_factor(gram, lower=True, check_finite=False)
    except LinAlgError as exc:
        raise SolverError("normal equations are not positive definite; use a positive ridge penalty") from exc
    return cho_solve(factor, rhs, check_finite=False)
