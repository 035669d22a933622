"""
Recovering a mean recursion exactly
===================================

When the population mean really does follow a four-term recursion, the basic
estimator recovers the coefficients and the all-control path with no error.
"""

import numpy as np

from netinterference.envs import scalar_recursion
from netinterference.estimators import bcmp_estimate

# Treatment probability per period. Column 0 is always control.
probs = [0, 0.25, 0.25, 0.75, 0.75, 0.5]
b, c, d, e = 1.0, 0.5, -1.2, 0.0
means = scalar_recursion(b, c, d, e, probs, y0=0.0)

# Four identical units, with the right number of them treated each period.
n = 4
Y = np.tile(means, (n, 1))
W = np.zeros((n, len(probs)))
for t, p in enumerate(probs):
    W[: round(p * n), t] = 1

est = bcmp_estimate(Y, W, np.zeros_like(W))
print("fitted (b, c, d, e):", np.round(est.params["coef"], 10))
print("all-control path:   ", np.round(est.values, 10))

###############################################################################
# Asking for the observed assignment gives the observed means back.

same = bcmp_estimate(Y, W, W)
print("max gap to observed:", np.abs(same.values - Y.mean(axis=0)).max())

###############################################################################
# With one treatment level throughout, the effect is not identifiable and
# the estimator refuses to fit.

flat = np.zeros_like(W)
flat[:2, 1:] = 1
try:
    bcmp_estimate(Y, flat, flat)
except Exception as exc:
    print(type(exc).__name__, "-", exc)
