from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.stats import truncnorm

from .base import Environment
from .config import LinearInMeansConfig
from .graphs import make_graph, row_normalize


def lim_step(baseline_next, baseline_t, y_t, A, w_next, gamma, delta_p, delta_u):
    """Linear-in-means update for all units.

    ``y_i' = b_i' + gamma * sum_j A_ij (y_j - b_i) + delta_p * sum_j A_ij w_j' + delta_u_i * w_i'``
    where ``b`` is the baseline panel. Note the deviation is taken against the
    unit's *own* baseline.
    """
    Ay = A @ y_t
    row_sums = np.asarray(A.sum(axis=1)).ravel()
    return (baseline_next
            + gamma * (Ay - row_sums * baseline_t)
            + delta_p * (A @ w_next)
            + delta_u * w_next)


@dataclass(frozen=True)
class LinearInMeansWorld:
    adjacency: sp.csr_matrix   # row-stochastic
    baseline: np.ndarray       # N x (T+1) no-treatment baseline panel
    delta_u: np.ndarray


class LinearInMeansEnv(Environment):
    kind = "linear_in_means"

    def _draw_world(self, index: int) -> LinearInMeansWorld:
        cfg: LinearInMeansConfig = self.config
        N, T = self.n_units, self.horizon
        rng = self.rng("world", index)
        adj = row_normalize(make_graph(cfg.graph, N, rng))
        level = np.maximum(cfg.level_mean + cfg.level_sd * rng.standard_normal(N), 0.1)
        t = np.arange(T + 1)
        season = 1.0 + cfg.season_amplitude * np.sin(2 * np.pi * t / cfg.season_period)
        noise = cfg.baseline_noise_sd * self.rng("noise", index).standard_normal((N, T + 1))
        baseline = level[:, None] * season[None, :] + noise
        if cfg.delta_u_sd > 0:
            a = (0.0 - cfg.delta_u_mean) / cfg.delta_u_sd
            delta_u = truncnorm.rvs(a, np.inf, loc=cfg.delta_u_mean, scale=cfg.delta_u_sd,
                                    size=N, random_state=rng)
        else:
            delta_u = np.full(N, max(cfg.delta_u_mean, 0.0))
        return LinearInMeansWorld(adj, baseline, delta_u)

    def _run(self, world: LinearInMeansWorld, W: np.ndarray) -> np.ndarray:
        cfg: LinearInMeansConfig = self.config
        B = world.baseline
        Y = np.empty_like(B)
        Y[:, 0] = B[:, 0]
        for t in range(self.horizon):
            Y[:, t + 1] = lim_step(B[:, t + 1], B[:, t], Y[:, t], world.adjacency, W[:, t + 1],
                                   cfg.gamma, cfg.delta_p, world.delta_u)
        return Y
