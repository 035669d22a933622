from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.special import expit

from .base import Environment
from .config import ExerciseConfig
from .graphs import make_graph


def exercise_prob(alpha, tau, w, y_prev, z_count, v_var, c, e, eta):
    """Probability of exercising next period.

    Logistic in a base propensity, the treatment lift, peer counts gated by the
    unit's own previous choice, and a penalty on neighbour disagreement.
    """
    y_prev = np.asarray(y_prev, dtype=float)
    z = np.asarray(z_count, dtype=float)
    logit = alpha + tau * w + c * y_prev * z + e * w * y_prev * z - eta * np.asarray(v_var, dtype=float)
    return expit(logit)


@dataclass(frozen=True)
class ExerciseWorld:
    adjacency: sp.csr_matrix
    degree: np.ndarray
    base: np.ndarray       # per-unit propensity before the weekly cycle
    effect: np.ndarray     # per-unit treatment lift before the weekly cycle
    uniforms: np.ndarray   # N x (T+1)


class ExerciseEnv(Environment):
    kind = "exercise"

    def _draw_world(self, index: int) -> ExerciseWorld:
        cfg: ExerciseConfig = self.config
        N, T = self.n_units, self.horizon
        rng = self.rng("world", index)
        adj = make_graph(cfg.graph, N, rng)
        base = cfg.base_mean + cfg.base_sd * rng.standard_normal(N)
        effect = cfg.effect_mean + cfg.effect_sd * rng.standard_normal(N)
        uniforms = self.rng("noise", index).random((N, T + 1))
        return ExerciseWorld(adj, np.asarray(adj.sum(axis=1)).ravel(), base, effect, uniforms)

    def _run(self, world: ExerciseWorld, W: np.ndarray) -> np.ndarray:
        cfg: ExerciseConfig = self.config
        Y = np.empty((self.n_units, self.horizon + 1))
        Y[:, 0] = (world.uniforms[:, 0] < cfg.initial_rate).astype(float)
        deg = world.degree
        safe_deg = np.where(deg > 0, deg, 1.0)
        for t in range(self.horizon):
            day = (t + 1) % 7
            alpha = world.base + cfg.base_weekly[day % len(cfg.base_weekly)]
            tau = world.effect * cfg.effect_weekly[day % len(cfg.effect_weekly)]
            z = world.adjacency @ Y[:, t]
            share = z / safe_deg
            v = share * (1.0 - share)  # variance of 0/1 neighbour outcomes
            prob = exercise_prob(alpha, tau, W[:, t + 1], Y[:, t], z, v, cfg.c, cfg.e, cfg.eta)
            Y[:, t + 1] = (world.uniforms[:, t + 1] < prob).astype(float)
        return Y
