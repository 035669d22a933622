from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.special import expit

from .base import Environment
from .config import BeliefConfig
from .graphs import make_graph


def belief_adoption_prob(n_a, n_b, n, h, beta):
    """Probability of adopting opinion A given neighbour counts and payoff tilt ``h``."""
    return expit(2.0 * beta * (np.asarray(n) * h + np.asarray(n_a) - np.asarray(n_b)))


@dataclass(frozen=True)
class BeliefWorld:
    adjacency: sp.csr_matrix
    degree: np.ndarray
    age: np.ndarray
    activity: np.ndarray
    payoff_a: np.ndarray
    payoff_b: np.ndarray
    effect: np.ndarray
    uniforms: np.ndarray  # N x (T+1), column 0 seeds the initial opinions


class BeliefEnv(Environment):
    kind = "belief"

    def _draw_world(self, index: int) -> BeliefWorld:
        cfg: BeliefConfig = self.config
        N, T = self.n_units, self.horizon
        rng = self.rng("world", index)
        adj = make_graph(cfg.graph, N, rng)
        age = rng.uniform(*cfg.age_range, size=N)
        activity = rng.uniform(0.0, 1.0, size=N)
        civic = (age >= cfg.civic_ages[0]) & (age <= cfg.civic_ages[1])
        payoff_a = cfg.payoff_a + cfg.civic_bonus * civic + cfg.activity_bonus * activity
        payoff_b = np.full(N, cfg.payoff_b)
        bump = np.exp(-0.5 * ((age - cfg.effect_age_center) / cfg.effect_age_width) ** 2)
        effect = cfg.effect_scale * bump * activity
        uniforms = self.rng("noise", index).random((N, T + 1))
        return BeliefWorld(adj, np.asarray(adj.sum(axis=1)).ravel(), age, activity,
                           payoff_a, payoff_b, effect, uniforms)

    def _run(self, world: BeliefWorld, W: np.ndarray) -> np.ndarray:
        cfg: BeliefConfig = self.config
        Y = np.empty((self.n_units, self.horizon + 1))
        Y[:, 0] = (world.uniforms[:, 0] < cfg.initial_adoption).astype(float)
        for t in range(self.horizon):
            n_a = world.adjacency @ Y[:, t]
            n_b = world.degree - n_a
            pa = world.payoff_a + world.effect * W[:, t + 1]
            h = (pa - world.payoff_b) / (pa + world.payoff_b)
            prob = belief_adoption_prob(n_a, n_b, world.degree, h, cfg.beta)
            Y[:, t + 1] = (world.uniforms[:, t + 1] < prob).astype(float)
        return Y
