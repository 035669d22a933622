from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .base import Environment
from .config import Affine, GaussianConfig


@dataclass(frozen=True)
class GaussianWorld:
    A: np.ndarray          # fixed interference matrix, N x N
    y0: np.ndarray         # initial outcomes
    noise: np.ndarray      # N x T observation noise, column t used for step t -> t+1
    index: int


def affine(coef: Affine, y: np.ndarray, w: np.ndarray) -> np.ndarray:
    return coef.const + coef.y * y + coef.w * w + coef.yw * y * w


def mean_field_coefficients(config: GaussianConfig) -> tuple[float, float, float, float]:
    """``(b, c, d, e)`` of the large-N population-mean recursion.

    ``ybar_{t+1} = b + c*ybar_t + d*p_{t+1} + e*ybar_t*p_{t+1}``; valid when
    treatments are drawn independently of current outcomes.
    """
    g, h, mu = config.g, config.h, config.mu
    return (mu * g.const + h.const, mu * g.y + h.y, mu * g.w + h.w, mu * g.yw + h.yw)


class GaussianEnv(Environment):
    kind = "gaussian"

    def _draw_world(self, index: int) -> GaussianWorld:
        cfg: GaussianConfig = self.config
        N, T = self.n_units, self.horizon
        rng = self.rng("world", index)
        A = rng.standard_normal((N, N))
        A *= cfg.sigma / np.sqrt(N)
        A += cfg.mu / N
        y0 = cfg.y0_mean + cfg.y0_sd * rng.standard_normal(N)
        noise = cfg.noise_sd * self.rng("noise", index).standard_normal((N, T))
        return GaussianWorld(A=A, y0=y0, noise=noise, index=index)

    def time_matrix(self, world: GaussianWorld, t: int) -> np.ndarray | None:
        """Per-period interference perturbation ``A_t`` (``None`` when ``sigma_t = 0``)."""
        if self.config.sigma_t == 0:
            return None
        N = self.n_units
        rng = self.rng("world_t", world.index, t)
        return rng.standard_normal((N, N)) * (self.config.sigma_t / np.sqrt(N))

    def step(self, world: GaussianWorld, y_t: np.ndarray, w_next: np.ndarray, t: int) -> np.ndarray:
        return gaussian_step(world, y_t, w_next, t, self.config, self.time_matrix(world, t))

    def _run(self, world: GaussianWorld, W: np.ndarray) -> np.ndarray:
        Y = np.empty((self.n_units, self.horizon + 1))
        Y[:, 0] = world.y0
        for t in range(self.horizon):
            Y[:, t + 1] = self.step(world, Y[:, t], W[:, t + 1], t)
        return Y

    def decomposition_residuals(self, W, t: int, world: int = 0) -> np.ndarray:
        """Network-heterogeneity part of ``y_{t+1}``, scaled to be approximately ``N(0, 1/N)``.

        Computes ``(y_{t+1} - mu*mean(g) - h - noise) / (sigma_eff * ||g||)`` per
        unit, where ``g`` and ``h`` are evaluated at ``(y_t, w_{t+1})``.
        """
        cfg: GaussianConfig = self.config
        W = self._check(W)
        state = self.world(world)
        Y = self._run(state, W)
        g = affine(cfg.g, Y[:, t], W[:, t + 1])
        h = affine(cfg.h, Y[:, t], W[:, t + 1])
        resid = Y[:, t + 1] - cfg.mu * g.mean() - h - state.noise[:, t]
        scale = np.sqrt(cfg.sigma**2 + cfg.sigma_t**2) * np.linalg.norm(g)
        return resid / scale

    def batch_residual_sd(self, W, t: int, batch_size: int, n_batches: int, rng: np.random.Generator,
                          world: int = 0) -> float:
        """Std. dev. of batch-mean unscaled residuals over random batches of one size."""
        cfg: GaussianConfig = self.config
        W = self._check(W)
        state = self.world(world)
        Y = self._run(state, W)
        g = affine(cfg.g, Y[:, t], W[:, t + 1])
        h = affine(cfg.h, Y[:, t], W[:, t + 1])
        resid = Y[:, t + 1] - cfg.mu * g.mean() - h - state.noise[:, t]
        means = np.array([
            resid[rng.choice(self.n_units, size=batch_size, replace=False)].mean() for _ in range(n_batches)
        ])
        return float(means.std(ddof=1))


def gaussian_step(world: GaussianWorld, y_t: np.ndarray, w_next: np.ndarray, t: int,
                  config: GaussianConfig, A_t: np.ndarray | None = None) -> np.ndarray:
    """One period of ``y_{t+1} = (A + A_t) g + h + eps``."""
    g = affine(config.g, y_t, w_next)
    h = affine(config.h, y_t, w_next)
    interference = world.A @ g
    if A_t is not None:
        interference = interference + A_t @ g
    return interference + h + world.noise[:, t]
