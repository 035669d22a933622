"""Repeated assignment auction.

Units are objects. Each period ``N`` bidders compete for ``N`` objects in a
forward epsilon-auction; the outcome for an object is its final price.
Treating an object scales every bidder's valuation of it by ``1 + tau``,
which pushes its price up and bidders' attention away from the rest.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from ..errors import ContractError
from .base import Environment
from .config import AuctionConfig


def auction_round(valuations, prices, epsilon: float) -> tuple[np.ndarray, np.ndarray]:
    """Forward auction, one bid at a time.

    Returns ``(assignment, prices)`` where ``assignment[i]`` is the object won
    by bidder ``i``. On exit every bidder holds an object within ``epsilon``
    of its best net value, and no price has fallen below its input value.
    """
    V = np.asarray(valuations, dtype=np.float64)
    p = np.array(prices, dtype=np.float64, copy=True)
    if V.ndim != 2 or V.shape[0] != V.shape[1]:
        raise ContractError(f"valuations must be square, got shape {V.shape}")
    if p.shape != (V.shape[1],):
        raise ContractError("prices must have one entry per object")
    if not (np.all(np.isfinite(V)) and np.all(np.isfinite(p))):
        raise ContractError("valuations and prices must be finite")
    if epsilon <= 0:
        raise ContractError("epsilon must be positive")

    n = V.shape[0]
    owner = np.full(n, -1, dtype=np.int64)
    assignment = np.full(n, -1, dtype=np.int64)
    free = deque(range(n))
    while free:
        i = free.popleft()
        net = V[i] - p
        j = int(np.argmax(net))
        best = net[j]
        if n > 1:
            net[j] = -np.inf
            second = net.max()
        else:
            second = best
        p[j] += best - second + epsilon
        prev = owner[j]
        if prev >= 0:
            assignment[prev] = -1
            free.append(prev)
        owner[j] = i
        assignment[i] = j
    return assignment, p


@dataclass(frozen=True)
class AuctionWorld:
    valuations: np.ndarray   # bidder x object, before period noise
    index: int


class AuctionEnv(Environment):
    kind = "auction"

    def _draw_world(self, index: int) -> AuctionWorld:
        cfg: AuctionConfig = self.config
        n = self.n_units
        rng = self.rng("world", index)
        object_value = cfg.base_value_mean + cfg.base_value_sd * rng.standard_normal(n)
        types = rng.choice(4, size=n, p=np.asarray(cfg.type_probs))
        mean_mult = np.asarray(cfg.type_mean_mult)[types]
        sd_mult = np.asarray(cfg.type_sd_mult)[types]
        V = mean_mult[:, None] * object_value[None, :]
        V = V + cfg.valuation_sd * sd_mult[:, None] * rng.standard_normal((n, n))
        return AuctionWorld(np.maximum(V, 0.0), index)

    def period_valuations(self, world: AuctionWorld, t: int, w_col: np.ndarray) -> np.ndarray:
        cfg: AuctionConfig = self.config
        n = self.n_units
        V = world.valuations
        if cfg.period_noise_sd > 0:
            V = V + cfg.period_noise_sd * self.rng("noise", world.index, t).standard_normal((n, n))
        return np.maximum(V, 0.0) * (1.0 + cfg.tau * w_col)[None, :]

    def _run(self, world: AuctionWorld, W: np.ndarray) -> np.ndarray:
        cfg: AuctionConfig = self.config
        Y = np.empty((self.n_units, self.horizon + 1))
        opening = np.zeros(self.n_units)
        for t in range(self.horizon + 1):
            V = self.period_valuations(world, t, W[:, t])
            _, final = auction_round(V, opening, cfg.epsilon)
            Y[:, t] = final
            opening = cfg.price_memory * final
        return Y
