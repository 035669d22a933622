from __future__ import annotations

from abc import ABC, abstractmethod
from typing import Any

import numpy as np

from ..core import OutcomePanel, TreatmentMatrix, rng_stream
from ..errors import ContractError


class Environment(ABC):
    """Common interface: frozen per-world randomness plus a treatment-driven rollout.

    Subclasses implement :meth:`_draw_world` (all randomness for one world,
    keyed by ``(seed, world)``) and :meth:`_run` (a deterministic function of
    the world and the treatment matrix). Running two treatment matrices
    against the same world therefore uses common random numbers.
    """

    kind: str = ""

    def __init__(self, config) -> None:
        self.config = config
        self.n_units = config.n_units
        self.horizon = config.horizon
        self._worlds: dict[int, Any] = {}

    def rng(self, name: str, world: int, *keys: int) -> np.random.Generator:
        return rng_stream(self.config.seed, name, world, *keys)

    def world(self, index: int = 0):
        if index not in self._worlds:
            # one cached world at a time keeps memory flat for large N
            self._worlds.clear()
            self._worlds[index] = self._draw_world(index)
        return self._worlds[index]

    @abstractmethod
    def _draw_world(self, index: int) -> Any: ...

    @abstractmethod
    def _run(self, world, W: np.ndarray) -> np.ndarray: ...

    def _check(self, W) -> np.ndarray:
        W = np.asarray(W, dtype=np.float64)
        expected = (self.n_units, self.horizon + 1)
        if W.shape != expected:
            raise ContractError(f"treatment shape {W.shape} does not match environment {expected}")
        if np.any(W[:, 0] != 0):
            raise ContractError("column 0 of the treatment matrix must be zero")
        return W

    def simulate(self, W, world: int = 0) -> OutcomePanel:
        W = self._check(W)
        return OutcomePanel(self._run(self.world(world), W))

    def ground_truth_pair(self, W_obs, W_alt, world: int = 0) -> tuple[OutcomePanel, OutcomePanel]:
        """Panels for two treatment matrices under one frozen world."""
        W_obs = self._check(W_obs)
        W_alt = self._check(W_alt)
        if not np.array_equal(W_obs[:, 0], W_alt[:, 0]):
            raise ContractError("treatment matrices must share column 0")
        state = self.world(world)
        return OutcomePanel(self._run(state, W_obs)), OutcomePanel(self._run(state, W_alt))

    def all_level(self, level: int) -> TreatmentMatrix:
        W = np.full((self.n_units, self.horizon + 1), float(level))
        W[:, 0] = 0.0
        return TreatmentMatrix(W)
