"""Simulated environments with network interference."""

from __future__ import annotations

import json
from pathlib import Path

from ..core import OutcomePanel
from .auction import AuctionEnv, auction_round
from .base import Environment
from .belief import BeliefEnv, belief_adoption_prob
from .config import (
    Affine,
    AuctionConfig,
    BeliefConfig,
    DataCenterConfig,
    EnvConfig,
    ExerciseConfig,
    GaussianConfig,
    GraphSpec,
    LinearInMeansConfig,
    parse_env_config,
)
from .datacenter import DataCenterEnv, jsq_assign
from .exercise import ExerciseEnv, exercise_prob
from .gaussian import GaussianEnv, gaussian_step, mean_field_coefficients
from .graphs import make_graph, row_normalize
from .linear_in_means import LinearInMeansEnv, lim_step
from .synthetic import linear_se_panel, scalar_recursion

_ENVS: dict[str, type[Environment]] = {
    cls.kind: cls
    for cls in (GaussianEnv, BeliefEnv, LinearInMeansEnv, ExerciseEnv, DataCenterEnv, AuctionEnv)
}


def make_env(config) -> Environment:
    if isinstance(config, dict):
        config = parse_env_config(config)
    return _ENVS[config.kind](config)


def simulate(config, W, world: int = 0) -> OutcomePanel:
    return make_env(config).simulate(W, world=world)


def ground_truth_pair(config, W_obs, W_alt, world: int = 0) -> tuple[OutcomePanel, OutcomePanel]:
    return make_env(config).ground_truth_pair(W_obs, W_alt, world=world)


def read_config_file(path) -> dict:
    """Load a JSON or TOML file into a plain mapping."""
    path = Path(path)
    if path.suffix.lower() == ".toml":
        try:
            import tomllib
        except ModuleNotFoundError:  # Python < 3.11
            import tomli as tomllib
        with path.open("rb") as fh:
            return tomllib.load(fh)
    return json.loads(path.read_text())


def load_env_config(path):
    data = read_config_file(path)
    return parse_env_config(data.get("env", data))


__all__ = [
    "Affine", "AuctionConfig", "AuctionEnv", "BeliefConfig", "BeliefEnv", "DataCenterConfig",
    "DataCenterEnv", "EnvConfig", "Environment", "ExerciseConfig", "ExerciseEnv", "GaussianConfig",
    "GaussianEnv", "GraphSpec", "LinearInMeansConfig", "LinearInMeansEnv", "auction_round",
    "belief_adoption_prob", "exercise_prob", "gaussian_step", "ground_truth_pair", "jsq_assign",
    "lim_step", "linear_se_panel", "load_env_config", "make_env", "make_graph", "mean_field_coefficients",
    "parse_env_config", "read_config_file", "row_normalize", "scalar_recursion", "simulate",
]
