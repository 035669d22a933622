"""Bias/variance behaviour of difference-in-means under interference.

For each value of the swept parameter, every world gets a ground-truth TTE
from one paired all-treat/all-control simulation, and each re-randomized
treatment allocation gives a DM estimate at the final period. Errors are
decomposed into squared bias and variance, with uncertainty bands from a
nested bootstrap that resamples worlds and then runs within each world.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from ..core import compute_tte, generate_staggered_design, rng_stream
from ..envs import GaussianEnv
from ..estimators import dm
from .config import SweepConfig
from .export import ResultTable


def error_metrics(errors: np.ndarray) -> tuple[float, float, float]:
    """``(mse, variance, squared bias)`` of a pooled error array; ``mse = var + bias^2``."""
    e = np.asarray(errors, dtype=float).ravel()
    bias = e.mean()
    var = float(np.mean((e - bias) ** 2))
    return float(np.mean(e**2)), var, float(bias**2)


def nested_bootstrap(errors: np.ndarray, n_boot: int, rng: np.random.Generator) -> np.ndarray:
    """``n_boot x 3`` metrics from resampling worlds, then runs within each chosen world."""
    errors = np.asarray(errors, dtype=float)
    n_worlds, n_runs = errors.shape
    out = np.empty((n_boot, 3))
    for k in range(n_boot):
        worlds = rng.integers(n_worlds, size=n_worlds)
        runs = rng.integers(n_runs, size=(n_worlds, n_runs))
        out[k] = error_metrics(errors[worlds[:, None], runs])
    return out


def world_errors(config: SweepConfig, value: float, world: int) -> np.ndarray:
    """DM-minus-truth errors for every treatment resample in one world."""
    env = GaussianEnv(config.env_config(value))
    design = config.design.build()
    T = config.horizon
    treat, control = env.ground_truth_pair(env.all_level(1), env.all_level(0), world=world)
    truth = compute_tte(treat, control, 1)
    errs = np.empty(config.resamples)
    for r in range(config.resamples):
        W = generate_staggered_design(config.n_units, design, config.seed, replicate=world * config.resamples + r)
        errs[r] = dm(env.simulate(W, world=world), W, 1) - truth
    return errs


def _job(args):
    return world_errors(*args)


@dataclass
class SweepResult:
    table: ResultTable
    errors: dict[float, np.ndarray]   # value -> worlds x resamples


def dm_sweep(config: SweepConfig, threads: int = 1) -> SweepResult:
    jobs = [(config, v, w) for v in config.values for w in range(config.worlds)]
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            flat = list(pool.map(_job, jobs))
    else:
        flat = [_job(j) for j in jobs]

    columns = ["parameter", "value", "mse", "mse_se", "variance", "variance_se", "bias2", "bias2_se",
               "mean_error"]
    rows, errors = [], {}
    for i, v in enumerate(config.values):
        E = np.vstack(flat[i * config.worlds:(i + 1) * config.worlds])
        errors[v] = E
        mse, var, b2 = error_metrics(E)
        boot = nested_bootstrap(E, config.nested, rng_stream(config.seed, "bootstrap", i))
        se = boot.std(axis=0, ddof=1) if config.nested > 1 else np.zeros(3)
        rows.append([config.sweep, float(v), mse, float(se[0]), var, float(se[1]), b2, float(se[2]),
                     float(E.mean())])
    meta = {
        "kind": "dm_sweep",
        "fixed": {"mu" if config.sweep == "sigma" else "sigma": config.fixed},
        "n_units": config.n_units, "horizon": config.horizon, "noise_sd": config.noise_sd,
        "seed": config.seed,
        "scale": config.scale_notes(),
        "config": config.model_dump(mode="json"),
    }
    return SweepResult(ResultTable(columns, rows, meta), errors)


def bands_overlap(values, ses) -> bool:
    """True when all ``value +/- se`` intervals share a common point."""
    v, s = np.asarray(values, dtype=float), np.asarray(ses, dtype=float)
    return bool(np.max(v - s) <= np.min(v + s))
