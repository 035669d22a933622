"""End-to-end benchmark: simulate, cross-validate, estimate TTE, compare with truth."""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from ..ccv import run_ccv
from ..core import compute_tte, generate_staggered_design, rng_stream
from ..dpnb import create_training_batches, create_validation_batches
from ..envs import make_env
from ..errors import NetInterferenceError
from ..estimators import dm, estimate_tte, ht
from .config import BenchmarkConfig
from .export import ResultTable, quantile_summary

ESTIMATES = ("cmp", "bcmp", "dm", "ht")
RUN_COLUMNS = ["run", "gt_tte", *[f"{e}_tte" for e in ESTIMATES], "selected", "errors"]


def _safe(fn, errors: list[str], label: str):
    try:
        return float(fn())
    except (NetInterferenceError, ValueError, np.linalg.LinAlgError) as exc:
        errors.append(f"{label}: {type(exc).__name__}: {exc}")
        return None


def run_once(config: BenchmarkConfig, run: int) -> list:
    """One benchmark run; failures are recorded in the ``errors`` field."""
    env = make_env(config.env)
    design = config.design.build()
    N, T, L = env.n_units, env.horizon, config.window
    W = np.asarray(generate_staggered_design(N, design, config.seed, replicate=run))
    Y = np.asarray(env.simulate(W, world=run))
    treat, control = env.ground_truth_pair(env.all_level(1), env.all_level(0), world=run)
    gt = compute_tte(treat, control, L)

    errors: list[str] = []
    selected = None
    cmp_tte = None
    candidates = config.ccv.grid.build()
    try:
        result = run_ccv(Y, W, candidates, config.ccv.blocks(T),
                         create_validation_batches(W, config.ccv.validation_batches), seed=config.seed + run)
        best = result.selected
        selected = best.label()
        params = best.batch_params(N)
        train = None
        if params is not None and best.estimator != "bcmp":
            # same stream as cross-validation used for this candidate
            train = create_training_batches(W, params, rng_stream(config.seed + run, "batches",
                                                                  result.selected_index))
        cmp_tte = _safe(lambda: estimate_tte(best.estimator, Y, W, L, train_batches=train, lag=best.lag,
                                             alpha=best.alpha, spec=best.features), errors, "cmp")
    except (NetInterferenceError, ValueError) as exc:
        errors.append(f"ccv: {type(exc).__name__}: {exc}")
    bcmp_tte = _safe(lambda: estimate_tte("bcmp", Y, W, L), errors, "bcmp")
    dm_tte = _safe(lambda: dm(Y, W, L), errors, "dm")
    ht_tte = _safe(lambda: ht(Y, W, design.probs_per_period(), L), errors, "ht")
    return [run, gt, cmp_tte, bcmp_tte, dm_tte, ht_tte, selected, "; ".join(errors) or None]


def _job(args):
    return run_once(*args)


@dataclass
class BenchmarkResult:
    runs: ResultTable
    summary: ResultTable


def run_benchmark(config: BenchmarkConfig, threads: int = 1) -> BenchmarkResult:
    jobs = [(config, r) for r in range(config.runs)]
    if threads > 1 and config.runs > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(_job, jobs))
    else:
        rows = [_job(j) for j in jobs]
    runs = ResultTable(list(RUN_COLUMNS), rows)

    gt = np.array(runs.column("gt_tte"), dtype=float)
    columns = ["estimator", "n", "mean", "sd", "q5", "q25", "q50", "q75", "q95",
               "error_mean", "error_median", "abs_error_median"]
    summary_rows = []
    for name in ("gt", *ESTIMATES):
        vals = runs.column(f"{name}_tte")
        s = quantile_summary(vals)
        ok = np.array([v is not None for v in vals])
        err = np.array([v for v in vals if v is not None], dtype=float) - gt[ok]
        e_mean = float(err.mean()) if err.size else float("nan")
        e_med = float(np.median(err)) if err.size else float("nan")
        a_med = float(np.median(np.abs(err))) if err.size else float("nan")
        summary_rows.append([name, s["n"], s["mean"], s["sd"], s["q5"], s["q25"], s["q50"], s["q75"], s["q95"],
                             e_mean, e_med, a_med])
    failed = sum(1 for r in rows if r[-1])
    meta = {"kind": "benchmark", "runs_requested": config.runs, "runs_with_errors": failed,
            "config": config.model_dump(mode="json")}
    runs.metadata = dict(meta)
    return BenchmarkResult(runs, ResultTable(columns, summary_rows, meta))
