"""Command line entry point.

Subcommands: simulate, estimate, tte, ccv, dm-sweep, benchmark. Global
flags (``--config --seed --out --threads --format``) may appear before or
after the subcommand.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np
from pydantic import ValidationError

from ..ccv import CandidateConfig, run_ccv
from ..core import (
    compute_tte,
    generate_staggered_design,
    load_csv,
    load_json,
    save_csv,
    save_json,
)
from ..dpnb import BatchParams, create_training_batches, create_validation_batches
from ..envs import make_env, parse_env_config, read_config_file
from ..errors import NetInterferenceError
from ..estimators import ESTIMATORS, dm, estimate_tte, ht, run_estimator, target_with_prefix
from .benchmark import run_benchmark
from .config import BenchmarkConfig, CCVSpec, DesignSpec, SweepConfig
from .export import ResultTable, export
from .sweep import dm_sweep


def _global_flags(parser: argparse.ArgumentParser, suppress: bool) -> None:
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    parser.add_argument("--config", default=d(None), help="JSON or TOML config file")
    parser.add_argument("--seed", type=int, default=d(None), help="override the config seed")
    parser.add_argument("--out", default=d("."), help="output directory")
    parser.add_argument("--threads", type=int, default=d(1), help="worker processes")
    parser.add_argument("--format", choices=("csv", "json"), default=d("json"), help="output format")


def _load_array(path: str) -> np.ndarray:
    p = Path(path)
    if p.suffix == ".json":
        return np.asarray(load_json(p)[0])
    return load_csv(p)


def _save_array(a, out: Path, stem: str, fmt: str, kind: str, seed=None) -> Path:
    path = out / f"{stem}.{fmt}"
    if fmt == "csv":
        save_csv(a, path)
    else:
        save_json(a, path, kind, seed=seed)
    return path


def _config_doc(args) -> dict:
    if not args.config:
        return {}
    return read_config_file(args.config)


def _with_seed(doc: dict, seed) -> dict:
    if seed is None:
        return doc
    doc = dict(doc)
    doc["seed"] = seed
    return doc


def _env_and_design(args):
    """``(world, env config, design)`` from a document with ``env``/``design``/``world`` keys or a bare env config."""
    doc = _config_doc(args)
    if not doc:
        raise SystemExit("this command needs --config")
    wrapped = "env" in doc
    env_cfg = parse_env_config(_with_seed(doc["env"] if wrapped else doc, args.seed))
    if wrapped and "design" in doc:
        design = DesignSpec.model_validate(doc["design"]).build()
        if design.horizon != env_cfg.horizon:
            raise ValueError(f"design horizon {design.horizon} differs from env horizon {env_cfg.horizon}")
    else:
        parts = np.array_split(np.arange(env_cfg.horizon), min(3, env_cfg.horizon))
        design = DesignSpec(stage_lengths=tuple(len(x) for x in parts),
                            stage_probs=(0.1, 0.2, 0.5)[:len(parts)]).build()
    world = int(doc.get("world", 0)) if wrapped else 0
    return world, env_cfg, design


def cmd_simulate(args) -> list[Path]:
    world, env_cfg, design = _env_and_design(args)
    env = make_env(env_cfg)
    W = generate_staggered_design(env.n_units, design, env_cfg.seed)
    Y = env.simulate(W, world=world)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    written = [_save_array(W, out, "treatment", args.format, "treatment", env_cfg.seed),
               _save_array(Y, out, "panel", args.format, "panel", env_cfg.seed)]
    if args.ground_truth:
        treat, control = env.ground_truth_pair(env.all_level(1), env.all_level(0), world=world)
        written.append(_save_array(treat, out, "panel_all_treat", args.format, "panel", env_cfg.seed))
        written.append(_save_array(control, out, "panel_all_control", args.format, "panel", env_cfg.seed))
    return written


def _train_batches(args, W):
    if args.batch_size is None:
        return None
    rng = np.random.default_rng(args.seed or 0)
    return create_training_batches(W, BatchParams(args.batch_size, args.batch_count), rng)


def cmd_estimate(args) -> list[Path]:
    Y, W = _load_array(args.panel), _load_array(args.treatment)
    lag = 1 if args.estimator in ("bcmp", "ho_rec") else args.lag
    if args.target == "observed":
        target = W
    else:
        target = np.full_like(W, 1.0 if args.target == "all-treat" else 0.0)
        target[:, 0] = 0.0
        target = target_with_prefix(W, target, lag)
    est = run_estimator(args.estimator, Y, W, target, train_batches=_train_batches(args, W),
                        lag=lag, alpha=args.alpha)
    table = ResultTable(["t", "estimate"], [[t, float(v)] for t, v in enumerate(est.values)],
                        {"estimator": est.estimator, "lag": lag, "target": args.target,
                         "fit": est.to_dict().get("params")})
    return [export(table, Path(args.out) / f"estimate.{args.format}", args.format)]


def cmd_tte(args) -> list[Path]:
    out = Path(args.out)
    if args.panel is None:
        world, env_cfg, _ = _env_and_design(args)
        env = make_env(env_cfg)
        treat, control = env.ground_truth_pair(env.all_level(1), env.all_level(0), world=world)
        value = compute_tte(treat, control, args.window)
        source = "ground_truth"
    else:
        Y, W = _load_array(args.panel), _load_array(args.treatment)
        source = args.estimator
        if args.estimator == "dm":
            value = dm(Y, W, args.window)
        elif args.estimator == "ht":
            probs = (np.array([float(p) for p in args.probs.split(",")]) if args.probs
                     else W.mean(axis=0))
            value = ht(Y, W, probs, args.window)
        else:
            value = estimate_tte(args.estimator, Y, W, args.window, train_batches=_train_batches(args, W),
                                 lag=args.lag, alpha=args.alpha)
    table = ResultTable(["source", "window", "tte"], [[source, args.window, float(value)]])
    return [export(table, out / f"tte.{args.format}", args.format)]


def cmd_ccv(args) -> list[Path]:
    Y, W = _load_array(args.panel), _load_array(args.treatment)
    doc = _config_doc(args)
    spec = CCVSpec.model_validate(doc.get("ccv", {}))
    candidates = ([CandidateConfig.from_dict(c) for c in doc["candidates"]] if "candidates" in doc
                  else spec.grid.build())
    result = run_ccv(Y, W, candidates, spec.blocks(W.shape[1] - 1),
                     create_validation_batches(W, spec.validation_batches),
                     seed=args.seed or 0, threads=args.threads)
    rows = [[r["index"], r["candidate"], r["loss"], r["error"]] for r in result.loss_table()]
    table = ResultTable(["index", "candidate", "loss", "error"], rows,
                        {"selected_index": result.selected_index, "selected": result.selected.label(),
                         "blocks": [list(b) for b in result.blocks.bounds]})
    out = Path(args.out)
    paths = [export(table, out / f"ccv_losses.{args.format}", args.format)]
    est_path = out / "ccv_estimates.csv"
    est_path.write_text(result.estimates_csv())
    return paths + [est_path]


def cmd_dm_sweep(args) -> list[Path]:
    doc = _with_seed(_config_doc(args), args.seed)
    cfg = SweepConfig.model_validate(doc)
    result = dm_sweep(cfg, threads=args.threads)
    return [export(result.table, Path(args.out) / f"dm_sweep_{cfg.sweep}.{args.format}", args.format)]


def cmd_benchmark(args) -> list[Path]:
    doc = _config_doc(args)
    if not doc:
        raise SystemExit("benchmark needs --config")
    doc = _with_seed(doc, args.seed)
    cfg = BenchmarkConfig.model_validate(doc)
    result = run_benchmark(cfg, threads=args.threads)
    out = Path(args.out)
    paths = [export(result.summary, out / f"benchmark_summary.{args.format}", args.format)]
    if cfg.raw_runs:
        paths.append(export(result.runs, out / f"benchmark_runs.{args.format}", args.format))
    return paths


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="netinterference",
                                     description="Counterfactual estimation under network interference")
    _global_flags(parser, suppress=False)
    common = argparse.ArgumentParser(add_help=False)
    _global_flags(common, suppress=True)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", parents=[common], help="simulate a treatment matrix and outcome panel")
    p.add_argument("--ground-truth", action="store_true", help="also write all-treat and all-control panels")
    p.set_defaults(func=cmd_simulate)

    def estimator_args(p, choices):
        p.add_argument("--estimator", choices=choices, default="fo_semi")
        p.add_argument("--lag", type=int, default=1)
        p.add_argument("--alpha", type=float, default=1e-4)
        p.add_argument("--batch-size", type=int, default=None)
        p.add_argument("--batch-count", type=int, default=100)

    def data_args(p, required=True):
        p.add_argument("--panel", required=required, help="outcome panel (csv or json)")
        p.add_argument("--treatment", required=required, help="treatment matrix (csv or json)")

    p = sub.add_parser("estimate", parents=[common], help="counterfactual mean series")
    data_args(p)
    estimator_args(p, sorted(ESTIMATORS))
    p.add_argument("--target", choices=("all-treat", "all-control", "observed"), default="all-treat")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("tte", parents=[common], help="total treatment effect (estimated or ground truth)")
    data_args(p, required=False)
    estimator_args(p, sorted(ESTIMATORS) + ["dm", "ht"])
    p.add_argument("--window", type=int, default=1)
    p.add_argument("--probs", default=None, help="comma-separated design probabilities per period (for ht)")
    p.set_defaults(func=cmd_tte)

    p = sub.add_parser("ccv", parents=[common], help="cross-validate a candidate grid")
    data_args(p)
    p.set_defaults(func=cmd_ccv)

    p = sub.add_parser("dm-sweep", parents=[common], help="DM bias/variance sweep")
    p.set_defaults(func=cmd_dm_sweep)

    p = sub.add_parser("benchmark", parents=[common], help="run the estimation benchmark")
    p.set_defaults(func=cmd_benchmark)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        paths = args.func(args)
    except ValidationError as exc:
        print(f"invalid configuration:\n{exc}", file=sys.stderr)
        return 2
    except (NetInterferenceError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for p in paths:
        print(p)
    return 0


if __name__ == "__main__":
    sys.exit(main())
