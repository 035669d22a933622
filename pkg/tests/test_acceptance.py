"""Acceptance suite: each test checks one criterion at its stated tolerance.

Every test records a single PASS/FAIL line; the lines are repeated in the
terminal summary under "acceptance criteria".
"""

from pathlib import Path

import numpy as np
from scipy import stats

from netinterference.ccv import CandidateConfig, TimeBlocks, run_ccv
from netinterference.core import ExperimentDesign, generate_staggered_design
from netinterference.dpnb import create_validation_batches
from netinterference.envs import (
    Affine,
    AuctionConfig,
    BeliefConfig,
    DataCenterConfig,
    ExerciseConfig,
    GaussianConfig,
    GaussianEnv,
    GraphSpec,
    LinearInMeansConfig,
    auction_round,
    linear_se_panel,
    make_env,
    scalar_recursion,
)
from netinterference.estimators import bcmp_estimate, dm, ht
from netinterference.harness import bands_overlap, dm_sweep, load_benchmark_config, load_sweep_config, run_benchmark

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def test_criterion_1_dm_bias_variance(acceptance_report):
    sigma = dm_sweep(load_sweep_config(CONFIGS / "dm_sweep_sigma.toml")).table
    mu = dm_sweep(load_sweep_config(CONFIGS / "dm_sweep_mu.toml")).table
    var = dict(zip(sigma.column("value"), sigma.column("variance")))
    var_ratio = var[1.6] / var[0.1]
    flat = bands_overlap(sigma.column("bias2"), sigma.column("bias2_se"))
    b2 = dict(zip(mu.column("value"), mu.column("bias2")))
    mvar = dict(zip(mu.column("value"), mu.column("variance")))
    dominates = b2[0.32] > mvar[0.32]
    growth = b2[0.32] / b2[0.01]
    ok = var_ratio >= 4 and flat and dominates and growth >= 10
    acceptance_report(1, "DM bias/variance sweep", ok,
                      f"var(1.6)/var(0.1)={var_ratio:.1f} bias2 bands overlap={flat} "
                      f"bias2(0.32)={b2[0.32]:.4f} var(0.32)={mvar[0.32]:.4f} bias2 growth={growth:.0f}x")
    assert ok


def test_criterion_2_exact_recovery(acceptance_report):
    probs = [0, 0.25, 0.25, 0.75, 0.75, 0.5]
    means = scalar_recursion(1.0, 0.5, -1.2, 0.0, probs, 0.0)
    n = 4
    Y = np.tile(means, (n, 1))
    W = np.zeros((n, len(probs)))
    for t, p in enumerate(probs):
        W[: int(round(p * n)), t] = 1
    est = bcmp_estimate(Y, W, np.zeros_like(W))
    coef_err = np.abs(np.asarray(est.params["coef"]) - [1.0, 0.5, -1.2, 0.0]).max()
    cf_err = np.abs(est.values - [0, 1, 1.5, 1.75, 1.875, 1.9375]).max()
    ok = coef_err < 1e-8 and cf_err < 1e-8
    acceptance_report(2, "exact recursion recovery", ok, f"coef err={coef_err:.1e} counterfactual err={cf_err:.1e}")
    assert ok


def _cfe_error(n_units: int, seed: int) -> float:
    cfg = GaussianConfig(n_units=n_units, horizon=9, seed=seed, mu=0.8, sigma=0.5, noise_sd=0.1,
                         g=Affine(const=1.0, y=0.5, w=1.0), h=Affine(const=0.5, yw=-0.3))
    env = GaussianEnv(cfg)
    W = generate_staggered_design(n_units, ExperimentDesign((3, 3, 3), (0.2, 0.5, 0.8)), seed)
    observed, control = env.ground_truth_pair(W, env.all_level(0))
    est = bcmp_estimate(observed, W, env.all_level(0))
    return float(np.abs(est.values - np.asarray(control).mean(axis=0))[1:].mean())


def test_criterion_3_consistency_trend(acceptance_report):
    small = np.median([_cfe_error(500, s) for s in range(50)])
    large = np.median([_cfe_error(4000, s) for s in range(50)])
    ratio = large / small
    ok = ratio <= 0.5
    acceptance_report(3, "bCMP consistency trend", ok,
                      f"median error N=500 {small:.4f} N=4000 {large:.4f} ratio={ratio:.2f}")
    assert ok


def test_criterion_4_decomposition(acceptance_report):
    N = 2000
    cfg = GaussianConfig(n_units=N, horizon=6, seed=1, mu=0.5, sigma=0.5, noise_sd=0.1,
                         g=Affine(const=1.0, y=0.5, w=1.0), h=Affine(const=0.5, yw=-0.3))
    env = GaussianEnv(cfg)
    W = generate_staggered_design(N, ExperimentDesign((3, 3), (0.3, 0.7)), 1)
    ks = max(stats.kstest(env.decomposition_residuals(W, t) * np.sqrt(N), "norm").statistic for t in range(6))
    rng = np.random.default_rng(0)
    scaled = [env.batch_residual_sd(W, 4, B, 2000, rng) * np.sqrt(B) for B in (25, 100, 400)]
    spread = max(scaled) / min(scaled)
    ok = ks < 0.05 and spread <= 1.5
    acceptance_report(4, "decomposition diagnostic", ok,
                      f"max KS over periods={ks:.4f} sqrt(B)*sd spread={spread:.2f}")
    assert ok


def test_criterion_5_ccv_oracle_selection(acceptance_report):
    coef = [0.5, 0.2, 0.3, 0.8, -0.3, 0.1, 0.2, 1.0, 0.0]
    true_model = CandidateConfig("fo_rec", 2, 20, None, 30, 0.0)
    wrong_lag = CandidateConfig("fo_rec", 1, 20, None, 30, 0.0)
    wins, worst_true_loss = 0, 0.0
    for seed in range(100):
        W = generate_staggered_design(300, ExperimentDesign((7, 7, 6), (0.1, 0.4, 0.8)), seed).values
        rng = np.random.default_rng(seed)
        Y = linear_se_panel(coef, 2, W, rng.normal(1.0, 0.3, (300, 2)))
        result = run_ccv(Y, W, [true_model, wrong_lag], TimeBlocks.equal(20, 3),
                         create_validation_batches(W, 2), seed=seed)
        wins += result.selected_index == 0
        worst_true_loss = max(worst_true_loss, float(result.losses[0]))
    ok = wins >= 95 and worst_true_loss < 1e-10
    acceptance_report(5, "CCV oracle selection", ok, f"true model selected {wins}/100, max loss={worst_true_loss:.1e}")
    assert ok


def test_criterion_6_baselines(acceptance_report):
    N, design = 500, ExperimentDesign((4, 4), (0.25, 0.75))
    env = GaussianEnv(GaussianConfig(n_units=N, horizon=8, mu=0.0, sigma=0.0, noise_sd=0.1,
                                     g=Affine(w=1.0), h=Affine(const=1.0, w=-1.2)))
    dms, hts = [], []
    for r in range(200):
        W = generate_staggered_design(N, design, 0, replicate=r)
        Y = env.simulate(W)
        dms.append(dm(Y, W, 1))
        hts.append(ht(Y, W, design.probs_per_period(), 1))
    lines = []
    ok = True
    for name, v in (("DM", np.array(dms)), ("HT", np.array(hts))):
        se = v.std(ddof=1) / np.sqrt(v.size)
        z = (v.mean() + 1.2) / se
        ok &= abs(z) <= 3
        lines.append(f"{name} mean={v.mean():.4f} ({z:+.2f} SE)")
    acceptance_report(6, "DM/HT without interference", ok, " ".join(lines))
    assert ok


def test_criterion_7_benchmark_direction(acceptance_report):
    result = run_benchmark(load_benchmark_config(CONFIGS / "gaussian_desk.json"))
    rows = {r["estimator"]: r for r in result.summary.records()}
    cmp_err, dm_err = abs(rows["cmp"]["error_median"]), abs(rows["dm"]["error_median"])
    ok = rows["cmp"]["n"] == 20 and cmp_err < dm_err
    acceptance_report(7, "CMP beats DM on bias", ok,
                      f"|median error| CMP={cmp_err:.4f} DM={dm_err:.4f} over {rows['cmp']['n']} runs")
    assert ok


def _random_design(rng, n, T):
    W = (rng.random((n, T + 1)) < rng.uniform(0.1, 0.9)).astype(float)
    W[:, 0] = 0
    return W


def test_criterion_8_environment_invariants(acceptance_report):
    rng = np.random.default_rng(2024)
    cases = 1000
    failures = {"binary": 0, "utilization": 0, "prices": 0, "crn": 0}

    for i in range(cases):
        n, T = int(rng.integers(10, 40)), int(rng.integers(1, 5))
        if i % 2 == 0:
            cfg = BeliefConfig(n_units=n, horizon=T, seed=i, beta=float(rng.uniform(0, 2)),
                               graph=GraphSpec(mean_degree=float(rng.uniform(2, 6))))
        else:
            cfg = ExerciseConfig(n_units=n, horizon=T, seed=i, c=float(rng.normal(0, 0.5)),
                                 graph=GraphSpec(mean_degree=float(rng.uniform(2, 6))))
        Y = np.asarray(make_env(cfg).simulate(_random_design(rng, n, T)))
        failures["binary"] += not np.isin(Y, (0.0, 1.0)).all()

    for i in range(cases):
        n, T = int(rng.integers(2, 12)), int(rng.integers(1, 5))
        cfg = DataCenterConfig(n_units=n, horizon=T, seed=i, load=float(rng.uniform(0.1, 1.5)),
                               n_job_types=int(rng.integers(1, 4)))
        Y = np.asarray(make_env(cfg).simulate(_random_design(rng, n, T)))
        failures["utilization"] += not ((Y >= 0) & (Y <= 1)).all()

    for i in range(cases):
        n = int(rng.integers(1, 8))
        V = rng.uniform(0, 100, (n, n))
        start = rng.uniform(0, 20, n)
        assignment, prices = auction_round(V, start, float(rng.uniform(0.01, 2)))
        bad = np.any(prices < start) or sorted(assignment) != list(range(n))
        if i % 10 == 0:
            cfg = AuctionConfig(n_units=n + 1, horizon=3, seed=i, price_memory=float(rng.uniform(0, 1)))
            Y = np.asarray(make_env(cfg).simulate(_random_design(rng, n + 1, 3)))
            bad |= np.any(Y[:, 1:] < cfg.price_memory * Y[:, :-1] - 1e-9)
        failures["prices"] += bool(bad)

    kinds = [
        lambda n, T, s: GaussianConfig(n_units=n, horizon=T, seed=s, sigma_t=0.2),
        lambda n, T, s: BeliefConfig(n_units=n, horizon=T, seed=s, graph=GraphSpec(mean_degree=3)),
        lambda n, T, s: LinearInMeansConfig(n_units=n, horizon=T, seed=s, graph=GraphSpec(mean_degree=3)),
        lambda n, T, s: ExerciseConfig(n_units=n, horizon=T, seed=s, graph=GraphSpec(mean_degree=3)),
        lambda n, T, s: DataCenterConfig(n_units=n, horizon=T, seed=s),
        lambda n, T, s: AuctionConfig(n_units=n, horizon=T, seed=s),
    ]
    for i in range(cases):
        n, T = int(rng.integers(8, 25)), int(rng.integers(1, 4))
        env = make_env(kinds[i % len(kinds)](n, T, i))
        W = _random_design(rng, n, T)
        a, b = env.ground_truth_pair(W, W.copy(), world=int(rng.integers(0, 3)))
        failures["crn"] += not np.array_equal(np.asarray(a), np.asarray(b))

    ok = not any(failures.values())
    acceptance_report(8, "environment invariants", ok,
                      f"{cases} cases per suite, failures {failures}")
    assert ok
