import numpy as np
import pytest
from pydantic import ValidationError
from scipy.special import expit

from netinterference.core import ExperimentDesign, generate_staggered_design
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
    belief_adoption_prob,
    exercise_prob,
    gaussian_step,
    ground_truth_pair,
    jsq_assign,
    lim_step,
    load_env_config,
    make_env,
    make_graph,
    mean_field_coefficients,
    parse_env_config,
    row_normalize,
    scalar_recursion,
    simulate,
)
from netinterference.errors import ConfigurationError, ContractError, RoutingError

import scipy.sparse as sp


def design_matrix(n, T, seed=0, probs=(0.3, 0.7)):
    lengths = np.array_split(np.arange(T), len(probs))
    return generate_staggered_design(n, ExperimentDesign(tuple(len(x) for x in lengths), probs), seed)


# --------------------------------------------------------------------------
# gaussian


def test_gaussian_constant_h_only():
    cfg = GaussianConfig(n_units=50, horizon=5, mu=0, sigma=0, noise_sd=0)
    Y = np.asarray(simulate(cfg, np.zeros((50, 6))))
    np.testing.assert_array_equal(Y[:, 1:], 1.0)


def test_gaussian_without_coupling_is_local():
    cfg = GaussianConfig(n_units=30, horizon=3, g=Affine(), h=Affine(const=0.5, y=0.3, w=2.0), noise_sd=0.2)
    env = make_env(cfg)
    W = design_matrix(30, 3).values
    Y = np.asarray(env.simulate(W))
    world = env.world(0)
    for t in range(3):
        expected = 0.5 + 0.3 * Y[:, t] + 2.0 * W[:, t + 1] + world.noise[:, t]
        np.testing.assert_allclose(Y[:, t + 1], expected, atol=1e-12)


def test_gaussian_step_matches_scalar_recursion_without_heterogeneity():
    g, h = Affine(const=0.2, y=0.5, w=1.0), Affine(const=1.0, y=0.3, w=-1.2)
    cfg = GaussianConfig(n_units=40, horizon=6, mu=0.6, sigma=0, noise_sd=0, g=g, h=h, y0_sd=0)
    env = make_env(cfg)
    W = design_matrix(40, 6, probs=(0.25, 0.5, 0.75))
    Y = np.asarray(env.simulate(W))
    b, c, d, e = mean_field_coefficients(cfg)
    expected = scalar_recursion(b, c, d, e, W.period_means(), 1.0)
    np.testing.assert_allclose(Y.mean(axis=0), expected, atol=1e-12)


def test_gaussian_step_formula():
    cfg = GaussianConfig(n_units=20, horizon=2, sigma_t=0.3, g=Affine(const=1, y=0.5), h=Affine(w=1, yw=0.1))
    env = GaussianEnv(cfg)
    world = env.world(0)
    y = np.linspace(0, 1, 20)
    w = np.arange(20) % 2
    A_t = env.time_matrix(world, 1)
    g = 1 + 0.5 * y
    expected = (world.A + A_t) @ g + (w + 0.1 * y * w) + world.noise[:, 1]
    np.testing.assert_allclose(gaussian_step(world, y, w, 1, cfg, A_t), expected)
    np.testing.assert_allclose(env.step(world, y, w, 1), expected)


def test_gaussian_two_level_trajectory():
    N = 500
    cfg = GaussianConfig(n_units=N, horizon=8, mu=0.04, sigma=0.5, noise_sd=0.1)
    W = generate_staggered_design(N, ExperimentDesign((4, 4), (0.25, 0.75)), 0)
    Y = np.asarray(simulate(cfg, W))
    means = Y.mean(axis=0)
    # mean-field level 1 + (mu - 1.2) p
    np.testing.assert_allclose(means[1:5], 1 + (0.04 - 1.2) * 0.25, atol=0.1)
    np.testing.assert_allclose(means[5:], 1 + (0.04 - 1.2) * 0.75, atol=0.1)


def test_gaussian_world_regenerates_bit_identically():
    cfg = GaussianConfig(n_units=30, horizon=2, seed=11)
    a, b = GaussianEnv(cfg).world(3), GaussianEnv(cfg).world(3)
    np.testing.assert_array_equal(a.A, b.A)
    np.testing.assert_array_equal(a.noise, b.noise)
    assert not np.array_equal(a.A, GaussianEnv(cfg).world(4).A)


def test_gaussian_tte_monte_carlo_over_worlds():
    mu, N = 0.04, 200
    env = make_env(GaussianConfig(n_units=N, horizon=3, mu=mu, sigma=0.5, noise_sd=0.1))
    ttes = []
    for w in range(100):
        hi, lo = env.ground_truth_pair(env.all_level(1), env.all_level(0), world=w)
        ttes.append(np.asarray(hi)[:, -1].mean() - np.asarray(lo)[:, -1].mean())
    ttes = np.array(ttes)
    se = ttes.std(ddof=1) / np.sqrt(ttes.size)
    assert abs(ttes.mean() - (mu - 1.2)) < 3 * se + 1e-12


def test_gaussian_mean_dynamics_close_to_mean_field():
    N = 2000
    g, h = Affine(const=1.0, y=0.5, w=1.0), Affine(const=0.5, yw=-0.3)
    worst = 0.0
    for seed in range(50):
        cfg = GaussianConfig(n_units=N, horizon=3, seed=seed, mu=0.5, sigma=0.5, noise_sd=0.1, g=g, h=h)
        W = design_matrix(N, 3, seed=seed, probs=(0.2, 0.5, 0.8))
        Y = np.asarray(simulate(cfg, W))
        b, c, d, e = mean_field_coefficients(cfg)
        ybar, p = Y.mean(axis=0), W.period_means()
        pred = b + c * ybar[:-1] + d * p[1:] + e * ybar[:-1] * p[1:]
        worst = max(worst, np.abs(ybar[1:] - pred).max())
    assert worst < 5 / np.sqrt(N)


# --------------------------------------------------------------------------
# common-random-number and contract checks


def test_ground_truth_pair_identical_inputs():
    cfg = BeliefConfig(n_units=60, horizon=4, graph=GraphSpec(mean_degree=4))
    W = design_matrix(60, 4)
    a, b = ground_truth_pair(cfg, W, W)
    np.testing.assert_array_equal(np.asarray(a), np.asarray(b))


def test_treatment_free_dynamics_ignore_assignment():
    cfg = GaussianConfig(n_units=40, horizon=4, g=Affine(const=1.0, y=0.2), h=Affine(const=0.5, y=0.1))
    a, b = ground_truth_pair(cfg, design_matrix(40, 4, 1), design_matrix(40, 4, 2))
    np.testing.assert_array_equal(np.asarray(a), np.asarray(b))


def test_shape_and_first_column_contracts():
    env = make_env(GaussianConfig(n_units=5, horizon=2))
    with pytest.raises(ContractError):
        env.simulate(np.zeros((5, 2)))
    bad = np.zeros((5, 3))
    bad[0, 0] = 1
    with pytest.raises(ContractError):
        env.simulate(bad)
    W1 = np.zeros((5, 3))
    with pytest.raises(ContractError):
        env.ground_truth_pair(W1, bad)


# --------------------------------------------------------------------------
# belief


def test_belief_adoption_prob_examples():
    assert belief_adoption_prob(2, 2, 4, 0.0, 0.3) == 0.5
    assert belief_adoption_prob(3, 1, 4, 0.25, 1.0) == pytest.approx(1 / (1 + np.exp(-6)), abs=1e-12)
    assert belief_adoption_prob(3, 1, 4, 0.25, 1.0) == pytest.approx(0.997527, abs=1e-6)
    np.testing.assert_array_equal(belief_adoption_prob([0, 5], [5, 0], 5, 0.7, 0.0), [0.5, 0.5])


def test_belief_treatment_raises_adoption():
    env = make_env(BeliefConfig(n_units=400, horizon=5, effect_scale=2.0))
    hi, lo = env.ground_truth_pair(env.all_level(1), env.all_level(0))
    assert np.asarray(hi)[:, 1:].mean() > np.asarray(lo)[:, 1:].mean()


# --------------------------------------------------------------------------
# linear-in-means


def test_lim_step_examples():
    A = row_normalize(sp.csr_matrix(np.array([[0.0, 1.0], [1.0, 0.0]])))
    b = 5.0
    y = lim_step(np.array([b, b]), np.array([b, b]), np.array([b + 2, b]), A, np.zeros(2), 0.4, 0.0, 0.0)
    assert y[1] == pytest.approx(b + 0.8)
    iso = sp.csr_matrix((1, 1))
    out = lim_step(np.array([3.0]), np.array([3.0]), np.array([9.0]), iso, np.array([1.0]), 0.4, 0.2, 1.0)
    assert out[0] == 4.0
    base = lim_step(np.array([1.0, 2.0]), np.array([0.0, 0.0]), np.array([7.0, 8.0]), A, np.ones(2), 0, 0, 0)
    np.testing.assert_array_equal(base, [1.0, 2.0])


def test_lim_without_spillovers_equals_baseline():
    cfg = LinearInMeansConfig(n_units=80, horizon=6, gamma=0, delta_p=0, delta_u_mean=0, delta_u_sd=0)
    env = make_env(cfg)
    Y = np.asarray(env.simulate(design_matrix(80, 6)))
    np.testing.assert_array_equal(Y, env.world(0).baseline)


def test_lim_direct_effects_are_nonnegative():
    env = make_env(LinearInMeansConfig(n_units=500, horizon=2))
    assert env.world(0).delta_u.min() >= 0


# --------------------------------------------------------------------------
# exercise


def test_exercise_prob_examples():
    assert exercise_prob(0, 0, 0, 0, 0, 0, 0, 0, 0) == 0.5
    assert exercise_prob(2, 0, 0, 0, 0, 0, 0, 0, 0) == pytest.approx(0.880797, abs=1e-6)
    probs = [exercise_prob(0, 0, 0, 0, 0, 5.0, 0, 0, eta) for eta in (0, 1, 5, 50)]
    assert np.all(np.diff(probs) < 0) and probs[-1] < 1e-100


def test_exercise_logistic_formula():
    args = dict(alpha=0.3, tau=0.5, w=1, y_prev=1, z_count=4, v_var=0.2, c=0.04, e=0.01, eta=0.02)
    expected = expit(0.3 + 0.5 + 0.04 * 4 + 0.01 * 4 - 0.02 * 0.2)
    assert exercise_prob(**args) == pytest.approx(expected)


def test_exercise_zero_coefficients_gives_coin_flips():
    N = 4000
    cfg = ExerciseConfig(n_units=N, horizon=4, c=0, e=0, eta=0, base_mean=0, base_sd=0,
                         base_weekly=(0.0,), effect_mean=0, effect_sd=0, effect_weekly=(0.0,))
    Y = np.asarray(simulate(cfg, design_matrix(N, 4)))
    assert np.all(np.abs(Y[:, 1:].mean(axis=0) - 0.5) <= 3 / np.sqrt(N))


# --------------------------------------------------------------------------
# data center


def test_jsq_examples():
    rng = np.random.default_rng(0)
    assert jsq_assign(np.array([4, 9]), [1], 2, rng) == 1
    assert jsq_assign(np.array([0, 5]), [0, 1], 2, rng) == 0
    with pytest.raises(RoutingError):
        jsq_assign(np.array([0]), [], 2, rng)


def test_jsq_uniform_tie_break():
    rng = np.random.default_rng(1)
    picks = np.array([jsq_assign(np.zeros(3), [0, 1, 2], 2, rng) for _ in range(10_000)])
    freq = np.bincount(picks, minlength=3) / picks.size
    np.testing.assert_allclose(freq, 1 / 3, atol=0.02)


def test_faster_servers_lower_utilisation():
    env = make_env(DataCenterConfig(n_units=60, horizon=8))
    hi, lo = env.ground_truth_pair(env.all_level(1), env.all_level(0))
    hi, lo = np.asarray(hi), np.asarray(lo)
    np.testing.assert_array_equal(hi[:, 0], lo[:, 0])
    assert hi[:, 1:].mean() < lo[:, 1:].mean()


# --------------------------------------------------------------------------
# auction


def test_auction_diagonal_assignment():
    V = np.array([[10.0, 0.0], [0.0, 10.0]])
    assignment, prices = auction_round(V, np.zeros(2), 0.1)
    np.testing.assert_array_equal(assignment, [0, 1])
    assert np.all(prices >= 0)


def test_auction_single_bidder():
    assignment, prices = auction_round([[7.0]], [0.0], 0.25)
    assert assignment[0] == 0 and 0 < prices[0] <= 0.25


def test_auction_epsilon_complementary_slackness():
    rng = np.random.default_rng(3)
    V = rng.uniform(0, 50, (6, 6))
    start = rng.uniform(0, 5, 6)
    eps = 0.2
    assignment, prices = auction_round(V, start, eps)
    assert sorted(assignment) == list(range(6))
    net = V - prices
    for i, j in enumerate(assignment):
        assert net[i, j] >= net[i].max() - eps - 1e-12
    assert np.all(prices >= start)


def test_auction_two_object_vignette_directions():
    V = np.array([[100.0, 90.0], [95.0, 70.0]])
    _, base = auction_round(V, np.zeros(2), 0.01)
    treated = V.copy()
    treated[:, 0] *= 1.1
    _, boosted = auction_round(treated, np.zeros(2), 0.01)
    assert boosted[0] > base[0]
    assert boosted[1] < base[1]


def test_auction_rejects_bad_input():
    with pytest.raises(ContractError):
        auction_round([[1.0, np.inf], [0.0, 1.0]], [0, 0], 0.1)
    with pytest.raises(ContractError):
        auction_round([[1.0, 2.0]], [0, 0], 0.1)


def test_auction_env_treatment_raises_prices():
    env = make_env(AuctionConfig(n_units=30, horizon=3, tau=0.3))
    hi, lo = env.ground_truth_pair(env.all_level(1), env.all_level(0))
    assert np.asarray(hi)[:, 1:].mean() > np.asarray(lo)[:, 1:].mean()


# --------------------------------------------------------------------------
# graphs and configs


@pytest.mark.parametrize("generator", ["preferential_attachment", "configuration_model", "k_regular"])
def test_graph_generators(generator):
    A = make_graph(GraphSpec(generator=generator, mean_degree=6), 300, np.random.default_rng(0))
    assert (A != A.T).nnz == 0
    assert A.diagonal().sum() == 0
    assert 4 <= A.sum() / 300 <= 8


def test_graph_degree_bounds():
    with pytest.raises(ConfigurationError):
        make_graph(GraphSpec(mean_degree=10), 5, np.random.default_rng(0))


def test_row_normalize_handles_isolated_nodes():
    A = sp.csr_matrix(np.array([[0, 1, 1], [1, 0, 0], [0, 0, 0]], dtype=float))
    np.testing.assert_allclose(np.asarray(row_normalize(A).sum(axis=1)).ravel(), [1, 1, 0])


def test_config_errors_have_locations():
    with pytest.raises(ValidationError) as info:
        parse_env_config({"kind": "gaussian", "n_units": 5, "horizon": 2, "sigma": -1})
    assert "sigma" in str(info.value)
    with pytest.raises(ValidationError):
        parse_env_config({"kind": "nope", "n_units": 5, "horizon": 2})
    with pytest.raises(ValidationError):
        parse_env_config({"kind": "auction", "n_units": 5, "horizon": 2, "type_probs": [1, 1, 0, 0]})


def test_config_files(tmp_path):
    (tmp_path / "e.toml").write_text('kind = "belief"\nn_units = 40\nhorizon = 3\n[graph]\nmean_degree = 4\n')
    cfg = load_env_config(tmp_path / "e.toml")
    assert cfg.kind == "belief" and cfg.graph.mean_degree == 4
    (tmp_path / "e.json").write_text('{"env": {"kind": "exercise", "n_units": 40, "horizon": 3}}')
    assert load_env_config(tmp_path / "e.json").kind == "exercise"
