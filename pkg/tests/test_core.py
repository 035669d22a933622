import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from netinterference.core import (
    Batch,
    ExperimentDesign,
    OutcomePanel,
    TreatmentMatrix,
    all_level_matrix,
    batch_mean,
    batch_means,
    compute_tte,
    exposures,
    full_batch,
    generate_staggered_design,
    load_csv,
    load_json,
    rng_stream,
    save_csv,
    save_json,
    treatment_exposure,
)
from netinterference.errors import ConfigurationError, ContractError


def test_treatment_matrix_rejects_nonbinary_and_nonzero_first_column():
    with pytest.raises(ContractError):
        TreatmentMatrix(np.array([[0, 0.5]]))
    with pytest.raises(ContractError):
        TreatmentMatrix(np.array([[1, 0]]))
    with pytest.raises(ContractError):
        TreatmentMatrix(np.zeros((2, 1)))


def test_treatment_matrix_is_read_only():
    W = TreatmentMatrix(np.array([[0, 1, 0], [0, 0, 1]]))
    assert W.n_units == 2 and W.horizon == 2
    with pytest.raises(ValueError):
        W.values[0, 1] = 0
    np.testing.assert_array_equal(W.period_means(), [0, 0.5, 0.5])


def test_outcome_panel_requires_finite_values():
    with pytest.raises(ContractError):
        OutcomePanel(np.array([[0.0, np.nan]]))


def test_design_probs_per_period():
    d = ExperimentDesign((2, 1), (0.25, 0.75))
    np.testing.assert_array_equal(d.probs_per_period(), [0, 0.25, 0.25, 0.75])
    np.testing.assert_array_equal(d.stage_of_period(), [-1, 0, 0, 1])
    assert d.horizon == 3


@pytest.mark.parametrize("lengths,probs", [((), ()), ((1, 2), (0.5,)), ((0,), (0.5,)), ((1,), (1.5,))])
def test_design_validation(lengths, probs):
    with pytest.raises(ConfigurationError):
        ExperimentDesign(lengths, probs)


def test_staggered_design_is_deterministic_and_column_zero_is_control():
    d = ExperimentDesign((3, 3), (0.2, 0.8))
    W1 = generate_staggered_design(200, d, 5)
    W2 = generate_staggered_design(200, d, 5)
    np.testing.assert_array_equal(W1.values, W2.values)
    assert not W1.values[:, 0].any()
    W3 = generate_staggered_design(200, d, 5, replicate=1)
    assert not np.array_equal(W1.values, W3.values)


def test_staggered_design_marginals():
    d = ExperimentDesign((2, 2), (0.1, 0.6))
    W = generate_staggered_design(20000, d, 0).values
    np.testing.assert_allclose(W.mean(axis=0), d.probs_per_period(), atol=0.015)


def test_monotone_design_never_untreats():
    W = generate_staggered_design(500, ExperimentDesign((2, 2, 2), (0.1, 0.3, 0.5), monotone=True), 3).values
    assert np.all(np.diff(W, axis=1) >= 0)


def test_batch_validation():
    with pytest.raises(ContractError):
        Batch([])
    with pytest.raises(ContractError):
        Batch([1, 1])
    with pytest.raises(ContractError):
        Batch([-1])
    b = Batch([3, 1])
    assert b.to_list() == [1, 3]
    with pytest.raises(ContractError):
        b.check(3)


def test_batch_mean_examples():
    Y = np.array([[1.0, 2.0], [3.0, 4.0], [5.0, 6.0], [7.0, 8.0]])
    assert batch_mean(Y, Batch([0, 3]), 1) == 5.0
    assert batch_mean(Y, full_batch(4), 0) == 4.0
    with pytest.raises(IndexError):
        batch_mean(Y, Batch([0]), 2)
    np.testing.assert_array_equal(batch_means(Y, [Batch([0, 1]), Batch([2, 3])]), [[2, 3], [6, 7]])


def test_compute_tte_examples():
    one = np.ones((3, 4))
    zero = np.zeros((3, 4))
    assert compute_tte(one, zero, 2) == 1.0
    assert compute_tte(one, one, 3) == 0.0
    hi = np.array([[0.0, 0.0, 3.0], [0.0, 0.0, 5.0]])
    assert compute_tte(hi, np.zeros_like(hi), 1) == 4.0
    with pytest.raises(ContractError):
        compute_tte(one, np.zeros((2, 4)), 1)
    with pytest.raises(ContractError):
        compute_tte(one, zero, 4)


def test_exposure():
    W = np.array([[0, 1, 1, 0], [0, 0, 0, 0]])
    np.testing.assert_allclose(exposures(W), [2 / 3, 0])
    assert treatment_exposure(W, 0) == pytest.approx(2 / 3)
    with pytest.raises(IndexError):
        treatment_exposure(W, 2)


def test_all_level_matrix():
    W = all_level_matrix(3, 2, 1)
    np.testing.assert_array_equal(W.values, [[0, 1, 1]] * 3)


def test_rng_streams_are_independent_and_stable():
    a = rng_stream(1, "world", 0).random(3)
    b = rng_stream(1, "world", 0).random(3)
    c = rng_stream(1, "noise", 0).random(3)
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, c)


def test_csv_and_json_round_trip(tmp_path):
    W = generate_staggered_design(7, ExperimentDesign((2,), (0.5,)), 1)
    save_csv(W, tmp_path / "w.csv")
    np.testing.assert_array_equal(load_csv(tmp_path / "w.csv"), W.values)
    save_json(W, tmp_path / "w.json", "treatment", seed=1)
    obj, env = load_json(tmp_path / "w.json")
    assert isinstance(obj, TreatmentMatrix) and env["seed"] == 1
    np.testing.assert_array_equal(obj.values, W.values)
    assert json.loads((tmp_path / "w.json").read_text())["shape"] == [7, 3]


@settings(max_examples=50, deadline=None)
@given(row=st.lists(st.floats(-1e6, 1e6), min_size=2, max_size=8), n=st.integers(1, 5))
def test_csv_round_trip_is_exact(tmp_path_factory, row, n):
    Y = np.tile(row, (n, 1))
    path = tmp_path_factory.mktemp("csv") / "y.csv"
    save_csv(Y, path)
    np.testing.assert_array_equal(load_csv(path), Y)
