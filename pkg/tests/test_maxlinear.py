import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from numpy.testing import assert_allclose, assert_array_equal

from dags import brute_force_paths, random_dag
from tailtrees import (
    ConfigError,
    MaxLinearModel,
    RecursiveMLModel,
    TreeStructureError,
    marginal_constants,
    maxlinear_tail_law,
    root_change_law,
    sample_maxlinear,
    sem_to_maxlinear,
    theta_moment_ml,
)
from tailtrees.maxlinear import excluded_alpha_mass, path_coefficients
from tailtrees.tail_tree import law_difference

TOY = [[1.0, 1.0], [1.0, 0.0]]


def test_marginal_constants():
    assert_array_equal(marginal_constants(MaxLinearModel(TOY, 1.0)), [2.0, 1.0])
    assert_array_equal(marginal_constants(MaxLinearModel(np.eye(4), 2.7)), np.ones(4))
    assert_array_equal(marginal_constants(MaxLinearModel([[2.0]], 2.0)), [4.0])


def test_tail_laws_toy():
    ml = MaxLinearModel(TOY, 1.0)
    assert maxlinear_tail_law(ml, 0).as_dict() == {(1.0, 1.0): 0.5, (1.0, 0.0): 0.5}
    assert maxlinear_tail_law(ml, 1).as_dict() == {(1.0, 1.0): 1.0}
    assert maxlinear_tail_law(MaxLinearModel(np.eye(3), 1.0), 0).as_dict() == {(1.0, 0.0, 0.0): 1.0}


def test_tail_law_merges_equal_atoms():
    ml = MaxLinearModel([[1.0, 2.0, 1.0], [1.0, 2.0, 0.0]], 1.0)
    assert maxlinear_tail_law(ml, 0).as_dict() == {(1.0, 1.0): 0.75, (1.0, 0.0): 0.25}


def test_moments_toy():
    ml = MaxLinearModel(TOY, 1.0)
    assert theta_moment_ml(ml, 0, 1) == (0.5, True)
    assert theta_moment_ml(ml, 1, 0) == (1.0, False)
    eye = MaxLinearModel(np.eye(3), 1.5)
    assert theta_moment_ml(eye, 0, 2) == (0.0, False)
    assert_array_equal(excluded_alpha_mass(ml, 1), [1.0, 0.0])
    assert_array_equal(excluded_alpha_mass(ml, 0), [0.0, 0.0])


def test_invalid_models():
    with pytest.raises(ConfigError, match="rows \\[2\\]"):
        MaxLinearModel([[1.0], [0.0]], 1.0)
    with pytest.raises(ConfigError):
        MaxLinearModel([[-1.0]], 1.0)
    with pytest.raises(ConfigError):
        MaxLinearModel([[1.0]], -1.0)


def test_sem_examples():
    rm = RecursiveMLModel({"1": 2.0, "2": 0.5}, {})
    assert_array_equal(sem_to_maxlinear(rm, 1.0).coeff, np.diag([2.0, 0.5]))
    chain = RecursiveMLModel({"1": 1.0, "2": 1.0}, {("1", "2"): 2.0})
    assert_array_equal(path_coefficients(chain), [[1.0, 2.0], [0.0, 1.0]])
    assert_array_equal(sem_to_maxlinear(chain, 1.0).coeff, [[1.0, 0.0], [2.0, 1.0]])
    diamond = RecursiveMLModel(
        {v: 1.0 for v in "1234"}, {("1", "2"): 1.0, ("2", "4"): 1.0, ("1", "3"): 2.0, ("3", "4"): 2.0}
    )
    assert path_coefficients(diamond)[0, 3] == 4.0


def test_sem_cycle_and_validation():
    with pytest.raises(TreeStructureError, match="cycle"):
        RecursiveMLModel({"1": 1.0, "2": 1.0}, {("1", "2"): 1.0, ("2", "1"): 1.0})
    with pytest.raises(ConfigError):
        RecursiveMLModel({"1": 1.0}, {("1", "9"): 1.0})
    with pytest.raises(ConfigError):
        RecursiveMLModel({"1": 0.0}, {})


@given(st.integers(0, 2 ** 32 - 1))
def test_dp_matches_brute_force(seed):
    rm = random_dag(np.random.default_rng(seed))
    assert_array_equal(path_coefficients(rm), brute_force_paths(rm))


@given(st.integers(0, 2 ** 32 - 1), st.sampled_from([0.5, 1.0, 2.0]))
def test_ancestor_pairs_have_flag(seed, alpha):
    rm = random_dag(np.random.default_rng(seed))
    ml = sem_to_maxlinear(rm, alpha)
    idx = {v: k for k, v in enumerate(ml.nodes)}
    for i in rm.nodes:
        for j in rm.ancestors(i):
            assert theta_moment_ml(ml, idx[i], idx[j])[1]


@st.composite
def coefficient_matrices(draw):
    d = draw(st.integers(1, 4))
    s = draw(st.integers(1, 4))
    vals = st.sampled_from([0.0, 0.0, 0.5, 1.0, 2.0, 3.0])
    a = np.array(draw(st.lists(st.lists(vals, min_size=s, max_size=s), min_size=d, max_size=d)))
    a[:, 0] = np.where(a.max(axis=1) > 0, a[:, 0], 1.0)
    return a


@given(coefficient_matrices(), st.sampled_from([0.5, 1.0, 3.0]))
def test_laws_and_root_change(a, alpha):
    ml = MaxLinearModel(a, alpha)
    laws = [maxlinear_tail_law(ml, i) for i in range(ml.d)]
    for i, law in enumerate(laws):
        assert abs(law.probs.sum() - 1.0) <= 1e-12
        assert np.all(law.atoms[:, i] == 1.0)
        assert len(law) <= ml.s
    for i in range(ml.d):
        for j in range(ml.d):
            mom, flag = theta_moment_ml(ml, i, j)
            zero_in_j = laws[j].probs[laws[j].atoms[:, i] == 0].sum()
            # dichotomy: flag iff P(Theta_{j,i} > 0) = 1
            assert flag == (zero_in_j == 0)
            assert mom == pytest.approx(laws[i].expect(lambda th: th[:, j] ** alpha), rel=1e-12, abs=1e-300)
            if flag:
                assert law_difference(root_change_law(laws[i], ml.nodes[j], alpha), laws[j]) <= 1e-12


def test_root_change_toy_atomwise():
    ml = MaxLinearModel(TOY, 1.0)
    got = root_change_law(maxlinear_tail_law(ml, 0), "2", 1.0)
    assert got.as_dict() == {(1.0, 1.0): 1.0}


# ---------------------------------------------------------------- sampling

def test_frechet_tail_constant():
    n, t = 10 ** 7, 100.0
    x = sample_maxlinear(MaxLinearModel([[1.0]], 1.0), n, seed=0).column("1")
    p = -math.expm1(-1 / t)
    est = np.mean(x > t) * t
    assert abs(est - t * p) < 3 * math.sqrt(p * (1 - p) / n) * t


def test_comonotone_columns():
    s = sample_maxlinear(MaxLinearModel([[1.0], [1.0]], 2.0), 1000, seed=0)
    assert_array_equal(s.column("1"), s.column("2"))


def test_conditioned_toy_mass_near_zero():
    ml = MaxLinearModel(TOY, 1.0)
    s = sample_maxlinear(ml, 10 ** 7, seed=0)
    x1 = s.column("1")
    t = np.quantile(x1, 0.9999)
    keep = x1 > t
    frac = np.mean(s.column("2")[keep] / x1[keep] < 0.05)
    assert abs(frac - 0.5) <= 0.02


def test_sampling_worker_independent():
    ml = MaxLinearModel(TOY, 1.5)
    assert_array_equal(sample_maxlinear(ml, 140000, seed=1).values, sample_maxlinear(ml, 140000, seed=1, workers=4).values)
