import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_corr
from kotztail.errors import DimensionMismatch, EmptyComplement
from kotztail.gaussian import (
    conditional_law,
    mvn_survivor,
    std_normal_cdf,
    survivor_prob,
)
from kotztail.linalg import IndexSet, equicorrelated, factorize


def test_std_normal_cdf():
    assert std_normal_cdf(0.0) == 0.5
    assert std_normal_cdf(np.inf) == 1.0
    assert std_normal_cdf(-np.inf) == 0.0
    assert std_normal_cdf(1.96) == pytest.approx(0.9750021048517796, abs=1e-15)


def test_conditional_law_known_values():
    law = conditional_law(factorize(np.eye(3)), IndexSet([1], 3))
    np.testing.assert_array_equal(law.cov, np.eye(2))
    assert law.J.tolist() == [2, 3]
    np.testing.assert_array_equal(law.mean, 0)
    law = conditional_law(factorize([[1, .3], [.3, 1]]), IndexSet([1], 2))
    np.testing.assert_allclose(law.cov, [[1 - .09]])
    law = conditional_law(equicorrelated(3, .5), IndexSet([1], 3))
    np.testing.assert_allclose(law.cov, [[.75, .25], [.25, .75]], atol=1e-15)
    with pytest.raises(EmptyComplement):
        conditional_law(equicorrelated(3, .5), IndexSet.full(3))


def test_one_dimensional_median():
    law = conditional_law(factorize([[1, .6], [.6, 1]]), IndexSet([2], 2))
    assert survivor_prob(law, [0.0]).value == 0.5


def test_orthant_values():
    assert mvn_survivor(np.eye(2), [0, 0]).value == pytest.approx(0.25, abs=1e-14)
    assert mvn_survivor([[1, .5], [.5, 1]], [0, 0]).value == pytest.approx(1 / 3, abs=1e-12)
    # 1/8 + 3 arcsin(1/2) / (4 pi) = 1/4
    res = mvn_survivor(equicorrelated(3, .5).sigma, [0, 0, 0])
    assert res.value == pytest.approx(0.25, abs=1e-6)
    assert res.error <= 1e-6


def test_trivariate_against_one_dimensional_oracle():
    # equicorrelated vectors reduce to a single integral, evaluated once with mpmath and frozen here
    res = mvn_survivor(equicorrelated(3, .5).sigma, [1, 1, 1])
    assert res.value == pytest.approx(0.03379698936421158, abs=2e-6)
    assert res.error <= 1e-6


def test_four_dimensional_far_tail():
    res = mvn_survivor(equicorrelated(4, .3).sigma, [3, 3, 3, 3], abs_tol=1e-10)
    assert res.value == pytest.approx(1.6894556113994551e-07, rel=1e-3)


def test_neg_inf_is_marginalized_exactly():
    s = equicorrelated(3, .4).sigma
    full = mvn_survivor(s, [0.3, -np.inf, 1.1])
    sub = mvn_survivor(s[np.ix_([0, 2], [0, 2])], [0.3, 1.1])
    assert full == sub
    assert mvn_survivor(s, [-np.inf] * 3).value == 1.0


def test_bad_inputs():
    with pytest.raises(DimensionMismatch):
        mvn_survivor(np.eye(2), [0, 0, 0])
    with pytest.raises(DimensionMismatch):
        mvn_survivor(np.eye(2), [np.inf, 0])
    with pytest.raises(DimensionMismatch):
        mvn_survivor(np.eye(2), [np.nan, 0])


def test_bivariate_far_tail_accuracy():
    # P(Z1 > 6, Z2 > 6) for independent normals is (1 - Phi(6))^2
    tail = 9.865876450376946e-10
    assert mvn_survivor(np.eye(2), [6, 6]).value == pytest.approx(tail**2, rel=1e-12)


def test_deterministic_given_seed():
    s = equicorrelated(4, .2).sigma
    assert mvn_survivor(s, [.1, .2, .3, .4], seed=5) == mvn_survivor(s, [.1, .2, .3, .4], seed=5)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10**6), d=st.integers(1, 5))
def test_diagonal_equals_product(seed, d):
    rng = np.random.default_rng(seed)
    v = rng.uniform(0.3, 3, d)
    h = rng.uniform(-2, 2, d)
    expected = math.prod(std_normal_cdf(-hi / math.sqrt(vi)) for hi, vi in zip(h, v))
    assert mvn_survivor(np.diag(v), h, abs_tol=1e-10).value == pytest.approx(expected, abs=1e-9)


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 10**6), d=st.integers(2, 4), bump=st.floats(0.05, 1.0))
def test_monotone_in_thresholds(seed, d, bump):
    rng = np.random.default_rng(seed)
    s = random_corr(rng, d)
    h = rng.uniform(-1, 1, d)
    j = int(rng.integers(d))
    h2 = h.copy()
    h2[j] += bump
    lo = mvn_survivor(s, h, abs_tol=1e-8)
    hi = mvn_survivor(s, h2, abs_tol=1e-8)
    assert hi.value <= lo.value + lo.error + hi.error


def test_dropping_matches_lower_dimension_within_error():
    rng = np.random.default_rng(8)
    s = random_corr(rng, 3)
    h = np.array([0.2, -0.4, -np.inf])
    three = mvn_survivor(s, h)
    two = mvn_survivor(s[:2, :2], h[:2])
    assert three.value == pytest.approx(two.value, abs=1e-12)
