import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kotztail.errors import (
    DegenerateSample,
    InsufficientData,
    KnTooLarge,
    NonPositiveOrderStatistic,
    NotPositiveDefinite,
)
from kotztail.estimation import (
    SampleMatrix,
    TailFit,
    corr_estimate,
    default_kn,
    default_tn,
    excess_estimate,
    fit_tail,
    gardes_girard_delta,
    q_estimate,
    survivor_estimate,
    weibull_tail_coefficient,
)
from kotztail.kotz import KotzModel, KotzParams, canonical_params, gaussian_params, sample_kotz
from kotztail.limits import excess_limit
from kotztail.linalg import factorize
from kotztail.tail import TailRequest, tail_asymptotic, v_n


def column_sample(col, n=None):
    col = np.asarray(col, dtype=float)
    return SampleMatrix(np.column_stack([col, np.zeros_like(col) + np.arange(col.size)]))


def test_log_spacing_known_value():
    y = np.concatenate([np.full(10, 0.5), [math.e, math.e**2]])
    s = column_sample(y)
    assert weibull_tail_coefficient(s, 1, 2, 1.0) == pytest.approx(0.5)
    assert gardes_girard_delta(s, 1, 2, 1.0) == pytest.approx(2.0)


def test_equal_order_statistics():
    s = column_sample(np.concatenate([np.ones(5), np.full(4, 3.0)]))
    assert weibull_tail_coefficient(s, 1, 4, 1.0) == 0.0
    with pytest.raises(DegenerateSample):
        gardes_girard_delta(s, 1, 4, 1.0)


def test_order_statistic_errors():
    s = column_sample(np.concatenate([-np.ones(8), [2.0, 3.0]]))
    with pytest.raises(NonPositiveOrderStatistic):
        weibull_tail_coefficient(s, 1, 4, 1.0)
    with pytest.raises(KnTooLarge):
        weibull_tail_coefficient(s, 1, 10, 1.0)
    with pytest.raises(KnTooLarge):
        weibull_tail_coefficient(s, 1, 1, 1.0)


def test_q_estimate_known_values():
    n, k_n, d = 1000, 50, 2.0
    i = np.arange(1, k_n + 1)
    top = np.log(n / i) ** (1 / d)
    y = np.concatenate([np.full(n - k_n, 0.1), top])
    s = column_sample(y)
    assert q_estimate(s, 1, k_n, d) == pytest.approx(1.0, rel=1e-13)
    assert q_estimate(s, 1, 1, 1.7) == pytest.approx(math.log(n) / top[0] ** 1.7, rel=1e-13)


def test_scale_invariance_of_spacings():
    rng = np.random.default_rng(0)
    data = np.abs(rng.standard_normal((5000, 2))) + 0.01
    a = weibull_tail_coefficient(data, 1, 200, 0.3)
    b = weibull_tail_coefficient(data * 7.5, 1, 200, 0.3)
    assert a == pytest.approx(b, rel=1e-12)


@settings(max_examples=20, deadline=None)
@given(c=st.floats(1e-3, 1e3), seed=st.integers(0, 1000))
def test_scale_invariance_property(c, seed):
    data = np.random.default_rng(seed).exponential(size=(500, 2)) + 1e-3
    assert weibull_tail_coefficient(data * c, 2, 40, 1.0) == pytest.approx(
        weibull_tail_coefficient(data, 2, 40, 1.0), rel=1e-10)


def test_defaults():
    assert default_kn(10**6) == 3981
    assert default_tn(10**6, 3981) == pytest.approx(1 / math.log(10**6 / 3981))
    assert 0 < default_tn(10**6, 3981, "gg") < 1
    with pytest.raises(ValueError):
        default_tn(100, 10, "other")


def test_sample_matrix_validation():
    with pytest.raises(InsufficientData):
        SampleMatrix(np.ones((2, 2)))
    with pytest.raises(InsufficientData):
        SampleMatrix(np.ones((10, 1)))


def test_fit_gaussian_margin_delta():
    model = KotzModel(gaussian_params(2), factorize([[1, .5], [.5, 1]]))
    errs = [abs(fit_tail(sample_kotz(model, 10**6, seed=s)).delta_hat - 2) for s in range(5)]
    assert np.median(errs) <= 0.4


def test_corr_estimate():
    model = KotzModel(gaussian_params(2), factorize([[1, .5], [.5, 1]]))
    x = sample_kotz(model, 10**6, seed=1)
    assert abs(corr_estimate(x).sigma[0, 1] - 0.5) < 0.005
    z = np.random.default_rng(2).standard_normal((10**5, 3))
    off = corr_estimate(z).sigma[np.triu_indices(3, 1)]
    assert np.all(np.abs(off) < 3 / math.sqrt(10**5))
    dup = np.column_stack([z[:, 0], z[:, 0]])
    with pytest.raises(NotPositiveDefinite):
        corr_estimate(dup)
    with pytest.raises(InsufficientData):
        corr_estimate(z[:30])


def _oracle_fit(prm):
    return TailFit(prm.delta, prm.q, 100, 1.0, 1, 1 / prm.delta)


def test_survivor_estimate_oracle_identity():
    spec = factorize([[1, .5], [.5, 1]])
    prm = canonical_params(1, 1, 0)
    want = tail_asymptotic(TailRequest(KotzModel(prm, spec), np.ones(2))).value_at(5.0)
    got = survivor_estimate(None, 5.0, prm.p, prm.N, fit=_oracle_fit(prm), spec=spec)
    assert got == want
    assert survivor_estimate(None, 6.0, prm.p, prm.N, fit=_oracle_fit(prm), spec=spec) < got


def test_survivor_estimate_from_simulation():
    spec = factorize([[1, .5], [.5, 1]])
    prm = canonical_params(1, 1, 0)
    exp_ = tail_asymptotic(TailRequest(KotzModel(prm, spec), np.ones(2)))
    t = exp_.threshold_for(3e-4)
    x = sample_kotz(KotzModel(prm, spec), 10**6, seed=4)
    est = survivor_estimate(x, t, prm.p, prm.N)
    assert 1 / 3 <= est / exp_.value_at(t) <= 3


def test_excess_estimate_oracle():
    spec = factorize([[1, .5], [.5, 1]])
    prm = canonical_params(1, 1, 0)
    fit = _oracle_fit(prm)
    assert excess_estimate(None, 5.0, np.zeros(2), prm.p, prm.N, fit=fit, spec=spec) == 1.0
    x = np.array([0.3, 0.8])
    law = excess_limit(spec, np.ones(2))
    sol = tail_asymptotic(TailRequest(KotzModel(prm, spec), np.ones(2))).qp
    want = math.exp(-np.sum(law.rates * v_n(sol, prm, 5.0) * x))
    assert excess_estimate(None, 5.0, x, prm.p, prm.N, fit=fit, spec=spec) == pytest.approx(want, rel=1e-14)


def test_excess_estimate_against_conditional_monte_carlo():
    # exponential radius, rho = 0.5: W on I is two exponentials with rate 1/sqrt(3)
    spec = factorize([[1, .5], [.5, 1]])
    prm = canonical_params(1, 1, 0)
    model = KotzModel(prm, spec)
    t = 4.0
    x = sample_kotz(model, 4 * 10**6, seed=12)
    exc = x[np.all(x > t, axis=1)] - t
    assert exc.shape[0] > 2000
    off = np.array([0.5, 0.5])
    emp = np.mean(np.all(exc > off, axis=1))
    est = excess_estimate(None, t, off, prm.p, prm.N, fit=_oracle_fit(prm), spec=spec)
    assert est == pytest.approx(emp, rel=0.15)
