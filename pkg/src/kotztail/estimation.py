"""Semi-parametric estimation of the tail parameters and plug-in probabilities.

The marginal tail ``P(X_1 > y) ~ const y^beta exp(-q y^delta)`` is of Weibull
type.  The log-spacing statistic

    theta_hat = (1 / T_n) (1 / k_n) sum_{i=1}^{k_n} (log Y_{n-i+1:n} - log Y_{n-k_n+1:n})

estimates the Weibull tail coefficient ``theta = 1 / delta`` when
``T_n log(n / k_n) -> 1``.  Two choices of ``T_n`` are offered:

* ``"log"`` (default): ``T_n = 1 / log(n / k_n)``;
* ``"gg"``: ``T_n = mean_i [log log(n / i) - log log(n / k_n)]``, the
  bias-reducing choice of Gardes and Girard.

Given ``delta_hat``, the rate is estimated by
``q_hat = (1 / k_n) sum_i log(n / i) / Y_{n-i+1:n}^delta_hat``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import (
    DegenerateSample,
    DimensionMismatch,
    InsufficientData,
    KnTooLarge,
    NonPositiveOrderStatistic,
)
from .kotz import KotzModel, KotzParams
from .limits import excess_limit, excess_survivor
from .linalg import CorrelationSpec, IndexSet, factorize
from .qp import solve
from .tail import TailExpansion, TailRequest, tail_asymptotic, v_n

KN_EXPONENT = 0.6
TN_CHOICES = ("log", "gg")


@dataclass(frozen=True, eq=False)
class SampleMatrix:
    data: np.ndarray

    def __post_init__(self):
        d = np.array(self.data, dtype=float, copy=True)
        if d.ndim != 2:
            raise DimensionMismatch("sample must be an n x k matrix")
        n, k = d.shape
        if k < 2 or n <= k:
            raise InsufficientData(f"need n > k >= 2, got n={n}, k={k}")
        if not np.all(np.isfinite(d)):
            raise DimensionMismatch("sample entries must be finite")
        d.setflags(write=False)
        object.__setattr__(self, "data", d)

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def k(self) -> int:
        return self.data.shape[1]

    @cached_property
    def sorted_columns(self) -> np.ndarray:
        """Ascending order statistics, one column per coordinate."""
        s = np.sort(self.data, axis=0)
        s.setflags(write=False)
        return s

    def upper(self, coord: int, k_n: int) -> np.ndarray:
        """``Y_{n-i+1:n}`` for ``i = 1..k_n`` (descending) of 1-based ``coord``."""
        if not 1 <= coord <= self.k:
            raise DimensionMismatch(f"coordinate {coord} outside 1..{self.k}")
        if not 1 <= k_n < self.n:
            raise KnTooLarge(f"k_n={k_n} must lie in [1, n) with n={self.n}")
        return self.sorted_columns[self.n - k_n:, coord - 1][::-1]


@dataclass(frozen=True)
class TailFit:
    delta_hat: float
    q_hat: float
    k_n: int
    T_n: float
    coordinate: int
    theta_hat: float

    def to_dict(self) -> dict:
        return {"delta_hat": self.delta_hat, "q_hat": self.q_hat, "theta_hat": self.theta_hat,
                "k_n": self.k_n, "T_n": self.T_n, "coordinate": self.coordinate}


def _as_sample(sample) -> SampleMatrix:
    return sample if isinstance(sample, SampleMatrix) else SampleMatrix(sample)


def default_kn(n: int) -> int:
    return int(math.floor(n**KN_EXPONENT))


def default_tn(n: int, k_n: int, kind: str = "log") -> float:
    if kind == "log":
        return 1.0 / math.log(n / k_n)
    if kind == "gg":
        i = np.arange(1, k_n + 1)
        return float(np.mean(np.log(np.log(n / i)) - math.log(math.log(n / k_n))))
    raise ValueError(f"T_n choice must be one of {TN_CHOICES}")


def _check_kn(sample: SampleMatrix, k_n: int, minimum: int):
    if k_n < minimum:
        raise KnTooLarge(f"k_n must be at least {minimum}")
    if k_n >= sample.n:
        raise KnTooLarge(f"k_n={k_n} must be smaller than n={sample.n}")


def weibull_tail_coefficient(sample, coord: int, k_n: int, T_n: float) -> float:
    """Log-spacing estimate of ``theta = 1 / delta``.

    Raises
    ------
    NonPositiveOrderStatistic
        if ``Y_{n-k_n+1:n} <= 0``.
    """
    s = _as_sample(sample)
    _check_kn(s, k_n, 2)
    if not T_n > 0:
        raise DegenerateSample("T_n must be positive")
    top = s.upper(coord, k_n)
    if not top[-1] > 0:
        raise NonPositiveOrderStatistic("the k_n upper order statistics must be positive")
    logs = np.log(top)
    return float(np.mean(logs - logs[-1]) / T_n)


def gardes_girard_delta(sample, coord: int, k_n: int, T_n: float | None = None) -> float:
    """``delta_hat = 1 / theta_hat``; ``T_n`` defaults to ``1 / log(n / k_n)``."""
    s = _as_sample(sample)
    _check_kn(s, k_n, 2)
    if T_n is None:
        T_n = default_tn(s.n, k_n)
    theta = weibull_tail_coefficient(s, coord, k_n, T_n)
    if not theta > 0:
        raise DegenerateSample("the upper order statistics are all equal")
    return 1.0 / theta


def q_estimate(sample, coord: int, k_n: int, delta_hat: float) -> float:
    s = _as_sample(sample)
    _check_kn(s, k_n, 1)
    if not delta_hat > 0:
        raise DegenerateSample("delta_hat must be positive")
    top = s.upper(coord, k_n)
    if not top[-1] > 0:
        raise NonPositiveOrderStatistic("the k_n upper order statistics must be positive")
    i = np.arange(1, k_n + 1)
    return float(np.mean(np.log(s.n / i) / top**delta_hat))


def fit_tail(sample, coord: int = 1, k_n: int | None = None, T_n: float | str | None = None) -> TailFit:
    """Estimate ``(delta, q)`` from one coordinate.

    ``T_n`` may be a number or one of ``"log"`` and ``"gg"``.
    """
    s = _as_sample(sample)
    k_n = default_kn(s.n) if k_n is None else int(k_n)
    _check_kn(s, k_n, 2)
    if T_n is None or isinstance(T_n, str):
        T_n = default_tn(s.n, k_n, T_n or "log")
    theta = weibull_tail_coefficient(s, coord, k_n, T_n)
    if not theta > 0:
        raise DegenerateSample("the upper order statistics are all equal")
    delta = 1.0 / theta
    return TailFit(delta, q_estimate(s, coord, k_n, delta), k_n, float(T_n), coord, theta)


def corr_estimate(sample) -> CorrelationSpec:
    """Pearson correlation matrix, validated as positive definite.

    Raises
    ------
    InsufficientData
        if ``n <= 10 k``.
    NotPositiveDefinite
        for singular estimates (e.g. duplicated columns); more data or a
        shrinkage step is needed in that case.
    """
    s = _as_sample(sample)
    if s.n <= 10 * s.k:
        raise InsufficientData(f"need n > 10 k = {10 * s.k}, got n={s.n}")
    r = np.corrcoef(s.data, rowvar=False)
    r = 0.5 * (r + r.T)
    np.fill_diagonal(r, 1.0)
    return factorize(r)


def plugin_model(fit: TailFit, spec: CorrelationSpec, p: float, N: float) -> KotzModel:
    return KotzModel(KotzParams(p=p, q=fit.q_hat, delta=fit.delta_hat, N=N), spec)


def survivor_expansion(model: KotzModel, **gauss_kw) -> TailExpansion:
    return tail_asymptotic(TailRequest(model, np.ones(model.dim)), **gauss_kw)


def survivor_estimate(sample, t: float, p: float, N: float, *, coord: int = 1,
                      k_n: int | None = None, T_n=None, fit: TailFit | None = None,
                      spec: CorrelationSpec | None = None) -> float:
    """Plug-in estimate of ``P(X > t 1)``.

    ``fit`` and ``spec`` may be supplied to skip the corresponding estimation
    step; ``p`` and ``N`` are treated as known.
    """
    if fit is None:
        fit = fit_tail(sample, coord, k_n, T_n)
    if spec is None:
        spec = corr_estimate(sample)
    return survivor_expansion(plugin_model(fit, spec, p, N)).value_at(t)


def excess_estimate(sample, t: float, x, p: float, N: float, *, coord: int = 1,
                    k_n: int | None = None, T_n=None, fit: TailFit | None = None,
                    spec: CorrelationSpec | None = None) -> float:
    """Plug-in estimate of ``P(X - t 1 > x | X > t 1)`` from the limit law.

    Only an approximation for large ``t``: the excess is scaled by ``v_t``
    and evaluated under the limiting distribution.
    """
    if fit is None:
        fit = fit_tail(sample, coord, k_n, T_n)
    if spec is None:
        spec = corr_estimate(sample)
    model = plugin_model(fit, spec, p, N)
    a = np.ones(spec.dim)
    x = np.asarray(x, dtype=float)
    if x.shape != (spec.dim,):
        raise DimensionMismatch(f"x must have length {spec.dim}")
    law = excess_limit(spec, a)
    sol = solve(spec, a)
    scaled = v_n(sol, model.params, t) * x
    return excess_survivor(law, IndexSet.full(spec.dim), scaled)
