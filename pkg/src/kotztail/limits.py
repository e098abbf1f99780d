"""Limit laws: scaled conditional excesses and the Husler-Reiss triangular array.

Conditional excess
    Given ``X > t a``, the vector ``v_t (X - t a)`` converges to ``W``.  On the
    minimal index set ``I`` the components of ``W`` are independent
    exponentials with rates ``lambda_i = (S_II^{-1} a_I)_i / ||a_I||``.  On
    the binding part of ``J`` the limit is the conditional Gaussian
    ``Z_J | Z_I = 0`` restricted to ``Z_B > 0``; non-binding coordinates of
    ``J`` escape to infinity.

Husler-Reiss
    Componentwise maxima of ``n`` bivariate vectors whose correlation tends to
    one like ``1 - gamma^2 2 a_n / b_n`` converge, after norming by
    ``(a_n, b_n)``, to ``G_gamma``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from . import gaussian
from .errors import ConditionViolated, DimensionMismatch, NegativeThresholdOnJ, OutOfRange
from .gaussian import ConditionalGaussian
from .kotz import KotzParams, gaussian_params, marginal_isf
from .linalg import CorrelationSpec, IndexSet, spd_solve, submatrix
from .qp import solve

GAMMA_MIN = 1e-8


@dataclass(frozen=True)
class ExcessLimitLaw:
    I: IndexSet
    J: IndexSet
    rates: np.ndarray
    binding_J: IndexSet
    cond_law: ConditionalGaussian | None
    denom: float
    norm_a_I: float

    def to_dict(self) -> dict:
        return {
            "I": self.I.tolist(),
            "J": self.J.tolist(),
            "rates": self.rates.tolist(),
            "binding_J": self.binding_J.tolist(),
            "denom": self.denom,
            "cond_cov": self.cond_law.cov.tolist() if self.cond_law is not None else None,
        }


def _binding_thresholds(law: ExcessLimitLaw) -> np.ndarray:
    thr = np.full(len(law.J), -np.inf)
    thr[np.isin(law.J.members, law.binding_J.members)] = 0.0
    return thr


def excess_limit(spec: CorrelationSpec, a, **gauss_kw) -> ExcessLimitLaw:
    sol = solve(spec, a)
    rates = sol.lambda_I / sol.norm_a_I
    rates.setflags(write=False)
    if len(sol.J) == 0:
        return ExcessLimitLaw(sol.I, sol.J, rates, sol.binding_J, None, 1.0, sol.norm_a_I)
    cond = gaussian.conditional_law(spec, sol.I)
    law = ExcessLimitLaw(sol.I, sol.J, rates, sol.binding_J, cond, 1.0, sol.norm_a_I)
    denom = gaussian.survivor_prob(cond, _binding_thresholds(law), **gauss_kw).value
    return ExcessLimitLaw(sol.I, sol.J, rates, sol.binding_J, cond, denom, sol.norm_a_I)


def excess_survivor(law: ExcessLimitLaw, L: IndexSet, x, **gauss_kw) -> float:
    """``P(W_L > x)`` for the limit ``W`` described by ``law``.

    Parameters
    ----------
    law : ExcessLimitLaw
    L : IndexSet of the coordinates involved
    x : thresholds aligned with ``L`` (one per member, in increasing index order)

    Raises
    ------
    NegativeThresholdOnJ
        if a coordinate of ``L`` in ``J`` has a negative threshold.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.shape != (len(L),):
        raise DimensionMismatch(f"x has {x.size} entries for |L| = {len(L)}")
    members = np.asarray(L.members)
    in_I = np.isin(members, law.I.members)
    log_sf = -float(np.sum(law.rates[np.searchsorted(law.I.members, members[in_I])] * x[in_I]))
    on_J = ~in_I
    if not on_J.any():
        return math.exp(log_sf)
    if np.any(x[on_J] < 0):
        raise NegativeThresholdOnJ("thresholds on J coordinates must be non-negative")
    thr = _binding_thresholds(law)
    pos = np.searchsorted(law.J.members, members[on_J])
    binding = np.isfinite(thr[pos])
    thr[pos[binding]] = x[on_J][binding]
    if not np.isfinite(thr).any():
        return math.exp(log_sf)
    num = gaussian.survivor_prob(law.cond_law, thr, **gauss_kw).value
    return math.exp(log_sf) * num / law.denom


@dataclass(frozen=True)
class Profile:
    center: np.ndarray
    scale: float
    law: ConditionalGaussian


PROFILE_MODES = ("exceed", "equal")


def conditional_profile(spec: CorrelationSpec, a, I: IndexSet, params: KotzParams, t: float,
                        mode: str = "exceed", strict: bool = True) -> Profile:
    """Centering and scaling for ``X_J`` given ``X_I > t a_I`` or ``X_I = t a_I``.

    ``h_t (X_J - center)`` converges to ``law`` with ``h_t = scale``.  Both
    conditioning events share the same limit; ``mode`` only selects which
    precondition is checked when ``strict`` is set: ``"exceed"`` needs
    ``S_II^{-1} a_I > 0``, ``"equal"`` needs ``a_I != 0``.
    """
    if mode not in PROFILE_MODES:
        raise ConditionViolated(f"mode must be one of {PROFILE_MODES}")
    a = np.asarray(a, dtype=float)
    if a.shape != (spec.dim,):
        raise DimensionMismatch(f"a must have length {spec.dim}")
    a_I = a[I.idx]
    lam = spd_solve(submatrix(spec, I, I), a_I)
    norm2 = float(a_I @ lam)
    if strict:
        if mode == "exceed" and not np.all(lam > 0):
            raise ConditionViolated("S_II^{-1} a_I must be positive componentwise")
        if not norm2 > 0:
            raise ConditionViolated("a_I must be non-zero")
    J = I.complement()
    center = t * (submatrix(spec, J, I) @ lam)
    scale = math.sqrt(params.qdelta) * (t * math.sqrt(norm2)) ** (params.delta / 2.0 - 1.0)
    return Profile(center, scale, gaussian.conditional_law(spec, I))


@dataclass(frozen=True)
class HrParams:
    gamma: float
    a_n: float
    b_n: float
    n: float


def hr_norming(params: KotzParams, n: float | None = None, *, log_n: float | None = None):
    """Norming constants ``(a_n, b_n)`` built from the radial tail parameters.

    ``a_n = (L)^(1/d - 1) / (q d)`` and
    ``b_n = L^(1/d) + a_n (N log(L) / d + log p)`` with ``L = log(n) / q``.
    """
    if log_n is None:
        if n is None or not n >= 2:
            raise OutOfRange("n must be at least 2")
        log_n = math.log(n)
    L = log_n / params.q
    a_n = L ** (1.0 / params.delta - 1.0) / params.qdelta
    b_n = L ** (1.0 / params.delta) + a_n * (params.N * math.log(L) / params.delta + math.log(params.p))
    return a_n, b_n


def quantile_norming(params: KotzParams, k: int, n: float):
    """Norming from the exact marginal quantiles of the canonical model.

    ``b_n`` is the ``1 - 1/n`` quantile and ``a_n`` the distance to the
    ``1 - 1/(n e)`` quantile, so a single coordinate's normed maximum has
    distribution ``exp(-e^{-x})`` exactly at ``x = 0`` and ``x = 1`` to
    first order.
    """
    if not n >= 2:
        raise OutOfRange("n must be at least 2")
    if params.delta == 2.0 and params.q == 0.5 and params == gaussian_params(k):
        b = -float(special.ndtri(1.0 / n))
        return -float(special.ndtri(1.0 / (n * math.e))) - b, b
    b = marginal_isf(params, k, 1.0 / n)
    return marginal_isf(params, k, 1.0 / (n * math.e)) - b, b


def hr_cdf(x, y, gamma: float):
    """Bivariate Husler-Reiss distribution with unit Gumbel margins."""
    if not gamma > GAMMA_MIN:
        raise OutOfRange(f"gamma must exceed {GAMMA_MIN}; use complete_dependence_cdf")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    d = (x - y) / (2.0 * gamma)
    out = np.exp(-special.ndtr(gamma + d) * np.exp(-y) - special.ndtr(gamma - d) * np.exp(-x))
    return float(out) if out.ndim == 0 else out


def complete_dependence_cdf(x, y):
    """``gamma -> 0`` limit of :func:`hr_cdf`: ``exp(-e^{-min(x, y)})``."""
    out = np.exp(-np.exp(-np.minimum(np.asarray(x, dtype=float), np.asarray(y, dtype=float))))
    return float(out) if out.ndim == 0 else out


def independence_cdf(x, y):
    out = np.exp(-np.exp(-np.asarray(x, dtype=float)) - np.exp(-np.asarray(y, dtype=float)))
    return float(out) if out.ndim == 0 else out


def hr_corr_for_gamma(gamma: float, n: float | None = None, params: KotzParams | None = None,
                      *, log_n: float | None = None, norming: tuple[float, float] | None = None) -> float:
    """Row correlation ``1 - gamma^2 / (b_n / (2 a_n))`` for the triangular array.

    ``norming`` overrides the ``(a_n, b_n)`` pair, which otherwise comes from
    :func:`hr_norming` with ``params`` (bivariate Gaussian by default).
    """
    if not gamma > 0:
        raise OutOfRange("gamma must be positive")
    if norming is None:
        norming = hr_norming(params or gaussian_params(2), n, log_n=log_n)
    a_n, b_n = norming
    if not (a_n > 0 and b_n > 0):
        raise OutOfRange("norming constants must be positive")
    sigma = 1.0 - gamma**2 * 2.0 * a_n / b_n
    if not -1.0 < sigma < 1.0:
        raise OutOfRange(f"correlation {sigma!r} outside (-1, 1); increase n")
    return sigma
