"""Gaussian machinery: the normal cdf, conditional laws ``Z_J | Z_I = 0`` and
orthant-type survivor probabilities ``P(W > lower)``.

Coordinates with ``lower = -inf`` are removed from the law before anything is
integrated.  What is left is evaluated by dimension:

* 0 coordinates: probability one;
* 1 coordinate: the normal tail, in closed form;
* 2 coordinates: the separation-of-variables integral reduces to a single
  smooth 1-D integral, done by adaptive Gauss-Kronrod after rescaling by the
  local decay rate (relative accuracy ~1e-13 far into the tail);
* 3 or more: Genz's separation-of-variables transform with randomized
  quasi-Monte Carlo (independently scrambled Sobol' sets), with the
  integration variables reordered so the most constrained come first.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy import integrate, special
from scipy.stats import qmc

from . import kernels
from .errors import DimensionMismatch, EmptyComplement
from .linalg import CorrelationSpec, IndexSet, _cholesky_checked, schur_complement

DEFAULT_POINTS = 2**13
DEFAULT_RANDOMIZATIONS = 8
DEFAULT_ABS_TOL = 1e-6
MAX_POINTS = 2**18
_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


def std_normal_cdf(x):
    """Standard normal distribution function (erfc based)."""
    out = special.ndtr(x)
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class ConditionalGaussian:
    """Centered Gaussian law of ``Z_J`` given ``Z_I = 0``."""

    J: IndexSet
    mean: np.ndarray
    cov: np.ndarray

    @property
    def dim(self) -> int:
        return len(self.J)


def conditional_law(spec: CorrelationSpec, I: IndexSet) -> ConditionalGaussian:
    if len(I) >= spec.dim:
        raise EmptyComplement("conditioning on every coordinate leaves nothing")
    cov = schur_complement(spec, I)
    _cholesky_checked(cov)
    cov.setflags(write=False)
    mean = np.zeros(cov.shape[0])
    mean.setflags(write=False)
    return ConditionalGaussian(I.complement(), mean, cov)


class Survivor(NamedTuple):
    value: float
    error: float

    @classmethod
    def of(cls, value, error) -> "Survivor":
        return cls(float(value), float(error))


def survivor_prob(law: ConditionalGaussian, lower, **kw) -> Survivor:
    """``P(W > lower)`` for ``W`` distributed as ``law``.

    See :func:`mvn_survivor` for the keyword arguments.
    """
    return mvn_survivor(law.cov, lower, **kw)


def mvn_survivor(cov, lower, *, seed: int = 0, n_points: int = DEFAULT_POINTS,
                 n_randomizations: int = DEFAULT_RANDOMIZATIONS,
                 abs_tol: float = DEFAULT_ABS_TOL) -> Survivor:
    """Survivor probability of a centered Gaussian vector.

    Parameters
    ----------
    cov : (d, d) positive definite covariance
    lower : (d,) thresholds in R or -inf
    seed : scrambling seed for the quasi-Monte Carlo path (d >= 3)
    n_points, n_randomizations : initial QMC budget; the point count doubles
        until the error estimate drops below ``abs_tol`` or ``MAX_POINTS``.

    Returns
    -------
    Survivor(value, error) where ``error`` is an absolute error estimate
    (three standard errors across randomizations for the QMC path).
    """
    cov = np.atleast_2d(np.asarray(cov, dtype=float))
    lower = np.atleast_1d(np.asarray(lower, dtype=float))
    if cov.shape != (lower.size, lower.size):
        raise DimensionMismatch(f"covariance {cov.shape} vs thresholds {lower.shape}")
    if np.any(np.isposinf(lower)) or np.any(np.isnan(lower)):
        raise DimensionMismatch("thresholds must be finite or -inf")
    keep = np.isfinite(lower)
    lower = lower[keep]
    cov = cov[np.ix_(keep, keep)]
    d = lower.size
    if d == 0:
        return Survivor(1.0, 0.0)
    sd = np.sqrt(np.diag(cov))
    h = lower / sd
    if d == 1:
        return Survivor.of(special.ndtr(-h[0]), 0.0)
    corr = cov / np.outer(sd, sd)
    if d == 2:
        return _bivariate(h[0], h[1], float(corr[0, 1]))
    return _genz_qmc(corr, h, seed, n_points, n_randomizations, abs_tol)


def _bivariate(h1: float, h2: float, rho: float) -> Survivor:
    """``P(Z1 > h1, Z2 > h2)`` for unit-variance normals with correlation ``rho``."""
    if h2 > h1:
        h1, h2 = h2, h1
    c = math.sqrt(max(1.0 - rho * rho, 0.0))
    if c == 0.0:
        if rho > 0:
            return Survivor.of(special.ndtr(-h1), 0.0)
        return Survivor.of(max(special.ndtr(-h2) - special.ndtr(h1), 0.0), 0.0)

    def logf(x):
        return -0.5 * x * x - _LOG_SQRT_2PI + special.log_ndtr((rho * x - h2) / c)

    # rescale so the integrand decays at unit rate just past h1
    z = (h2 - rho * h1) / c
    mills = math.exp(-0.5 * z * z - _LOG_SQRT_2PI - float(special.log_ndtr(-z)))
    rate = max(1.0, h1 + rho / c * mills)
    base = float(logf(h1))

    def g(s):
        return math.exp(float(logf(h1 + s / rate)) - base)

    val, err = integrate.quad(g, 0.0, np.inf, epsabs=0.0, epsrel=1e-13, limit=200)
    scale = math.exp(base) / rate
    return Survivor.of(val * scale, err * scale)


def _reorder(corr: np.ndarray, upper: np.ndarray) -> np.ndarray:
    """Genz-Bretz prioritization: at each step take the variable whose
    conditional probability of staying below its limit is smallest."""
    d = upper.size
    order = list(range(d))
    c = corr.copy()
    u = upper.copy()
    L = np.zeros((d, d))
    y = np.zeros(d)
    for i in range(d):
        best, best_p = i, np.inf
        for j in range(i, d):
            var = c[j, j] - L[j, :i] @ L[j, :i]
            if var <= 0:
                continue
            p = special.ndtr((u[j] - L[j, :i] @ y[:i]) / math.sqrt(var))
            if p < best_p:
                best, best_p = j, p
        if best != i:
            for arr in (c,):
                arr[[i, best], :] = arr[[best, i], :]
                arr[:, [i, best]] = arr[:, [best, i]]
            L[[i, best], :] = L[[best, i], :]
            u[[i, best]] = u[[best, i]]
            order[i], order[best] = order[best], order[i]
        L[i, i] = math.sqrt(c[i, i] - L[i, :i] @ L[i, :i])
        for j in range(i + 1, d):
            L[j, i] = (c[j, i] - L[j, :i] @ L[i, :i]) / L[i, i]
        lim = (u[i] - L[i, :i] @ y[:i]) / L[i, i]
        # expected value of a standard normal truncated above at lim
        y[i] = -math.exp(-0.5 * lim * lim - _LOG_SQRT_2PI - float(special.log_ndtr(lim)))
    return np.array(order)


def _genz_qmc(corr, h, seed, n_points, n_rand, abs_tol) -> Survivor:
    # P(Z > h) = P(-Z < -h); -Z has the same correlation
    upper = -h
    order = _reorder(corr, upper)
    corr = corr[np.ix_(order, order)]
    upper = upper[order]
    L = np.linalg.cholesky(corr)
    d = upper.size
    root = np.random.SeedSequence(seed)
    n = int(n_points)
    while True:
        ests = np.empty(n_rand)
        for r, child in enumerate(root.spawn(n_rand)):
            sobol = qmc.Sobol(d - 1, scramble=True, seed=np.random.default_rng(child))
            w = sobol.random_base2(int(math.log2(n)))
            ests[r] = kernels.sov_integrand(L, upper, w).mean()
        value = float(ests.mean())
        error = 3.0 * float(ests.std(ddof=1)) / math.sqrt(n_rand)
        if error <= abs_tol or n >= MAX_POINTS:
            return Survivor.of(min(max(value, 0.0), 1.0), error)
        n *= 2
