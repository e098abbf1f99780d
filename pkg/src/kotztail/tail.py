"""Exact tail asymptotics of ``P(X > t a + x / v_t)`` for Kotz Type III vectors.

With ``I`` the minimal index set of the quadratic program for ``a``,
``m = |I|`` and ``c = ||a_I||`` (so ``c^2 = a_I^T S_II^{-1} a_I``),

    P(X > t a + x / v_t) ~ K t^beta exp(-q c^delta t^delta),
    beta = N + delta (1 - (k + m) / 2),
    K = p (q delta)^(1-(k+m)/2) c^(m + beta) Gamma(k/2) 2^(k/2-1)
        * exp(-x_I^T S_II^{-1} a_I / c) * G
        / ((2 pi)^(m/2) |S_II|^(1/2) prod_i (S_II^{-1} a_I)_i),

where ``G = P(Z_B > x_B | Z_I = 0)`` over the binding coordinates ``B`` of
``J`` (``G = 1`` when ``B`` is empty).  Non-binding coordinates of ``J`` are
integrated out because their thresholds diverge to ``-inf``.

Everything is assembled in log space, so ``log_value_at`` stays finite far
beyond the range where ``value_at`` underflows.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize, special

from . import gaussian
from .errors import DimensionMismatch, NonPositiveArgument, NormalizationViolated
from .kotz import KotzModel, KotzParams
from .linalg import CorrelationSpec, IndexSet, submatrix
from .qp import QpSolution, binding_mask, solve

NORM_RTOL = 1e-9
_LOG_2PI = math.log(2.0 * math.pi)


@dataclass(frozen=True)
class TailRequest:
    model: KotzModel
    a: np.ndarray
    x: np.ndarray | None = None
    t: float = 1.0

    def __post_init__(self):
        k = self.model.dim
        a = np.asarray(self.a, dtype=float)
        x = np.zeros(k) if self.x is None else np.asarray(self.x, dtype=float)
        if a.shape != (k,) or x.shape != (k,):
            raise DimensionMismatch(f"a and x must have length {k}")
        if not np.all(np.isfinite(x)):
            raise DimensionMismatch("x must be finite")
        if not (np.isfinite(self.t) and self.t > 0):
            raise NonPositiveArgument("t must be positive")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "x", x)


@dataclass(frozen=True)
class TailExpansion:
    """``K t^beta exp(-c t^delta)`` together with the pieces it is built from."""

    log_constant: float
    poly_exponent: float
    exp_coefficient: float
    exp_power: float
    qp: QpSolution
    gauss_factor: float
    gauss_error: float = 0.0
    gauss_set: IndexSet | None = field(default=None)

    @property
    def constant(self) -> float:
        return math.exp(self.log_constant)

    def log_value_at(self, t):
        t = np.asarray(t, dtype=float)
        out = self.log_constant + self.poly_exponent * np.log(t) - self.exp_coefficient * t**self.exp_power
        return float(out) if out.ndim == 0 else out

    def value_at(self, t):
        out = np.exp(self.log_value_at(t))
        return float(out) if np.ndim(out) == 0 else out

    def threshold_for(self, level: float) -> float:
        """The ``t`` at which ``value_at(t) == level`` (on the decreasing branch)."""
        target = math.log(level)
        d, c, b = self.exp_power, self.exp_coefficient, self.poly_exponent
        # beyond t0 the expansion is strictly decreasing
        t0 = max((max(b, 0.0) / (c * d)) ** (1.0 / d), 1e-8) if b > 0 else 1e-8
        f = lambda t: self.log_value_at(t) - target  # noqa: E731
        hi = max(2.0 * t0, 1.0)
        while f(hi) > 0:
            hi *= 2.0
        lo = t0
        if f(lo) < 0:
            raise NonPositiveArgument(f"level {level} is above the expansion's maximum")
        return optimize.brentq(f, lo, hi, xtol=1e-14, rtol=4 * np.finfo(float).eps)

    def to_dict(self) -> dict:
        return {
            "K": self.constant,
            "log_K": self.log_constant,
            "beta": self.poly_exponent,
            "c": self.exp_coefficient,
            "delta": self.exp_power,
            "gauss_factor": self.gauss_factor,
            "gauss_error": self.gauss_error,
            "gauss_coordinates": self.gauss_set.tolist() if self.gauss_set is not None else [],
            "qp": self.qp.to_dict(),
        }


def v_n(qp: QpSolution, params: KotzParams, t: float) -> np.ndarray:
    """Second-order scaling vector: ``qd (t c)^(d-1)`` on I, ``sqrt(qd) (t c)^(d/2-1)`` on J."""
    if not t > 0:
        raise NonPositiveArgument("t must be positive")
    tc = t * qp.norm_a_I
    k = len(qp.I) + len(qp.J)
    v = np.empty(k)
    v[qp.I.idx] = params.qdelta * tc ** (params.delta - 1.0)
    if len(qp.J):
        v[qp.J.idx] = math.sqrt(params.qdelta) * tc ** (params.delta / 2.0 - 1.0)
    return v


def _log_shape_factor(spec: CorrelationSpec, sol: QpSolution) -> float:
    """``log[Gamma(k/2) 2^(k/2-1) / ((2 pi)^(m/2) |S_II|^(1/2) prod lambda_i)]``."""
    k, m = spec.dim, sol.m
    if np.any(sol.lambda_I <= 0):
        raise NonPositiveArgument("multipliers must be positive")
    S_II = submatrix(spec, sol.I, sol.I)
    _, logdet = np.linalg.slogdet(S_II)
    return (special.gammaln(k / 2) + (k / 2 - 1) * math.log(2.0) - 0.5 * m * _LOG_2PI
            - 0.5 * logdet - float(np.sum(np.log(sol.lambda_I))))


def _gauss_factor(spec: CorrelationSpec, sol: QpSolution, thresholds_J: np.ndarray,
                  **kw) -> tuple[float, float, IndexSet]:
    """``P(Z_J > thresholds | Z_I = 0)``; ``-inf`` entries are dropped."""
    if len(sol.J) == 0:
        return 1.0, 0.0, IndexSet([], spec.dim, allow_empty=True)
    keep = np.isfinite(thresholds_J)
    used = IndexSet(np.asarray(sol.J.members)[keep], spec.dim, allow_empty=True)
    if not keep.any():
        return 1.0, 0.0, used
    law = gaussian.conditional_law(spec, sol.I)
    res = gaussian.survivor_prob(law, thresholds_J, **kw)
    return res.value, res.error, used


def tail_asymptotic(req: TailRequest, **gauss_kw) -> TailExpansion:
    """Exact asymptotic expansion of ``P(X > t a + x / v_t)``.

    Parameters
    ----------
    req : TailRequest
        ``req.t`` is not used by the expansion itself; evaluate with
        :meth:`TailExpansion.value_at`.
    **gauss_kw
        Forwarded to the Gaussian survivor routine (seed, budget, tolerance).
    """
    spec = req.model.spec
    prm = req.model.params
    sol = solve(spec, req.a)
    k, m = spec.dim, sol.m
    c = sol.norm_a_I
    expo = 1.0 - (k + m) / 2.0
    beta = prm.N + prm.delta * expo

    thr = np.full(len(sol.J), -np.inf)
    if len(sol.J):
        binding = binding_mask(req.a[sol.J.idx], sol.a_tilde[sol.J.idx])
        thr[binding] = req.x[sol.J.idx][binding]
    G, G_err, used = _gauss_factor(spec, sol, thr, **gauss_kw)
    if not G > 0:
        raise NonPositiveArgument("Gaussian factor vanished")

    x_term = float(req.x[sol.I.idx] @ sol.lambda_I) / c
    log_K = (math.log(prm.p) + expo * math.log(prm.qdelta) + (m + beta) * math.log(c)
             + _log_shape_factor(spec, sol) - x_term + math.log(G))
    return TailExpansion(log_K, beta, prm.q * c**prm.delta, prm.delta, sol, G, G_err, used)


def gumbel_tail_general(spec: CorrelationSpec, a, tail_of_F_at_t: float, w_at_t: float,
                        t: float, q_I, q_J, **gauss_kw) -> float:
    """Tail asymptotic for an elliptical vector whose radius is in the Gumbel domain.

    Parameters
    ----------
    spec : CorrelationSpec
    a : k-vector with ``||a_I|| = 1`` for its minimal index set ``I``
    tail_of_F_at_t : ``1 - F(t)`` for the radial distribution ``F``
    w_at_t : scaling function ``w(t)``
    t : threshold scale
    q_I : first-order offsets on ``I`` (length ``m``)
    q_J : offsets on ``J`` (length ``k - m``), ``-inf`` allowed

    Raises
    ------
    NormalizationViolated
        if ``||a_I||`` differs from one by more than ``1e-9``.
    """
    sol = solve(spec, a)
    if abs(sol.norm_a_I - 1.0) > NORM_RTOL:
        raise NormalizationViolated(f"||a_I|| = {sol.norm_a_I!r}, rescale a and t first")
    k, m = spec.dim, sol.m
    q_I = np.asarray(q_I, dtype=float).reshape(-1)
    q_J = np.asarray(q_J, dtype=float).reshape(-1)
    if q_I.size != m or q_J.size != k - m:
        raise DimensionMismatch(f"need |q_I| = {m} and |q_J| = {k - m}")
    G, _, _ = _gauss_factor(spec, sol, q_J, **gauss_kw)
    log_val = (-float(q_I @ sol.lambda_I) + _log_shape_factor(spec, sol) + math.log(G)
               + (1.0 - (k + m) / 2.0) * math.log(t * w_at_t) + math.log(tail_of_F_at_t))
    return math.exp(log_val)


def marginal_params(params: KotzParams, k: int) -> KotzParams:
    """Constants ``(p_1, q, delta, N_1)`` with ``P(X_1 > t) ~ p_1 t^N_1 exp(-q t^delta)``.

    A single coordinate of a ``k``-dimensional Kotz Type III vector is again of
    this type, with

    ``p_1 = p Gamma(k/2) 2^((k-1)/2) / (2 sqrt(pi)) (q delta)^(-(k-1)/2)`` and
    ``N_1 = N - (k-1) delta / 2``.
    """
    if k < 1:
        raise DimensionMismatch("k must be at least 1")
    log_p = (math.log(params.p) + special.gammaln(k / 2) + 0.5 * (k - 1) * math.log(2.0)
             - math.log(2.0) - special.gammaln(0.5) - 0.5 * (k - 1) * math.log(params.qdelta))
    return KotzParams(p=math.exp(log_p), q=params.q, delta=params.delta,
                      N=params.N - 0.5 * (k - 1) * params.delta)


def marginal_tail(params: KotzParams, k: int, t):
    """Asymptotic ``P(X_1 > t)`` for a ``k``-dimensional Kotz Type III vector."""
    t_arr = np.asarray(t, dtype=float)
    if np.any(~(t_arr > 0)):
        raise NonPositiveArgument("t must be positive")
    m = marginal_params(params, k)
    out = np.exp(math.log(m.p) + m.N * np.log(t_arr) - m.q * t_arr**m.delta)
    return float(out) if out.ndim == 0 else out
