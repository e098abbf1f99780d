"""Minimal index set of ``min x^T S^{-1} x  subject to  x >= a``.

The optimum is pinned to ``a`` on a unique index set ``I``; on the complement
``J`` it equals the conditional-mean projection ``S_JI S_II^{-1} a_I``.  The
set is characterized by the optimality conditions ``S_II^{-1} a_I > 0`` and
``S_JI S_II^{-1} a_I >= a_J``.  Entries of ``a_I`` need not be positive: with
negative correlation a negative ``a_i`` can be active.  The
solver works on the dual problem

    min_{mu >= 0}  1/2 mu^T S mu - a^T mu,      x = S mu,

whose support is exactly ``I``.  That dual is a non-negative least squares
problem, handed to scipy's active-set NNLS routine.  The support it returns is
checked against the optimality conditions; if the check fails (near-degenerate
input) the index set is found by enumeration for ``k <= 12``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg as sla
from scipy import optimize

from .errors import DimensionMismatch, NoPositiveComponent, OracleAmbiguous
from .linalg import (
    CorrelationSpec,
    IndexSet,
    inv_apply,
    projection_vector,
    spd_solve,
    submatrix,
)

BINDING_RTOL = 1e-9
KKT_RTOL = 1e-9
BRUTE_FORCE_MAX_K = 12


@dataclass(frozen=True)
class QpSolution:
    I: IndexSet
    J: IndexSet
    a_tilde: np.ndarray
    value: float
    lambda_I: np.ndarray
    binding_J: IndexSet = field(default=None)

    @property
    def m(self) -> int:
        return len(self.I)

    @property
    def norm_a_I(self) -> float:
        """``||a_I||``, the square root of ``value``."""
        return float(np.sqrt(self.value))

    def to_dict(self) -> dict:
        return {
            "I": self.I.tolist(),
            "J": self.J.tolist(),
            "a_tilde": self.a_tilde.tolist(),
            "value": self.value,
            "lambda_I": self.lambda_I.tolist(),
            "binding_J": self.binding_J.tolist() if self.binding_J is not None else [],
        }


def _check_a(spec: CorrelationSpec, a) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if a.shape != (spec.dim,):
        raise DimensionMismatch(f"a has shape {a.shape}, expected ({spec.dim},)")
    if not np.all(np.isfinite(a)):
        raise DimensionMismatch("a must be finite")
    if not np.any(a > 0):
        raise NoPositiveComponent("a must have at least one strictly positive component")
    return a


def binding_mask(a_J: np.ndarray, proj_J: np.ndarray) -> np.ndarray:
    """Coordinates of J where the projection meets ``a_J`` (within tolerance)."""
    return proj_J - a_J <= BINDING_RTOL * np.maximum(1.0, np.abs(a_J))


def _assemble(spec: CorrelationSpec, a: np.ndarray, I: IndexSet) -> QpSolution:
    a_I = a[I.idx]
    lam = spd_solve(submatrix(spec, I, I), a_I)
    a_tilde = a.copy()
    J = I.complement()
    if len(J):
        proj = projection_vector(spec, I, a_I)
        a_tilde[J.idx] = proj
        binding = IndexSet(np.asarray(J.members)[binding_mask(a[J.idx], proj)], spec.dim,
                           allow_empty=True)
    else:
        binding = IndexSet([], spec.dim, allow_empty=True)
    value = float(a_I @ lam)
    return QpSolution(I, J, a_tilde, value, lam, binding)


def _admissible(spec: CorrelationSpec, a: np.ndarray, I: IndexSet) -> bool:
    a_I = a[I.idx]
    if np.any(spd_solve(submatrix(spec, I, I), a_I) <= 0):
        return False
    J = I.complement()
    if len(J) == 0:
        return True
    proj = projection_vector(spec, I, a_I)
    a_J = a[J.idx]
    return bool(np.all(proj - a_J >= -BINDING_RTOL * np.maximum(1.0, np.abs(a_J))))


def _dual_support(spec: CorrelationSpec, a: np.ndarray) -> np.ndarray:
    """Support of ``argmin_{mu >= 0} 1/2 mu^T S mu - a^T mu``.

    With ``S = L L^T`` the objective is ``1/2 ||L^T mu - L^{-1} a||^2`` up to a
    constant, a non-negative least squares problem.
    """
    L = spec.chol
    mu, _ = optimize.nnls(L.T, sla.solve_triangular(L, a, lower=True), maxiter=50 * spec.dim)
    return mu > 0


def solve(spec: CorrelationSpec, a) -> QpSolution:
    """Unique solution of the quadratic program and its minimal index set.

    Raises
    ------
    NoPositiveComponent
        if ``a <= 0`` componentwise (including ``a == 0``).
    """
    a = _check_a(spec, a)
    k = spec.dim
    full = IndexSet.full(k)
    if np.all(a > 0) and np.all(inv_apply(spec, a) > 0):
        return _assemble(spec, a, full)
    try:
        support = _dual_support(spec, a)
    except RuntimeError:  # iteration limit
        support = None
    if support is not None and support.any():
        I = IndexSet.from_mask(support)
        if _admissible(spec, a, I):
            return _assemble(spec, a, I)
    if k <= BRUTE_FORCE_MAX_K:
        return brute_force_solve(spec, a)
    raise OracleAmbiguous("active-set iteration failed to reach an admissible index set")


def brute_force_solve(spec: CorrelationSpec, a) -> QpSolution:
    """Enumerate every non-empty index set and keep the admissible one.

    Test oracle; exponential in k.
    """
    a = _check_a(spec, a)
    k = spec.dim
    if k > BRUTE_FORCE_MAX_K:
        raise DimensionMismatch(f"brute force limited to k <= {BRUTE_FORCE_MAX_K}")
    found = []
    for size in range(1, k + 1):
        for combo in itertools.combinations(range(1, k + 1), size):
            I = IndexSet(combo, k)
            if _admissible(spec, a, I):
                found.append(I)
    if len(found) != 1:
        raise OracleAmbiguous(f"{len(found)} admissible index sets: {[s.tolist() for s in found]}")
    return _assemble(spec, a, found[0])


@dataclass
class KktCheck:
    ok: bool
    problems: list[str]

    def __bool__(self) -> bool:
        return self.ok


def _close(x, y, rtol=KKT_RTOL) -> bool:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return bool(np.all(np.abs(x - y) <= rtol * np.maximum(1.0, np.maximum(np.abs(x), np.abs(y)))))


def verify_kkt(spec: CorrelationSpec, a, sol: QpSolution, n_probe: int = 16, seed: int = 0) -> KktCheck:
    """Check the optimality conditions of ``sol`` for the program ``(spec, a)``.

    Returns a falsy :class:`KktCheck` with one message per violated condition.
    """
    a = np.asarray(a, dtype=float)
    problems: list[str] = []
    I, J = sol.I, sol.J
    if sorted(I.members + J.members) != list(range(1, spec.dim + 1)):
        return KktCheck(False, ["I and J do not partition 1..k"])
    a_I = a[I.idx]
    if not _close(sol.a_tilde[I.idx], a_I):
        problems.append("a_tilde differs from a on I")
    lam = spd_solve(submatrix(spec, I, I), a_I)
    if np.any(lam <= 0):
        problems.append("lambda_I not positive")
    if not _close(sol.lambda_I, lam):
        problems.append("stored lambda_I inconsistent")
    if len(J):
        proj = projection_vector(spec, I, a_I)
        if not _close(sol.a_tilde[J.idx], proj):
            problems.append("a_tilde on J is not the projection")
        a_J = a[J.idx]
        if np.any(proj - a_J < -BINDING_RTOL * np.maximum(1.0, np.abs(a_J))):
            problems.append("constraint a_tilde_J >= a_J violated")
    if not _close(sol.value, a_I @ lam):
        problems.append("value differs from a_I^T S_II^{-1} a_I")
    elif not sol.value > 0:
        problems.append("value not positive")
    rng = np.random.default_rng(seed)
    for x in rng.standard_normal((n_probe, spec.dim)):
        lhs = x @ inv_apply(spec, sol.a_tilde)
        rhs = x[I.idx] @ lam
        if abs(lhs - rhs) > KKT_RTOL * max(1.0, abs(lhs), abs(rhs)):
            problems.append("x^T S^{-1} a_tilde != x_I^T S_II^{-1} a_I")
            break
    return KktCheck(not problems, problems)
