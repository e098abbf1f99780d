"""Dense symmetric linear algebra on correlation matrices.

Index sets are 1-based throughout the public API so that reported sets read
the same as ``{1, ..., k}``.  Inverses are applied through triangular solves
against the Cholesky factor; ``sigma_inv`` is kept only for reporting.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy import linalg as sla

from .errors import (
    DimensionMismatch,
    EmptyComplement,
    IndexOutOfRange,
    NotCorrelation,
    NotPositiveDefinite,
    NotSymmetric,
)

SYM_TOL = 1e-12
DIAG_TOL = 1e-12
PIVOT_TOL = 1e-12


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class IndexSet:
    """Strictly increasing subset of ``{1, ..., k}``."""

    members: tuple[int, ...]
    k: int

    def __init__(self, members: Iterable[int], k: int, allow_empty: bool = False):
        m = tuple(int(i) for i in members)
        if k < 1:
            raise IndexOutOfRange(f"ambient dimension must be positive, got {k}")
        if not m and not allow_empty:
            raise IndexOutOfRange("index set must be non-empty")
        if any(i < 1 or i > k for i in m):
            raise IndexOutOfRange(f"indices {m} not within 1..{k}")
        if len(set(m)) != len(m):
            raise IndexOutOfRange(f"duplicate indices in {m}")
        object.__setattr__(self, "members", tuple(sorted(m)))
        object.__setattr__(self, "k", int(k))

    @classmethod
    def full(cls, k: int) -> "IndexSet":
        return cls(range(1, k + 1), k)

    @classmethod
    def from_mask(cls, mask: Sequence[bool], allow_empty: bool = False) -> "IndexSet":
        mask = np.asarray(mask, dtype=bool)
        return cls((np.flatnonzero(mask) + 1).tolist(), mask.size, allow_empty=allow_empty)

    @property
    def idx(self) -> np.ndarray:
        """0-based positions, for array indexing."""
        return np.array(self.members, dtype=np.intp) - 1

    @property
    def mask(self) -> np.ndarray:
        m = np.zeros(self.k, dtype=bool)
        m[self.idx] = True
        return m

    def complement(self) -> "IndexSet":
        rest = [i for i in range(1, self.k + 1) if i not in self.members]
        return IndexSet(rest, self.k, allow_empty=True)

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def __contains__(self, i) -> bool:
        return i in self.members

    def tolist(self) -> list[int]:
        return list(self.members)


@dataclass(frozen=True)
class CorrelationSpec:
    """Positive definite correlation matrix with cached factorization."""

    sigma: np.ndarray
    chol: np.ndarray
    sigma_inv: np.ndarray
    logdet: float

    @property
    def dim(self) -> int:
        return self.sigma.shape[0]

    @property
    def A(self) -> np.ndarray:
        """Square root with ``A.T @ A == sigma`` (upper triangular)."""
        return self.chol.T


def _cholesky_checked(m: np.ndarray) -> np.ndarray:
    try:
        L = np.linalg.cholesky(m)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite("matrix is not positive definite") from exc
    pivots = np.diag(L) ** 2
    scale = float(np.max(np.diag(m)))
    if not np.all(pivots > PIVOT_TOL * scale):
        raise NotPositiveDefinite(
            f"Cholesky pivot {pivots.min():.3e} below {PIVOT_TOL} x max diagonal"
        )
    return L


def factorize(sigma) -> CorrelationSpec:
    """Validate a correlation matrix and cache its Cholesky factor and inverse.

    Raises
    ------
    NotSymmetric, NotCorrelation, NotPositiveDefinite
    """
    s = np.array(sigma, dtype=float)
    if s.ndim != 2 or s.shape[0] != s.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {s.shape}")
    k = s.shape[0]
    if k < 2:
        raise DimensionMismatch("dimension must be at least 2")
    if not np.all(np.isfinite(s)):
        raise NotSymmetric("matrix has non-finite entries")
    if np.max(np.abs(s - s.T)) > SYM_TOL:
        raise NotSymmetric("matrix is not symmetric")
    if np.max(np.abs(np.diag(s) - 1.0)) > DIAG_TOL:
        raise NotCorrelation("diagonal entries must equal 1")
    s = 0.5 * (s + s.T)
    np.fill_diagonal(s, 1.0)
    L = _cholesky_checked(s)
    inv = sla.cho_solve((L, True), np.eye(k))
    inv = 0.5 * (inv + inv.T)
    logdet = 2.0 * float(np.sum(np.log(np.diag(L))))
    return CorrelationSpec(_frozen(s), _frozen(L), _frozen(inv), logdet)


def equicorrelated(k: int, rho: float) -> CorrelationSpec:
    """``(1 - rho) I + rho 1 1^T``; positive definite for ``-1/(k-1) < rho < 1``."""
    return factorize((1.0 - rho) * np.eye(k) + rho * np.ones((k, k)))


def _check_index(spec: CorrelationSpec, I: IndexSet) -> None:
    if I.k != spec.dim:
        raise IndexOutOfRange(f"index set lives in dimension {I.k}, matrix has {spec.dim}")


def submatrix(spec: CorrelationSpec, rows: IndexSet, cols: IndexSet) -> np.ndarray:
    _check_index(spec, rows)
    _check_index(spec, cols)
    return spec.sigma[np.ix_(rows.idx, cols.idx)].copy()


def spd_solve(m: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Solve ``m x = rhs`` for symmetric positive definite ``m``."""
    m = np.atleast_2d(m)
    if m.shape == (1, 1):
        return np.asarray(rhs, dtype=float) / m[0, 0]
    return sla.cho_solve((_cholesky_checked(m), True), rhs)


def quad_form_inv(spec: CorrelationSpec, x) -> float | np.ndarray:
    """``x^T sigma^{-1} x`` via a forward solve against the Cholesky factor.

    ``x`` may be a single k-vector or an ``(n, k)`` array of rows, in which
    case one value per row is returned.
    """
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != spec.dim:
        raise DimensionMismatch(f"vector length {x.shape[-1]} != {spec.dim}")
    z = sla.solve_triangular(spec.chol, x.T, lower=True, check_finite=False)
    out = np.sum(z * z, axis=0)
    return float(out) if x.ndim == 1 else out


def inv_apply(spec: CorrelationSpec, v) -> np.ndarray:
    """``sigma^{-1} v`` through the cached Cholesky factor."""
    return sla.cho_solve((spec.chol, True), np.asarray(v, dtype=float), check_finite=False)


def sub_quad_form_inv(spec: CorrelationSpec, I: IndexSet, x_I) -> float:
    """``x_I^T sigma_II^{-1} x_I``."""
    m = submatrix(spec, I, I)
    x_I = np.asarray(x_I, dtype=float)
    return float(x_I @ spd_solve(m, x_I))


def schur_complement(spec: CorrelationSpec, I: IndexSet) -> np.ndarray:
    """Conditional covariance ``S_JJ - S_JI S_II^{-1} S_IJ`` of the complement J."""
    _check_index(spec, I)
    J = I.complement()
    if len(J) == 0:
        raise EmptyComplement("I covers every coordinate")
    s_ii = submatrix(spec, I, I)
    s_ji = submatrix(spec, J, I)
    out = submatrix(spec, J, J) - s_ji @ spd_solve(s_ii, s_ji.T)
    return 0.5 * (out + out.T)


def projection_vector(spec: CorrelationSpec, I: IndexSet, a_I) -> np.ndarray:
    """``S_JI S_II^{-1} a_I``."""
    _check_index(spec, I)
    J = I.complement()
    if len(J) == 0:
        raise EmptyComplement("I covers every coordinate")
    a_I = np.asarray(a_I, dtype=float)
    if a_I.shape != (len(I),):
        raise DimensionMismatch(f"a_I has shape {a_I.shape}, expected ({len(I)},)")
    return submatrix(spec, J, I) @ spd_solve(submatrix(spec, I, I), a_I)
