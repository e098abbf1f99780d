"""Kotz Type III elliptical vectors ``X = A^T R U``.

The radius has tail ``P(R > u) ~ p u^N exp(-q u^delta)``.  For simulation the
library uses the canonical radial law with density proportional to
``r^(N+delta-1) exp(-q r^delta)``, for which ``R^delta`` is Gamma distributed
with shape ``(N+delta)/delta`` and rate ``q``.  That law realizes the tail
exactly with ``p = q^(N/delta) / Gamma((N+delta)/delta)``.

Random numbers come from Philox streams keyed by ``(seed, stream)`` so that
chunks and parallel batches reproduce regardless of scheduling.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize, special

from .errors import InconsistentP, InvalidShape, NonPositiveArgument
from .linalg import CorrelationSpec

P_RTOL = 1e-9
CHUNK = 1 << 20


@dataclass(frozen=True)
class KotzParams:
    p: float
    q: float
    delta: float
    N: float

    def __post_init__(self):
        for name in ("p", "q", "delta"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v > 0):
                raise NonPositiveArgument(f"{name} must be positive and finite, got {v}")
        if not np.isfinite(self.N):
            raise NonPositiveArgument(f"N must be finite, got {self.N}")

    @property
    def qdelta(self) -> float:
        return self.q * self.delta

    def to_dict(self) -> dict:
        return {"p": self.p, "q": self.q, "delta": self.delta, "N": self.N}


@dataclass(frozen=True)
class KotzModel:
    params: KotzParams
    spec: CorrelationSpec

    @property
    def dim(self) -> int:
        return self.spec.dim


def gaussian_params(k: int) -> KotzParams:
    """Parameters under which ``X`` is standard Gaussian in dimension ``k``."""
    if k < 2:
        raise InvalidShape("k must be at least 2")
    p = math.exp(-(k / 2 - 1) * math.log(2.0) - special.gammaln(k / 2))
    return KotzParams(p=p, q=0.5, delta=2.0, N=float(k - 2))


def scaling_w(params: KotzParams, u):
    """Scaling function ``w(u) = q delta u^(delta-1)``."""
    u_arr = np.asarray(u, dtype=float)
    if np.any(~(u_arr > 0)):
        raise NonPositiveArgument("w(u) needs u > 0")
    out = params.qdelta * u_arr ** (params.delta - 1.0)
    return float(out) if out.ndim == 0 else out


def induced_p(q: float, delta: float, N: float) -> float:
    """Tail constant realized by the canonical radial law."""
    if not N + delta > 0:
        raise InvalidShape(f"N + delta must be positive, got {N + delta}")
    return math.exp(N / delta * math.log(q) - special.gammaln((N + delta) / delta))


@dataclass(frozen=True)
class RadialLaw:
    """Canonical radius: ``R = S^(1/delta)`` with ``S ~ Gamma(shape, rate=q)``."""

    q: float
    delta: float
    N: float

    @property
    def shape(self) -> float:
        return (self.N + self.delta) / self.delta

    @property
    def p(self) -> float:
        return induced_p(self.q, self.delta, self.N)

    def sf(self, u):
        """``P(R > u)`` (exact)."""
        u = np.maximum(np.asarray(u, dtype=float), 0.0)
        return special.gammaincc(self.shape, self.q * u**self.delta)

    def isf(self, prob):
        s = special.gammainccinv(self.shape, np.asarray(prob, dtype=float)) / self.q
        return s ** (1.0 / self.delta)

    def tail_asymptote(self, u):
        """``p u^N exp(-q u^delta)``."""
        u = np.asarray(u, dtype=float)
        return self.p * u**self.N * np.exp(-self.q * u**self.delta)


def canonical_radial(params: KotzParams) -> RadialLaw:
    if not params.N + params.delta > 0:
        raise InvalidShape(f"N + delta must be positive, got {params.N + params.delta}")
    law = RadialLaw(params.q, params.delta, params.N)
    if abs(params.p - law.p) > P_RTOL * law.p:
        raise InconsistentP(
            f"p={params.p!r} differs from the value {law.p!r} realized by the "
            "canonical radius; pass induced_p(q, delta, N)"
        )
    return law


def canonical_params(q: float, delta: float, N: float) -> KotzParams:
    """Parameters with ``p`` set to the canonical induced value."""
    return KotzParams(induced_p(q, delta, N), q, delta, N)


def make_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """Philox generator for the ``(seed, stream)`` pair."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), int(stream)])))


def sample_radius(law: RadialLaw, n: int, seed: int = 0, stream: int = 0) -> np.ndarray:
    rng = make_rng(seed, stream)
    s = rng.gamma(law.shape, 1.0 / law.q, size=int(n))
    return s ** (1.0 / law.delta)


def sample_sphere(k: int, n: int, seed: int = 0, stream: int = 0) -> np.ndarray:
    """``n`` uniform directions on the unit sphere of R^k, as rows."""
    if k < 2:
        raise InvalidShape("k must be at least 2")
    g = make_rng(seed, stream).standard_normal((int(n), k))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def _sample_chunk(model: KotzModel, law: RadialLaw, n: int, rng, return_radius: bool):
    k = model.dim
    s = rng.gamma(law.shape, 1.0 / law.q, size=n)
    r = s ** (1.0 / law.delta)
    g = rng.standard_normal((n, k))
    u = g / np.linalg.norm(g, axis=1, keepdims=True)
    x = (r[:, None] * u) @ model.spec.chol.T
    return (x, r) if return_radius else x


def iter_kotz(model: KotzModel, n: int, seed: int = 0, chunk: int = CHUNK,
              return_radius: bool = False):
    """Yield consecutive sample blocks; block ``i`` uses stream ``i``.

    The concatenation of the blocks is what :func:`sample_kotz` returns, so a
    consumer can stream through ``n`` vectors with bounded memory.
    """
    law = canonical_radial(model.params)
    n = int(n)
    for i, start in enumerate(range(0, n, chunk)):
        m = min(chunk, n - start)
        yield _sample_chunk(model, law, m, make_rng(seed, i), return_radius)


def chunk_sample(model: KotzModel, m: int, seed: int, stream: int, return_radius: bool = False):
    """One block of ``m`` vectors drawn from stream ``stream``."""
    law = canonical_radial(model.params)
    return _sample_chunk(model, law, int(m), make_rng(seed, stream), return_radius)


def sample_kotz(model: KotzModel, n: int, seed: int = 0, return_radius: bool = False,
                chunk: int = CHUNK):
    """Draw ``n`` vectors ``X = L (R U)`` (rows), ``L`` the lower Cholesky factor.

    Parameters
    ----------
    model : KotzModel
        Its ``params.p`` must equal the canonical induced value.
    n : int
    seed : int
    return_radius : bool
        Also return the radii, for which ``X^T S^{-1} X = R^2`` row by row.
    """
    blocks = list(iter_kotz(model, n, seed, chunk, return_radius))
    if return_radius:
        if not blocks:
            return np.empty((0, model.dim)), np.empty(0)
        return np.vstack([b[0] for b in blocks]), np.concatenate([b[1] for b in blocks])
    return np.vstack(blocks) if blocks else np.empty((0, model.dim))


def marginal_sf(params: KotzParams, k: int, t: float) -> float:
    """Exact ``P(X_1 > t)`` under the canonical radius in dimension ``k``.

    Uses ``X_1 = R U_1`` and the density of ``U_1 = cos(theta)``.
    """
    law = canonical_radial(params)
    t = float(t)
    if t == 0.0:
        return 0.5
    if t < 0:
        return 1.0 - marginal_sf(params, k, -t)
    c_k = math.exp(special.gammaln(k / 2) - 0.5 * math.log(math.pi) - special.gammaln((k - 1) / 2))

    def f(th):
        cos = math.cos(th)
        if cos <= 0:
            return 0.0
        return math.sin(th) ** (k - 2) * float(law.sf(t / cos))

    val, _ = integrate.quad(f, 0.0, math.pi / 2, epsabs=0.0, epsrel=1e-12, limit=200)
    return c_k * val


def marginal_isf(params: KotzParams, k: int, prob: float) -> float:
    """Inverse of :func:`marginal_sf` for ``prob`` in (0, 1/2]."""
    if not 0 < prob <= 0.5:
        raise NonPositiveArgument("prob must lie in (0, 1/2]")
    if prob == 0.5:
        return 0.0
    law = canonical_radial(params)
    hi = float(law.isf(prob))
    return optimize.brentq(lambda t: marginal_sf(params, k, t) - prob, 0.0, hi,
                           xtol=1e-14, rtol=1e-14)
