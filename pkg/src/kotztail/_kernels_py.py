"""Pure numpy versions of the hot kernels.

These define the reference semantics; ``_ckernels.pyx`` must agree with them
to rounding.
"""
import numpy as np
from scipy import special

# keeps ndtri finite when a QMC coordinate lands on 0 or 1
W_EPS = 1e-300


def sov_integrand(chol, upper, w):
    """Separation-of-variables integrand for ``P(Y < upper)``, ``Y ~ N(0, L L^T)``.

    Parameters
    ----------
    chol : (d, d) lower-triangular Cholesky factor
    upper : (d,) finite upper limits
    w : (n, d - 1) points of the unit cube

    Returns
    -------
    (n,) integrand values; their mean estimates the probability.
    """
    chol = np.asarray(chol, dtype=float)
    upper = np.asarray(upper, dtype=float)
    w = np.asarray(w, dtype=float)
    d = chol.shape[0]
    n = w.shape[0]
    y = np.zeros((n, d))
    val = np.ones(n)
    for i in range(d):
        s = y[:, :i] @ chol[i, :i] if i else 0.0
        e = special.ndtr((upper[i] - s) / chol[i, i])
        val *= e
        if i < d - 1:
            y[:, i] = special.ndtri(np.clip(w[:, i] * e, W_EPS, 1.0 - 1e-16))
    return val


def count_exceed(x, thr):
    """Number of rows of ``x`` strictly above ``thr`` in every column."""
    return int(np.count_nonzero(np.all(np.asarray(x) > np.asarray(thr), axis=1)))


def exceed_mask(x, thr):
    return np.all(np.asarray(x) > np.asarray(thr), axis=1)


def block_max(x, block):
    """Columnwise maxima over consecutive blocks of ``block`` rows."""
    x = np.asarray(x, dtype=float)
    m = x.shape[0] // block
    return x[: m * block].reshape(m, block, x.shape[1]).max(axis=1)
