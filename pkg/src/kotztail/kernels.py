"""Kernel dispatch.

Uses the compiled ``_ckernels`` extension when it imports, otherwise the numpy
implementations.  Set ``KOTZTAIL_PURE_PYTHON=1`` to force the fallback.
"""
import os

import numpy as np

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py

if not os.environ.get("KOTZTAIL_PURE_PYTHON"):
    try:
        from . import _ckernels as _impl  # noqa: F811

        BACKEND = "cython"
    except ImportError:  # extension not built
        _impl = _kernels_py


def _c(a):
    return np.ascontiguousarray(a, dtype=np.float64)


def sov_integrand(chol, upper, w):
    return _impl.sov_integrand(_c(chol), _c(upper), _c(w))


def count_exceed(x, thr):
    return _impl.count_exceed(_c(x), _c(thr))


def exceed_mask(x, thr):
    return np.asarray(_impl.exceed_mask(_c(x), _c(thr)), dtype=bool)


def block_max(x, block: int):
    return _impl.block_max(_c(x), int(block))
