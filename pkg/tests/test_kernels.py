import os

import numpy as np
import pytest

from kotztail import _kernels_py, kernels

ck = pytest.importorskip("kotztail._ckernels")


@pytest.fixture
def rng():
    return np.random.default_rng(2024)


def test_backend_selected():
    if os.environ.get("KOTZTAIL_PURE_PYTHON"):
        assert kernels.BACKEND == "python"
        return
    try:
        from kotztail import _ckernels  # noqa: F401
    except ImportError:
        assert kernels.BACKEND == "python"
    else:
        assert kernels.BACKEND == "cython"


def test_sov_integrand_agrees(rng):
    s = np.array([[1, .4, .2, .1], [.4, 1, .3, .2], [.2, .3, 1, .5], [.1, .2, .5, 1.0]])
    L = np.linalg.cholesky(s)
    upper = np.array([-0.5, 1.2, 0.1, -2.0])
    w = rng.random((4000, 3))
    w[:5] = 0.0  # exercise the clipping
    w[5:10] = 1.0
    np.testing.assert_allclose(ck.sov_integrand(L, upper, w), _kernels_py.sov_integrand(L, upper, w),
                               rtol=1e-13, atol=1e-300)


def test_count_and_mask_agree(rng):
    x = rng.standard_normal((50_001, 3))
    thr = np.array([0.2, -0.1, 0.4])
    assert ck.count_exceed(x, thr) == _kernels_py.count_exceed(x, thr)
    np.testing.assert_array_equal(np.asarray(ck.exceed_mask(x, thr)), _kernels_py.exceed_mask(x, thr))


def test_nan_never_exceeds():
    x = np.array([[np.nan, 1.0], [2.0, 2.0]])
    thr = np.zeros(2)
    assert ck.count_exceed(x, thr) == _kernels_py.count_exceed(x, thr) == 1


@pytest.mark.parametrize("block", [1, 7, 1000])
def test_block_max_agrees(rng, block):
    x = rng.standard_normal((10_003, 2))
    np.testing.assert_array_equal(ck.block_max(x, block), _kernels_py.block_max(x, block))


def test_dispatch_accepts_non_contiguous(rng):
    x = np.asfortranarray(rng.standard_normal((100, 2)))
    assert kernels.count_exceed(x, [0, 0]) == _kernels_py.count_exceed(x, [0, 0])
    assert kernels.exceed_mask(x, [0, 0]).dtype == bool
