# cython: language_level=3
"""Compiled versions of the kernels in ``_kernels_py``."""
import numpy as np

from libc.math cimport INFINITY
from scipy.special.cython_special cimport ndtr, ndtri

cdef double W_EPS = 1e-300
cdef double W_MAX = 1.0 - 1e-16


def sov_integrand(const double[:, ::1] chol, const double[::1] upper, const double[:, ::1] w):
    # dimension-major loop: the points are independent, so the inner loop has no
    # serial dependency through y and pipelines like the vectorised version
    cdef Py_ssize_t d = chol.shape[0]
    cdef Py_ssize_t n = w.shape[0]
    cdef Py_ssize_t p, i, j
    cdef double s, e, u, inv
    out = np.ones(n, dtype=np.float64)
    cdef double[::1] o = out
    y_arr = np.zeros((n, d), dtype=np.float64)
    cdef double[:, ::1] y = y_arr
    with nogil:
        for i in range(d):
            inv = 1.0 / chol[i, i]
            for p in range(n):
                s = 0.0
                for j in range(i):
                    s = s + chol[i, j] * y[p, j]
                e = ndtr((upper[i] - s) * inv)
                o[p] *= e
                if i < d - 1:
                    u = w[p, i] * e
                    if u < W_EPS:
                        u = W_EPS
                    elif u > W_MAX:
                        u = W_MAX
                    y[p, i] = ndtri(u)
    return out


def count_exceed(const double[:, ::1] x, const double[::1] thr):
    cdef Py_ssize_t n = x.shape[0]
    cdef Py_ssize_t k = x.shape[1]
    cdef Py_ssize_t i, j
    cdef long long c = 0
    cdef bint ok
    with nogil:
        for i in range(n):
            ok = True
            for j in range(k):
                if not x[i, j] > thr[j]:
                    ok = False
                    break
            if ok:
                c += 1
    return int(c)


def exceed_mask(const double[:, ::1] x, const double[::1] thr):
    cdef Py_ssize_t n = x.shape[0]
    cdef Py_ssize_t k = x.shape[1]
    cdef Py_ssize_t i, j
    out = np.zeros(n, dtype=np.uint8)
    cdef unsigned char[::1] o = out
    with nogil:
        for i in range(n):
            o[i] = 1
            for j in range(k):
                if not x[i, j] > thr[j]:
                    o[i] = 0
                    break
    return out.view(bool)


def block_max(const double[:, ::1] x, Py_ssize_t block):
    cdef Py_ssize_t k = x.shape[1]
    cdef Py_ssize_t m = x.shape[0] // block
    cdef Py_ssize_t b, i, j, r
    out = np.empty((m, k), dtype=np.float64)
    cdef double[:, ::1] o = out
    cdef double v
    with nogil:
        for b in range(m):
            for j in range(k):
                o[b, j] = -INFINITY
            for i in range(block):
                r = b * block + i
                for j in range(k):
                    v = x[r, j]
                    if v > o[b, j]:
                        o[b, j] = v
    return out
