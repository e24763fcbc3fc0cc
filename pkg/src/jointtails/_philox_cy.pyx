# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled Philox-4x64-10 block fill. Contract mirrors _philox_np.philox_fill."""

import numpy as np

from libc.stdint cimport uint64_t

cdef extern from *:
    ctypedef unsigned long long uint128_t "unsigned __int128"

cdef uint64_t M0 = 0xD2E7470EE14C6C93ULL
cdef uint64_t M1 = 0xCA5A826395121157ULL
cdef uint64_t W0 = 0x9E3779B97F4A7C15ULL
cdef uint64_t W1 = 0xBB67AE8584CAA73BULL


cdef inline uint64_t _mulhi(uint64_t a, uint64_t b) nogil:
    return <uint64_t> ((<uint128_t> a * <uint128_t> b) >> 64)


def philox_fill(uint64_t k0, uint64_t k1, uint64_t c1, uint64_t c2,
                uint64_t c3, uint64_t start, Py_ssize_t n):
    """Fill 4*n uint64 words from blocks start..start+n-1."""
    out = np.empty(4 * n, dtype=np.uint64)
    cdef uint64_t[::1] buf = out
    cdef Py_ssize_t i
    cdef int r
    cdef uint64_t x0, x1, x2, x3, kk0, kk1, hi0, lo0, hi1, lo1
    with nogil:
        for i in range(n):
            x0 = start + <uint64_t> i
            x1 = c1
            x2 = c2
            x3 = c3
            kk0 = k0
            kk1 = k1
            for r in range(10):
                hi0 = _mulhi(x0, M0)
                lo0 = x0 * M0
                hi1 = _mulhi(x2, M1)
                lo1 = x2 * M1
                x0 = hi1 ^ x1 ^ kk0
                x1 = lo1
                x2 = hi0 ^ x3 ^ kk1
                x3 = lo0
                kk0 = kk0 + W0
                kk1 = kk1 + W1
            buf[4 * i] = x0
            buf[4 * i + 1] = x1
            buf[4 * i + 2] = x2
            buf[4 * i + 3] = x3
    return out
