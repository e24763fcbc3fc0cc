"""Pure numpy backend for the Philox-4x64-10 block fill.

Same contract as the compiled kernel in ``_philox_cy``: given a key pair and
the three fixed counter words, produce the 4*n output words for n consecutive
blocks starting at ``start``. 64x64->128 bit multiplies are emulated with
32-bit limbs.
"""

import numpy as np

M0 = 0xD2E7470EE14C6C93
M1 = 0xCA5A826395121157
W0 = 0x9E3779B97F4A7C15
W1 = 0xBB67AE8584CAA73B
_MASK64 = (1 << 64) - 1
_LO32 = np.uint64(0xFFFFFFFF)
_SH32 = np.uint64(32)


def _mulhilo(a, m):
    """Return (high, low) 64-bit words of a * m for a uint64 array a."""
    mh = np.uint64(m >> 32)
    ml = np.uint64(m & 0xFFFFFFFF)
    ah = a >> _SH32
    al = a & _LO32
    t1 = ah * ml
    t2 = al * mh
    t3 = al * ml
    mid = (t3 >> _SH32) + (t1 & _LO32) + (t2 & _LO32)
    hi = ah * mh + (t1 >> _SH32) + (t2 >> _SH32) + (mid >> _SH32)
    lo = a * np.uint64(m)
    return hi, lo


def philox_fill(k0, k1, c1, c2, c3, start, n):
    """Fill 4*n uint64 words from blocks start..start+n-1."""
    x0 = (np.uint64(start) + np.arange(n, dtype=np.uint64)).astype(np.uint64)
    x1 = np.full(n, c1, dtype=np.uint64)
    x2 = np.full(n, c2, dtype=np.uint64)
    x3 = np.full(n, c3, dtype=np.uint64)
    kk0, kk1 = k0, k1
    for _ in range(10):
        hi0, lo0 = _mulhilo(x0, M0)
        hi1, lo1 = _mulhilo(x2, M1)
        x0 = hi1 ^ x1 ^ np.uint64(kk0)
        x1 = lo1
        x2 = hi0 ^ x3 ^ np.uint64(kk1)
        x3 = lo0
        kk0 = (kk0 + W0) & _MASK64
        kk1 = (kk1 + W1) & _MASK64
    out = np.empty(4 * n, dtype=np.uint64)
    out[0::4] = x0
    out[1::4] = x1
    out[2::4] = x2
    out[3::4] = x3
    return out
