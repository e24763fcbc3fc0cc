"""Counter-based random streams with hierarchical keys.

Every stream is a keyed permutation of a 128-bit counter (Philox-4x64-10).
A :class:`StreamKey` names a stream by a 64-bit seed plus a short path of
32-bit indices, e.g. ``(experiment, cell, chunk)``. Key material and the
fixed counter words are derived from (seed, path) so that distinct keys index
disjoint, statistically independent streams, and a stream's output depends
only on its key, never on draw history elsewhere. This is what makes chunked
parallel estimation bit-reproducible for any worker count.

The block permutation itself is pinned by test vectors shipped in-repo; the
compiled kernel and the numpy fallback must both reproduce them bit for bit.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtri

from .errors import ModelValidationError

_FORCED = os.environ.get("JOINTTAILS_FORCE_BACKEND", "").strip().lower()
if _FORCED == "numpy":
    from . import _philox_np as _backend

    BACKEND = "numpy"
elif _FORCED == "cython":
    from . import _philox_cy as _backend  # type: ignore[no-redef]

    BACKEND = "cython"
else:
    try:
        from . import _philox_cy as _backend  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:  # pragma: no cover - depends on build environment
        from . import _philox_np as _backend  # type: ignore[no-redef]

        BACKEND = "numpy"

_MASK64 = (1 << 64) - 1
_MASK32 = (1 << 32) - 1

#: multiplier/Weyl constants of the block permutation (shared with backends)
M0 = 0xD2E7470EE14C6C93
M1 = 0xCA5A826395121157
W0 = 0x9E3779B97F4A7C15
W1 = 0xBB67AE8584CAA73B

#: maximum key path depth (experiment, cell, chunk + two spare levels)
MAX_PATH = 5


def splitmix64(x: int) -> int:
    """One step of the splitmix64 scrambler; used only for key derivation."""
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def philox_block(counter, key):
    """Scalar reference permutation: one 256-bit block from (counter, key).

    Pure-python and deliberately independent of both production backends;
    the frozen test vectors were generated with this function after it was
    checked bit for bit against an external implementation of the same
    algorithm.
    """
    c0, c1, c2, c3 = (c & _MASK64 for c in counter)
    k0, k1 = (k & _MASK64 for k in key)
    for _ in range(10):
        p0 = (M0 * c0) & ((1 << 128) - 1)
        p1 = (M1 * c2) & ((1 << 128) - 1)
        hi0, lo0 = p0 >> 64, p0 & _MASK64
        hi1, lo1 = p1 >> 64, p1 & _MASK64
        c0, c1, c2, c3 = hi1 ^ c1 ^ k0, lo1, hi0 ^ c3 ^ k1, lo0
        k0 = (k0 + W0) & _MASK64
        k1 = (k1 + W1) & _MASK64
    return (c0, c1, c2, c3)


@dataclass(frozen=True)
class StreamKey:
    """Name of one random stream: a 64-bit seed and a path of 32-bit indices."""

    seed: int
    path: tuple = field(default_factory=tuple)

    def __post_init__(self):
        if not isinstance(self.seed, int) or not 0 <= self.seed <= _MASK64:
            raise ModelValidationError("seed must be an integer in [0, 2^64)")
        path = tuple(int(p) for p in self.path)
        if len(path) > MAX_PATH:
            raise ModelValidationError(
                "key path too deep: %d > %d" % (len(path), MAX_PATH)
            )
        for p in path:
            if not 0 <= p <= _MASK32:
                raise ModelValidationError("path entries must be in [0, 2^32)")
        object.__setattr__(self, "path", path)

    def child(self, *indices: int) -> "StreamKey":
        """Sub-stream key: same seed, path extended by the given indices."""
        return StreamKey(self.seed, self.path + tuple(int(i) for i in indices))

    def derive(self):
        """(k0, k1, c1, c2, c3): key words and fixed counter words.

        The path length is tagged into the top byte of c1, so keys whose
        paths are prefixes of one another still index disjoint counters.
        """
        k0 = splitmix64(self.seed ^ 0x9E3779B97F4A7C15)
        k1 = splitmix64(k0 ^ 0xD1B54A32D192ED03)
        p = self.path + (0,) * (MAX_PATH - len(self.path))
        c1 = p[0] | (len(self.path) << 56)
        c2 = p[1] | (p[3] << 32)
        c3 = p[2] | (p[4] << 32)
        return k0, k1, c1, c2, c3


class RandomStream:
    """Sequential view of the stream named by a :class:`StreamKey`.

    Produces uniforms in the open interval (0,1) via
    ``((word >> 11) + 0.5) * 2**-53`` and standard normals through the
    inverse normal CDF. Consumption order is part of every caller's
    determinism contract.
    """

    __slots__ = ("key", "_k0", "_k1", "_c1", "_c2", "_c3", "_block", "_buf")

    def __init__(self, key: StreamKey):
        self.key = key
        self._k0, self._k1, self._c1, self._c2, self._c3 = key.derive()
        self._block = 0
        self._buf = np.empty(0, dtype=np.uint64)

    def words(self, n: int) -> np.ndarray:
        """Next n raw 64-bit words."""
        if n < 0:
            raise ValueError("n must be nonnegative")
        take = min(n, self._buf.size)
        parts = [self._buf[:take]]
        self._buf = self._buf[take:]
        need = n - take
        if need > 0:
            blocks = -(-need // 4)
            fresh = _backend.philox_fill(
                self._k0, self._k1, self._c1, self._c2, self._c3,
                self._block, blocks,
            )
            self._block += blocks
            parts.append(fresh[:need])
            self._buf = fresh[need:]
        return parts[0] if len(parts) == 1 else np.concatenate(parts)

    def uniforms(self, n: int) -> np.ndarray:
        """Next n doubles, uniform on the open interval (0,1)."""
        w = self.words(n)
        return ((w >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53

    def normals(self, n: int) -> np.ndarray:
        """Next n standard normal deviates (inverse-CDF of uniforms)."""
        return ndtri(self.uniforms(n))


def stream_for(key: StreamKey) -> RandomStream:
    return RandomStream(key)
