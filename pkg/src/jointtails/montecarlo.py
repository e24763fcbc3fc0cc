"""Deterministic chunked Monte Carlo driver.

Work is split into fixed-size chunks of 2**16 samples. Chunk i draws from the
sub-stream ``key.child(i)``, so the estimate is a pure function of (task, n,
key): results are bit-identical for any worker count, and adding workers only
changes wall time. Chunk partial sums are merged in chunk order with a fixed
reduction, never in completion order.

A task is any callable ``task(stream, count) -> (sums, sumsqs)`` returning the
per-chunk sums and sums of squares of one or more statistics evaluated on
``count`` fresh samples drawn from ``stream``.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .rng import RandomStream, StreamKey

#: fixed chunk length; part of the reproducibility contract, do not change
CHUNK = 1 << 16


@dataclass(frozen=True)
class MCEstimate:
    """Monte Carlo mean with its standard error.

    ``unresolved`` is set when no sample contributed a nonzero value (for
    indicator statistics: zero hits). Such estimates must be reported as
    unresolved, never as an exact zero.
    """

    mean: float
    se: float
    n: int
    unresolved: bool = False

    @property
    def ci95(self):
        half = 1.96 * self.se
        return (self.mean - half, self.mean + half)

    def scaled(self, factor: float) -> "MCEstimate":
        """Estimate of ``factor * statistic`` (exact constant, no extra se)."""
        return MCEstimate(self.mean * factor, self.se * abs(factor), self.n,
                          self.unresolved)


def _finalize(sums: np.ndarray, sumsqs: np.ndarray, n: int):
    out = []
    for s, sq in zip(sums, sumsqs):
        mean = s / n
        if n > 1:
            var = max(sq / n - mean * mean, 0.0) * n / (n - 1)
        else:
            var = 0.0
        out.append(MCEstimate(mean, float(np.sqrt(var / n)), n, sq == 0.0))
    return out


def run_parallel(task, n: int, key: StreamKey, workers: int = 1):
    """Estimate the task's statistics from n samples.

    Returns one :class:`MCEstimate` per statistic. Any worker exception
    propagates and fails the whole job.
    """
    if n <= 0:
        raise ValueError("n must be positive")
    if workers < 1:
        raise ValueError("workers must be >= 1")
    n = int(n)
    n_chunks = -(-n // CHUNK)
    counts = [CHUNK] * (n_chunks - 1) + [n - CHUNK * (n_chunks - 1)]

    def one_chunk(i: int):
        stream = RandomStream(key.child(i))
        sums, sumsqs = task(stream, counts[i])
        return np.asarray(sums, dtype=np.float64), np.asarray(sumsqs, dtype=np.float64)

    if workers == 1:
        results = [one_chunk(i) for i in range(n_chunks)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool_:
            results = list(pool_.map(one_chunk, range(n_chunks)))

    # fixed-order reduction: stack in chunk order, then a single numpy sum
    sums = np.sum(np.stack([r[0] for r in results]), axis=0)
    sumsqs = np.sum(np.stack([r[1] for r in results]), axis=0)
    return _finalize(sums, sumsqs, n)


def indicator_task(event):
    """Wrap ``event(stream, count) -> bool array`` as a 1-statistic task."""

    def task(stream: RandomStream, count: int):
        hits = np.asarray(event(stream, count), dtype=np.float64)
        s = hits.sum()
        return np.array([s]), np.array([s])  # 0/1 values: sumsq == sum

    return task


def pool(estimates) -> MCEstimate:
    """Pool estimates of the same statistic from disjoint sample sets.

    Size-weighted mean; the pooled se is rebuilt from the per-estimate
    sufficient statistics, so pooling k estimates of n samples each matches a
    single (k*n)-sample run up to float roundoff.
    """
    estimates = list(estimates)
    if not estimates:
        raise ValueError("nothing to pool")
    n_tot = sum(e.n for e in estimates)
    s_tot = sum(e.mean * e.n for e in estimates)
    sq_tot = 0.0
    for e in estimates:
        # invert the unbiased-variance formula to recover the raw sum of squares
        var = e.se * e.se * e.n
        sq_tot += (var * (e.n - 1) / e.n + e.mean * e.mean) * e.n
    mean = s_tot / n_tot
    var = max(sq_tot / n_tot - mean * mean, 0.0) * n_tot / max(n_tot - 1, 1)
    return MCEstimate(mean, float(np.sqrt(var / n_tot)), n_tot,
                      all(e.unresolved for e in estimates))
