"""Parallel MC engine: determinism across workers, SE math, pooling."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from jointtails.montecarlo import (
    MCEstimate,
    indicator_task,
    pool,
    run_parallel,
)
from jointtails.rng import StreamKey, stream_for


def _bernoulli_task(p):
    return indicator_task(lambda stream, count: stream.uniforms(count) < p)


def test_constant_task():
    def task(stream, count):
        vals = np.ones(count)
        return np.array([vals.sum()]), np.array([count * 1.0])

    est = run_parallel(task, 10_000, StreamKey(seed=3))[0]
    assert est.mean == 1.0
    assert est.se == 0.0
    assert est.n == 10_000
    assert not est.unresolved


@pytest.mark.parametrize("workers", [2, 4, 8])
def test_worker_count_is_immaterial(workers):
    # 200_000 spans three 2^16 chunks plus a remainder
    key = StreamKey(seed=11, path=(4,))
    task = _bernoulli_task(0.01)
    one = run_parallel(task, 200_000, key, workers=1)[0]
    many = run_parallel(task, 200_000, key, workers=workers)[0]
    assert one.mean == many.mean
    assert one.se == many.se
    assert one.n == many.n == 200_000


def test_binomial_se_formula():
    est = run_parallel(_bernoulli_task(0.01), 1_000_000, StreamKey(seed=7))[0]
    assert abs(est.mean - 0.01) <= 3.0 * est.se
    expect_se = np.sqrt(0.01 * 0.99 / 1_000_000)
    assert abs(est.se - expect_se) <= 0.1 * expect_se


def test_zero_hits_flagged_unresolved():
    est = run_parallel(_bernoulli_task(-1.0), 10_000, StreamKey(seed=9))[0]
    assert est.unresolved
    assert est.mean == 0.0


def test_multi_statistic_task():
    def task(stream, count):
        u = stream.uniforms(count)
        vals = np.stack([u < 0.5, u < 0.1])
        return vals.sum(axis=1).astype(float), (vals * vals).sum(axis=1).astype(float)

    a, b = run_parallel(task, 100_000, StreamKey(seed=13))
    assert abs(a.mean - 0.5) <= 4 * a.se
    assert abs(b.mean - 0.1) <= 4 * b.se


def test_ci_halfwidth():
    est = MCEstimate(mean=0.5, se=0.1, n=100)
    lo, hi = est.ci95
    assert lo == pytest.approx(0.5 - 1.96 * 0.1)
    assert hi == pytest.approx(0.5 + 1.96 * 0.1)


def test_scaled_estimate():
    est = MCEstimate(mean=0.5, se=0.1, n=100)
    two = est.scaled(-2.0)
    assert two.mean == -1.0 and two.se == 0.2 and two.n == 100


def test_pool_of_single_estimate_is_identity():
    est = run_parallel(_bernoulli_task(0.3), 50_000, StreamKey(seed=17))[0]
    pooled = pool([est])
    assert pooled.mean == pytest.approx(est.mean, rel=1e-12)
    assert pooled.se == pytest.approx(est.se, rel=1e-3)
    assert pooled.n == est.n


def test_pool_total_n_and_variance_scaling():
    parts = [
        run_parallel(_bernoulli_task(0.2), 40_000, StreamKey(seed=19, path=(i,)))[0]
        for i in range(4)
    ]
    pooled = pool(parts)
    assert pooled.n == sum(p.n for p in parts)
    mean_se = np.mean([p.se for p in parts])
    assert pooled.se == pytest.approx(mean_se / 2.0, rel=0.05)


def test_pool_matches_one_big_run():
    """Pooling chunk estimates reproduces the single-run sufficient stats."""
    key = StreamKey(seed=23)
    full = run_parallel(_bernoulli_task(0.4), 3 * 2**16, key)[0]
    parts = [
        run_parallel(_bernoulli_task(0.4), 2**16, key.child(i))[0]
        for i in range(3)
    ]
    pooled = pool(parts)
    assert pooled.n == full.n
    assert pooled.mean == pytest.approx(full.mean, abs=5 * full.se)


def test_pool_rejects_empty():
    with pytest.raises(ValueError):
        pool([])


def test_sibling_streams_uncorrelated():
    n = 1_000_000
    key = StreamKey(seed=29)
    a = stream_for(key.child(1)).uniforms(n) < 0.5
    b = stream_for(key.child(2)).uniforms(n) < 0.5
    r = np.corrcoef(a, b)[0, 1]
    assert abs(r) < 4.0 / np.sqrt(n)


@st.composite
def _estimates(draw):
    n = draw(st.integers(min_value=2, max_value=10_000))
    hits = draw(st.integers(min_value=0, max_value=n))
    total = float(hits)
    sumsq = float(hits)
    mean = total / n
    var = max(sumsq / n - mean * mean, 0.0) * n / (n - 1)
    return MCEstimate(mean, float(np.sqrt(var / n)), n, unresolved=hits == 0)


@given(st.lists(_estimates(), min_size=1, max_size=6))
@settings(max_examples=200, deadline=None)
def test_pool_is_order_invariant(ests):
    fwd = pool(ests)
    rev = pool(list(reversed(ests)))
    assert fwd.n == rev.n
    assert fwd.mean == pytest.approx(rev.mean, rel=1e-12, abs=1e-15)
    assert fwd.se == pytest.approx(rev.se, rel=1e-9, abs=1e-15)
    assert fwd.unresolved == rev.unresolved


@given(st.lists(_estimates(), min_size=1, max_size=6))
@settings(max_examples=200, deadline=None)
def test_pooled_mean_is_weighted_average(ests):
    pooled = pool(ests)
    expect = sum(e.mean * e.n for e in ests) / sum(e.n for e in ests)
    assert pooled.mean == pytest.approx(expect, rel=1e-12, abs=1e-15)
