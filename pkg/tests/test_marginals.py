"""Closed-form marginal laws: exact tails, quantiles, sampling, mixtures."""

import numpy as np
import pytest
import scipy.stats
from hypothesis import given, settings, strategies as st

from jointtails.errors import ModelValidationError
from jointtails.marginals import (
    Exponential,
    HeavyWeibull,
    Lognormal,
    MixtureSpec,
    Pareto,
    mixture_tail,
)
from jointtails.rng import StreamKey, stream_for

FAMILIES = [
    Pareto(alpha=2.0, scale=1.0),
    Lognormal(mu=0.0, sigma=1.0),
    HeavyWeibull(shape=0.5, scale=1.0),
    Exponential(rate=1.0),
]


def test_pareto_exact_tail_values():
    m = Pareto(alpha=2.0, scale=1.0)
    assert m.tail(10.0) == pytest.approx(0.01, rel=1e-14)
    assert m.tail(0.5) == 1.0
    assert m.quantile(0.99) == pytest.approx(10.0, rel=1e-12)
    assert m.quantile(0.0) == 1.0


def test_pareto_tail_ratio_is_exact_power():
    m = Pareto(alpha=1.5, scale=2.0)
    for x in (2.0, 5.0, 40.0):
        for t in (1.0, 2.0, 7.5):
            assert m.tail(t * x) / m.tail(x) == pytest.approx(
                t ** -1.5, rel=1e-13)


def test_lognormal_matches_scipy():
    m = Lognormal(mu=0.3, sigma=1.2)
    ref = scipy.stats.lognorm(s=1.2, scale=np.exp(0.3))
    for x in (0.1, 1.0, 7.0, 300.0):
        assert m.tail(x) == pytest.approx(ref.sf(x), rel=1e-11)
    assert Lognormal(mu=0.0, sigma=1.0).tail(1.0) == pytest.approx(0.5, rel=1e-14)


def test_heavy_weibull_matches_scipy():
    m = HeavyWeibull(shape=0.5, scale=2.0)
    ref = scipy.stats.weibull_min(c=0.5, scale=2.0)
    for x in (0.01, 1.0, 9.0):
        assert m.tail(x) == pytest.approx(ref.sf(x), rel=1e-12)


def test_exponential_shift_ratio_exact():
    m = Exponential(rate=0.7)
    for x in (5.0, 11.0):
        for a in (0.5, 1.0, 2.0):
            assert m.tail(x - a) / m.tail(x) == pytest.approx(
                np.exp(a * 0.7), rel=1e-13)


def test_shift_moves_support():
    base = Pareto(alpha=2.0, scale=1.0)
    moved = Pareto(alpha=2.0, scale=1.0, shift=-3.0)
    assert moved.tail(7.0) == base.tail(10.0)
    assert moved.quantile(0.99) == pytest.approx(base.quantile(0.99) - 3.0)
    assert not moved.nonnegative
    assert base.nonnegative


def test_sample_is_quantile_of_uniform():
    m = Pareto(alpha=2.0, scale=1.0, shift=1.5)
    s = stream_for(StreamKey(seed=101))
    u = stream_for(StreamKey(seed=101)).uniforms(64)
    got = m.sample(s, 64)
    assert np.array_equal(got, m.quantile(u))


@pytest.mark.parametrize("m", FAMILIES, ids=lambda m: type(m).__name__)
def test_quantile_tail_round_trip(m):
    for u in (0.05, 0.4, 0.9, 0.999, 0.999999):
        x = m.quantile(u)
        assert m.tail(x) == pytest.approx(1.0 - u, rel=1e-9)
        assert m.quantile(1.0 - m.tail(x)) == pytest.approx(x, rel=1e-9)


@pytest.mark.parametrize("m", FAMILIES, ids=lambda m: type(m).__name__)
def test_log_tail_consistent(m):
    for u in (0.5, 0.99, 0.99999):
        x = m.quantile(u)
        assert m.log_tail(x) == pytest.approx(np.log(m.tail(x)), rel=1e-12)


@pytest.mark.parametrize("m", FAMILIES, ids=lambda m: type(m).__name__)
def test_tail_monotone_nonincreasing(m):
    xs = np.linspace(-5.0, 50.0, 800)
    t = m.tail(xs)
    assert np.all(np.diff(t) <= 1e-15)
    assert t.max() <= 1.0 and t.min() > 0.0


@given(st.floats(min_value=0.01, max_value=0.99))
@settings(max_examples=200, deadline=None)
def test_pareto_round_trip_property(u):
    m = Pareto(alpha=1.3, scale=2.0, shift=-1.0)
    assert m.tail(m.quantile(u)) == pytest.approx(1.0 - u, rel=1e-9)


def test_empirical_tail_brackets_exact():
    m = Pareto(alpha=2.0, scale=1.0)
    n = 1_000_000
    x = m.quantile(0.99)
    xs = m.sample(stream_for(StreamKey(seed=33)), n)
    phat = float(np.mean(xs > x))
    se = np.sqrt(0.01 * 0.99 / n)
    assert abs(phat - 0.01) <= 3.0 * se


@pytest.mark.parametrize("m", FAMILIES, ids=lambda m: type(m).__name__)
def test_kolmogorov_smirnov_inverse_transform(m):
    n = 100_000
    xs = m.sample(stream_for(StreamKey(seed=55)), n)
    stat = scipy.stats.kstest(xs, lambda x: 1.0 - m.tail(x)).statistic
    assert stat < 1.63 / np.sqrt(n)


def test_rv_index_metadata():
    assert Pareto(alpha=1.5, scale=1.0).rv_index == 1.5
    assert Lognormal(mu=0.0, sigma=1.0).rv_index is None
    assert HeavyWeibull(shape=0.5, scale=1.0).rv_index is None
    assert Exponential(rate=1.0).rv_index is None


def test_heavy_metadata():
    assert Pareto(alpha=2.0, scale=1.0).heavy
    assert Lognormal(mu=0.0, sigma=1.0).heavy
    assert HeavyWeibull(shape=0.5, scale=1.0).heavy
    assert not Exponential(rate=1.0).heavy


def test_means():
    assert Pareto(alpha=2.0, scale=1.0).mean() == pytest.approx(2.0)
    assert Exponential(rate=4.0).mean() == pytest.approx(0.25)
    assert Lognormal(mu=0.0, sigma=1.0).mean() == pytest.approx(np.exp(0.5))


def test_parameter_validation():
    with pytest.raises(ModelValidationError):
        Pareto(alpha=0.0, scale=1.0)
    with pytest.raises(ModelValidationError):
        Pareto(alpha=2.0, scale=-1.0)
    with pytest.raises(ModelValidationError):
        Lognormal(mu=0.0, sigma=0.0)
    with pytest.raises(ModelValidationError):
        HeavyWeibull(shape=1.0, scale=1.0)
    with pytest.raises(ModelValidationError):
        HeavyWeibull(shape=0.0, scale=1.0)
    with pytest.raises(ModelValidationError):
        Exponential(rate=0.0)


def test_quantile_domain():
    m = Pareto(alpha=2.0, scale=1.0)
    with pytest.raises(ModelValidationError):
        m.quantile(1.0)
    with pytest.raises(ModelValidationError):
        m.quantile(-0.1)


def test_mixture_exact_value():
    mx = MixtureSpec(p=0.5, left=Pareto(alpha=2.0, scale=1.0),
                     right=Pareto(alpha=2.0, scale=2.0))
    assert mixture_tail(mx, 10.0) == pytest.approx(0.025, rel=1e-13)
    assert mx.tail(10.0) == pytest.approx(0.025, rel=1e-13)


def test_mixture_of_identical_components():
    m = Pareto(alpha=1.5, scale=1.0)
    mx = MixtureSpec(p=0.5, left=m, right=m)
    for x in (1.0, 3.0, 30.0):
        assert mx.tail(x) == pytest.approx(m.tail(x), rel=1e-14)


@given(st.floats(min_value=0.5, max_value=200.0),
       st.floats(min_value=0.01, max_value=0.99))
@settings(max_examples=200, deadline=None)
def test_mixture_tail_between_components(x, p):
    left = Pareto(alpha=2.0, scale=1.0)
    right = Lognormal(mu=0.0, sigma=1.0)
    mx = MixtureSpec(p=p, left=left, right=right)
    lo = min(left.tail(x), right.tail(x))
    hi = max(left.tail(x), right.tail(x))
    assert lo - 1e-15 <= mx.tail(x) <= hi + 1e-15


def test_mixture_rv_index():
    same = MixtureSpec(p=0.3, left=Pareto(alpha=2.0, scale=1.0),
                       right=Pareto(alpha=2.0, scale=3.0))
    assert same.rv_index == 2.0
    crossed = MixtureSpec(p=0.3, left=Pareto(alpha=2.0, scale=1.0),
                          right=Lognormal(mu=0.0, sigma=1.0))
    assert crossed.rv_index is None


def test_mixture_weight_validation():
    m = Pareto(alpha=2.0, scale=1.0)
    with pytest.raises(ModelValidationError):
        MixtureSpec(p=0.0, left=m, right=m)
    with pytest.raises(ModelValidationError):
        MixtureSpec(p=1.0, left=m, right=m)
