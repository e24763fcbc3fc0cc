"""Joint models: exact pair tails, diagnostics, and copula validation."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import ndtr, ndtri, owens_t
from scipy.stats import spearmanr

from jointtails.dependence import (
    DiagnosticCurve,
    DiagnosticKind,
    GaussianCopula,
    Independence,
    JointModel,
    PairwiseFGM,
    log_pair_tail,
    pair_diagnostic,
    pair_tail,
    pair_tail_vec,
    sai_constant,
    sample_joint,
    slow_variation_probe,
    triple_diagnostic,
)
from jointtails.errors import ModelValidationError
from jointtails.marginals import Pareto
from jointtails.rng import StreamKey, stream_for
from jointtails.tail_classes import RatioProbe


def gauss_pair(rho):
    return JointModel(
        x_marginals=(Pareto(alpha=2.0, scale=1.0),),
        y_marginals=(Pareto(alpha=1.5, scale=1.0),),
        copula=GaussianCopula(corr=[[1.0, rho], [rho, 1.0]]),
    )


def bvn_sf_oracle(a, b, rho):
    # Owen (1956): Phi2(h,k,rho) via Owen's T; survival = Phi2(-a,-b,rho)
    s = np.sqrt(1.0 - rho * rho)
    h, k = -a, -b
    ah = (k - rho * h) / (h * s)
    ak = (h - rho * k) / (k * s)
    return ndtr(h) / 2.0 + ndtr(k) / 2.0 - owens_t(h, ah) - owens_t(k, ak)


# -- pair_tail exact values -------------------------------------------------


def test_pair_tail_independence_product():
    jm = JointModel(
        x_marginals=(Pareto(alpha=2.0, scale=1.0),),
        y_marginals=(Pareto(alpha=2.0, scale=1.0),),
        copula=Independence(),
    )
    assert pair_tail(jm, 0, 0, 10.0, 10.0) == pytest.approx(1e-4, rel=1e-12)


def test_pair_tail_fgm_coupled():
    jm = JointModel(
        x_marginals=(Pareto(alpha=2.0, scale=1.0),),
        y_marginals=(Pareto(alpha=2.0, scale=1.0),),
        copula=PairwiseFGM(thetas=(1.0,)),
    )
    expect = 1e-4 * (1.0 + 0.99 * 0.99)
    assert pair_tail(jm, 0, 0, 10.0, 10.0) == pytest.approx(expect, rel=1e-12)
    assert expect == pytest.approx(1.9801e-4, rel=1e-12)


def test_pair_tail_fgm_cross_pair_is_product(fgm_pair_model):
    jm = fgm_pair_model
    fx = jm.x_marginals[0].tail(7.0)
    gy = jm.y_marginals[1].tail(5.0)
    assert pair_tail(jm, 0, 1, 7.0, 5.0) == fx * gy


def test_pair_tail_gaussian_rho_zero_is_product():
    jm = gauss_pair(0.0)
    fx = jm.x_marginals[0].tail(10.0)
    gy = jm.y_marginals[0].tail(10.0)
    assert pair_tail(jm, 0, 0, 10.0, 10.0) == fx * gy


@pytest.mark.parametrize("rho", [0.3, 0.5, -0.4, 0.9])
@pytest.mark.parametrize("level", [0.9, 0.99])
def test_pair_tail_gaussian_matches_owen_t(rho, level):
    jm = gauss_pair(rho)
    x = jm.x_marginals[0].quantile(level)
    y = jm.y_marginals[0].quantile(level)
    a = -ndtri(jm.x_marginals[0].tail(x))
    b = -ndtri(jm.y_marginals[0].tail(y))
    got = pair_tail(jm, 0, 0, x, y)
    want = bvn_sf_oracle(a, b, rho)
    assert got == pytest.approx(want, abs=1e-9, rel=1e-9)


def test_pair_tail_index_errors(indep_pair_model):
    with pytest.raises(ModelValidationError):
        pair_tail(indep_pair_model, 1, 0, 10.0, 10.0)
    with pytest.raises(ModelValidationError):
        pair_tail(indep_pair_model, 0, -1, 10.0, 10.0)


def test_pair_tail_vec_matches_scalar(fgm_pair_model):
    xs = np.array([2.0, 5.0, 20.0, 100.0])
    ys = np.array([3.0, 4.0, 30.0, 300.0])
    vec = pair_tail_vec(fgm_pair_model, 0, 0, xs, ys)
    scal = [pair_tail(fgm_pair_model, 0, 0, x, y) for x, y in zip(xs, ys)]
    assert np.array_equal(vec, np.array(scal))


def test_pair_tail_vec_gaussian_loops():
    jm = gauss_pair(0.5)
    xs = np.array([2.0, 10.0])
    vec = pair_tail_vec(jm, 0, 0, xs, xs)
    scal = [pair_tail(jm, 0, 0, x, x) for x in xs]
    assert np.array_equal(vec, np.array(scal))


@settings(max_examples=40, deadline=None)
@given(
    x=st.floats(min_value=1.0, max_value=1e5),
    y=st.floats(min_value=1.0, max_value=1e5),
    theta=st.floats(min_value=-1.0, max_value=1.0),
    rho=st.floats(min_value=-0.95, max_value=0.95),
)
def test_pair_tail_frechet_hoeffding_bounds(x, y, theta, rho):
    marg = (Pareto(alpha=2.0, scale=1.0),), (Pareto(alpha=1.5, scale=1.0),)
    models = [
        JointModel(x_marginals=marg[0], y_marginals=marg[1],
                   copula=Independence()),
        JointModel(x_marginals=marg[0], y_marginals=marg[1],
                   copula=PairwiseFGM(thetas=(theta,))),
        JointModel(x_marginals=marg[0], y_marginals=marg[1],
                   copula=GaussianCopula(corr=[[1.0, rho], [rho, 1.0]])),
    ]
    for jm in models:
        fx = jm.x_marginals[0].tail(x)
        gy = jm.y_marginals[0].tail(y)
        p = pair_tail(jm, 0, 0, x, y)
        assert max(0.0, fx + gy - 1.0) - 1e-12 <= p <= min(fx, gy) + 1e-12


# -- log_pair_tail ----------------------------------------------------------


def test_log_pair_tail_matches_log_in_range(fgm_pair_model):
    p = pair_tail(fgm_pair_model, 0, 0, 10.0, 10.0)
    lp = log_pair_tail(fgm_pair_model, 0, 0, 10.0, 10.0)
    assert lp == pytest.approx(np.log(p), rel=1e-12)


def test_log_pair_tail_below_underflow(fgm_pair_model):
    # at x = 1e200 the plain tail underflows but the log ladder survives
    jm = fgm_pair_model
    x = 1e200
    lf = jm.x_marginals[0].log_tail(x)
    lg = jm.y_marginals[0].log_tail(x)
    lp = log_pair_tail(jm, 0, 0, x, x)
    assert np.isfinite(lp)
    assert lp == pytest.approx(lf + lg + np.log(2.0), rel=1e-12)


def test_log_pair_tail_gaussian_underflow_raises():
    jm = gauss_pair(0.5)
    with pytest.raises(ModelValidationError):
        log_pair_tail(jm, 0, 0, 1e308, 1e308)


def test_log_pair_tail_fgm_theta_minus_one_saturates():
    jm = JointModel(
        x_marginals=(Pareto(alpha=2.0, scale=1.0),),
        y_marginals=(Pareto(alpha=2.0, scale=1.0),),
        copula=PairwiseFGM(thetas=(-1.0,)),
    )
    # 1 + theta F G -> 0 only in the exact-arithmetic limit; far out the
    # correction factor is tiny but positive, so the log stays finite
    lp = log_pair_tail(jm, 0, 0, 1e6, 1e6)
    p = pair_tail(jm, 0, 0, 1e6, 1e6)
    assert lp == pytest.approx(np.log(p), rel=1e-9)


# -- sampling ---------------------------------------------------------------


def test_sample_joint_shapes_and_determinism(fgm_pair_model, key):
    x1, y1 = sample_joint(fgm_pair_model, stream_for(key))
    x2, y2 = sample_joint(fgm_pair_model, stream_for(key))
    assert x1.shape == (2,) and y1.shape == (2,)
    assert np.array_equal(x1, x2) and np.array_equal(y1, y2)
    xb, yb, _ = fgm_pair_model.sample_block(stream_for(key), 1)
    assert np.array_equal(x1, xb[:, 0]) and np.array_equal(y1, yb[:, 0])


def test_independence_rank_correlation_near_zero(indep_pair_model):
    n = 1_000_000
    x, y, _ = indep_pair_model.sample_block(stream_for(StreamKey(seed=71)), n)
    rho = spearmanr(x[0], y[0]).statistic
    assert abs(rho) < 3.0 / np.sqrt(n)


def block_spearman(x, y, blocks):
    vals = [spearmanr(xs, ys).statistic
            for xs, ys in zip(np.array_split(x, blocks),
                              np.array_split(y, blocks))]
    vals = np.array(vals)
    return vals.mean(), vals.std(ddof=1) / np.sqrt(blocks)


def test_gaussian_spearman_rho():
    jm = gauss_pair(0.5)
    x, y, _ = jm.sample_block(stream_for(StreamKey(seed=72)), 200_000)
    est, se = block_spearman(x[0], y[0], 20)
    target = (6.0 / np.pi) * np.arcsin(0.25)
    assert target == pytest.approx(0.4826, abs=5e-4)
    assert abs(est - target) <= 3.0 * se


def test_fgm_spearman_rho(fgm_pair_model):
    x, y, _ = fgm_pair_model.sample_block(stream_for(StreamKey(seed=73)), 200_000)
    est, se = block_spearman(x[0], y[0], 20)
    assert abs(est - 1.0 / 3.0) <= 3.0 * se
    # the second coupled pair carries the same dependence
    est2, se2 = block_spearman(x[1], y[1], 20)
    assert abs(est2 - 1.0 / 3.0) <= 3.0 * se2


@pytest.mark.parametrize("copula", [
    Independence(),
    PairwiseFGM(thetas=(1.0,)),
    GaussianCopula(corr=[[1.0, 0.5], [0.5, 1.0]]),
], ids=["independence", "fgm", "gaussian"])
@pytest.mark.parametrize("level", [0.9, 0.99])
def test_sampling_matches_pair_tail(copula, level):
    jm = JointModel(
        x_marginals=(Pareto(alpha=2.0, scale=1.0),),
        y_marginals=(Pareto(alpha=1.5, scale=1.0),),
        copula=copula,
    )
    n = 1_000_000
    x, y, _ = jm.sample_block(stream_for(StreamKey(seed=74)), n)
    tx = jm.x_marginals[0].quantile(level)
    ty = jm.y_marginals[0].quantile(level)
    p = pair_tail(jm, 0, 0, tx, ty)
    emp = np.mean((x[0] > tx) & (y[0] > ty))
    se = np.sqrt(p * (1.0 - p) / n)
    assert abs(emp - p) <= 3.5 * se


def test_fgm_marginals_unchanged_by_coupling(fgm_pair_model):
    # the conditional inverse must leave the y-marginal law intact
    _, y, _ = fgm_pair_model.sample_block(stream_for(StreamKey(seed=75)), 400_000)
    for level in (0.5, 0.9, 0.99):
        t = fgm_pair_model.y_marginals[0].quantile(level)
        emp = np.mean(y[0] > t)
        p = 1.0 - level
        assert abs(emp - p) <= 3.5 * np.sqrt(p * (1.0 - p) / 400_000)


# -- conditional tails ------------------------------------------------------


@pytest.mark.parametrize("copula", [
    Independence(),
    PairwiseFGM(thetas=(0.7,)),
    GaussianCopula(corr=[[1.0, 0.5], [0.5, 1.0]]),
], ids=["independence", "fgm", "gaussian"])
def test_conditional_tail_scalar_vs_array(copula):
    jm = JointModel(
        x_marginals=(Pareto(alpha=2.0, scale=1.0),),
        y_marginals=(Pareto(alpha=1.5, scale=1.0),),
        copula=copula,
    )
    _, _, lat = jm.sample_block(stream_for(StreamKey(seed=76)), 1000)
    t = jm.y_marginals[0].quantile(0.99)
    a = jm.conditional_tail("y", 0, t, lat)
    b = jm.conditional_tail("y", 0, np.full(1000, t), lat)
    assert np.array_equal(a, b)
    assert a.shape == (1000,)


@pytest.mark.parametrize("copula", [
    PairwiseFGM(thetas=(1.0,)),
    GaussianCopula(corr=[[1.0, 0.6], [0.6, 1.0]]),
], ids=["fgm", "gaussian"])
def test_conditional_tail_is_unbiased(copula):
    jm = JointModel(
        x_marginals=(Pareto(alpha=2.0, scale=1.0),),
        y_marginals=(Pareto(alpha=1.5, scale=1.0),),
        copula=copula,
    )
    n = 200_000
    x, _, lat = jm.sample_block(stream_for(StreamKey(seed=77)), n)
    ty = jm.y_marginals[0].quantile(0.9)
    ct = jm.conditional_tail("y", 0, ty, lat)
    # marginalized: E[P[Y>t | rest]] = Gbar(t)
    se = ct.std(ddof=1) / np.sqrt(n)
    assert abs(ct.mean() - jm.y_marginals[0].tail(ty)) <= 4.0 * se
    # joint: E[1{X>x} P[Y>t | rest]] = pair_tail(x, t)
    tx = jm.x_marginals[0].quantile(0.9)
    vals = np.where(x[0] > tx, ct, 0.0)
    se = vals.std(ddof=1) / np.sqrt(n)
    assert abs(vals.mean() - pair_tail(jm, 0, 0, tx, ty)) <= 4.0 * se


def test_conditional_tail_extreme_thresholds_gaussian():
    jm = gauss_pair(0.5)
    _, _, lat = jm.sample_block(stream_for(StreamKey(seed=78)), 100)
    below = jm.conditional_tail("y", 0, 0.5, lat)  # below support
    assert np.all(below == 1.0)
    far = jm.conditional_tail("y", 0, 1e308, lat)  # tail underflows to 0
    assert np.all(far == 0.0)


# -- pair_diagnostic --------------------------------------------------------


def two_by_one(copula):
    return JointModel(
        x_marginals=(Pareto(alpha=2.0, scale=1.0), Pareto(alpha=2.0, scale=1.0)),
        y_marginals=(Pareto(alpha=2.0, scale=1.0),),
        copula=copula,
    )


def test_pqai_independence_value():
    jm = two_by_one(Independence())
    probe = RatioProbe(quantile_levels=(0.99,))
    curve = pair_diagnostic(jm, "PQAI", "x", 0, 1, probe, 400_000,
                            StreamKey(seed=79))
    assert curve.kind is DiagnosticKind.PQAI
    est, se = curve.values[0]
    assert not curve.unresolved[0]
    # exact arithmetic: (0.01 * 0.01) / 0.02 = 0.005
    assert abs(est - 0.005) <= 3.0 * se


def test_tai_independence_equals_marginal_tail():
    jm = two_by_one(Independence())
    probe = RatioProbe(quantile_levels=(0.9, 0.99))
    curve = pair_diagnostic(jm, DiagnosticKind.TAI, "x", 0, 1, probe,
                            200_000, StreamKey(seed=80))
    for (est, se), level, bad in zip(curve.values, probe.quantile_levels,
                                     curve.unresolved):
        assert not bad
        assert abs(est - (1.0 - level)) <= 3.0 * se


def test_pqai_gaussian_strictly_decreasing():
    corr = np.eye(3)
    corr[0, 1] = corr[1, 0] = 0.8
    jm = two_by_one(GaussianCopula(corr=corr))
    probe = RatioProbe(quantile_levels=(0.9, 0.99, 0.999))
    curve = pair_diagnostic(jm, "PQAI", "x", 0, 1, probe, 1_000_000,
                            StreamKey(seed=81))
    ests = curve.estimates
    assert not any(curve.unresolved)
    assert ests[0] > ests[1] > ests[2]


def test_pair_diagnostic_rejects_bad_args(indep_pair_model):
    jm = two_by_one(Independence())
    probe = RatioProbe(quantile_levels=(0.9,))
    with pytest.raises(ModelValidationError):
        pair_diagnostic(jm, "GQAI_X", "x", 0, 1, probe, 100, StreamKey(seed=1))
    with pytest.raises(ModelValidationError):
        pair_diagnostic(jm, "PQAI", "x", 1, 1, probe, 100, StreamKey(seed=1))


def test_pqai_unresolved_at_hopeless_threshold():
    jm = two_by_one(Independence())
    probe = RatioProbe(quantile_levels=(0.99999,))
    curve = pair_diagnostic(jm, "PQAI", "x", 0, 1, probe, 1000,
                            StreamKey(seed=82))
    assert curve.unresolved == (True,)
    assert curve.final_resolved() is None


# -- triple_diagnostic ------------------------------------------------------


def test_gqai_independence_value():
    jm = two_by_one(Independence())
    probe = RatioProbe(quantile_levels=(0.99,))
    curve = triple_diagnostic(jm, "GQAI_X", (0, 1, 0), probe, 2_000_000,
                              StreamKey(seed=83))
    est, se = curve.values[0]
    assert not curve.unresolved[0]
    # exact arithmetic: 1e-4 * 0.01 / (2 * 1e-4) = 0.005
    assert abs(est - 0.005) <= 3.0 * se


def test_gtai_independence_equals_marginal_tail():
    jm = two_by_one(Independence())
    probe = RatioProbe(quantile_levels=(0.9,))
    curve = triple_diagnostic(jm, "GTAI_X", (0, 1, 0), probe, 400_000,
                              StreamKey(seed=84))
    est, se = curve.values[0]
    assert not curve.unresolved[0]
    assert abs(est - 0.1) <= 3.0 * se


def test_gqai_reduction_to_pqai_under_independence():
    jm = two_by_one(Independence())
    level = 0.9
    probe = RatioProbe(quantile_levels=(level,))
    thr = jm.x_marginals[0].quantile(level)
    yj = jm.y_marginals[0].quantile(level)
    # analytic denominators agree after removing the shared y factor
    den3 = pair_tail(jm, 0, 0, thr, yj) + pair_tail(jm, 1, 0, thr, yj)
    den2 = jm.x_marginals[0].tail(thr) + jm.x_marginals[1].tail(thr)
    gy = jm.y_marginals[0].tail(yj)
    assert den3 == pytest.approx(den2 * gy, rel=1e-14)
    # statistically the two ratio estimates target the same constant
    c3 = triple_diagnostic(jm, "GQAI_X", (0, 1, 0), probe, 400_000,
                           StreamKey(seed=85))
    c2 = pair_diagnostic(jm, "PQAI", "x", 0, 1, probe, 400_000,
                         StreamKey(seed=86))
    (e3, s3), (e2, s2) = c3.values[0], c2.values[0]
    assert abs(e3 - e2) <= 4.0 * np.sqrt(s3 * s3 + s2 * s2)


def test_gqai_y_mirrors_with_sequences_swapped():
    jm = JointModel(
        x_marginals=(Pareto(alpha=2.0, scale=1.0),),
        y_marginals=(Pareto(alpha=2.0, scale=1.0), Pareto(alpha=2.0, scale=1.0)),
        copula=Independence(),
    )
    probe = RatioProbe(quantile_levels=(0.9,))
    curve = triple_diagnostic(jm, "GQAI_Y", (0, 1, 0), probe, 400_000,
                              StreamKey(seed=87))
    est, se = curve.values[0]
    assert abs(est - 0.05) <= 3.0 * se


def test_triple_diagnostic_rejects_bad_args():
    jm = two_by_one(Independence())
    probe = RatioProbe(quantile_levels=(0.9,))
    with pytest.raises(ModelValidationError):
        triple_diagnostic(jm, "PQAI", (0, 1, 0), probe, 100, StreamKey(seed=1))
    with pytest.raises(ModelValidationError):
        triple_diagnostic(jm, "GQAI_X", (1, 1, 0), probe, 100, StreamKey(seed=1))


# -- sai_constant and slow variation ----------------------------------------


def test_sai_constant_fgm_half():
    jm = JointModel(
        x_marginals=(Pareto(alpha=2.0, scale=1.0),),
        y_marginals=(Pareto(alpha=1.5, scale=1.0),),
        copula=PairwiseFGM(thetas=(0.5,)),
    )
    probe = RatioProbe(quantile_levels=(0.9, 0.99, 0.999))
    curve = sai_constant(jm, 0, 0, probe)
    assert curve.kind is DiagnosticKind.SAI_CONST
    assert all(se == 0.0 for _, se in curve.values)
    assert not any(curve.unresolved)
    assert curve.estimates[-1] == pytest.approx(1.4990005, rel=1e-9)


def test_sai_constant_independence_is_one(indep_pair_model):
    probe = RatioProbe(quantile_levels=(0.9, 0.99, 0.999))
    curve = sai_constant(indep_pair_model, 0, 0, probe)
    assert curve.estimates == (1.0, 1.0, 1.0)


def test_sai_constant_fgm_minus_one_approaches_zero():
    jm = JointModel(
        x_marginals=(Pareto(alpha=2.0, scale=1.0),),
        y_marginals=(Pareto(alpha=1.5, scale=1.0),),
        copula=PairwiseFGM(thetas=(-1.0,)),
    )
    probe = RatioProbe(quantile_levels=(0.9, 0.99))
    curve = sai_constant(jm, 0, 0, probe)
    ests = curve.estimates
    assert ests[1] == pytest.approx(1.0 - 0.99 * 0.99, rel=1e-9)
    assert ests[1] == pytest.approx(0.0199, rel=1e-9)
    assert ests[0] > ests[1]


def test_slow_variation_independence_identity(indep_pair_model):
    probe = RatioProbe(quantile_levels=(0.9, 0.99))
    curve = slow_variation_probe(indep_pair_model, 0, 0, (2.0, 3.0), probe)
    assert curve.kind is DiagnosticKind.SLOWVAR
    assert curve.estimates == (1.0, 1.0)


def test_slow_variation_unit_scaling_identity(fgm_pair_model):
    probe = RatioProbe(quantile_levels=(0.9, 0.99))
    curve = slow_variation_probe(fgm_pair_model, 0, 0, (1.0, 1.0), probe)
    assert curve.estimates == (1.0, 1.0)


def test_slow_variation_fgm_near_one_far_out(fgm_pair_model):
    probe = RatioProbe(quantile_levels=(0.9, 0.99, 0.999))
    curve = slow_variation_probe(fgm_pair_model, 0, 0, (2.0, 2.0), probe)
    assert abs(curve.estimates[-1] - 1.0) <= 1e-3


def test_slow_variation_rejects_nonpositive_scale(fgm_pair_model):
    probe = RatioProbe(quantile_levels=(0.9,))
    with pytest.raises(ModelValidationError):
        slow_variation_probe(fgm_pair_model, 0, 0, (0.0, 2.0), probe)


# -- model and curve validation ---------------------------------------------


def test_gaussian_copula_validation():
    with pytest.raises(ModelValidationError, match="square"):
        GaussianCopula(corr=[[1.0, 0.0]])
    with pytest.raises(ModelValidationError, match="symmetric"):
        GaussianCopula(corr=[[1.0, 0.3], [0.2, 1.0]])
    with pytest.raises(ModelValidationError, match="unit diagonal"):
        GaussianCopula(corr=[[1.0, 0.5], [0.5, 2.0]])
    with pytest.raises(ModelValidationError, match="strictly inside"):
        GaussianCopula(corr=[[1.0, 1.0], [1.0, 1.0]])
    with pytest.raises(ModelValidationError, match="semidefinite"):
        GaussianCopula(corr=[[1.0, 0.99, 0.0],
                             [0.99, 1.0, 0.99],
                             [0.0, 0.99, 1.0]])


def test_gaussian_copula_corr_is_frozen():
    cop = GaussianCopula(corr=[[1.0, 0.5], [0.5, 1.0]])
    with pytest.raises(ValueError):
        cop.corr[0, 1] = 0.9


def test_fgm_theta_range():
    with pytest.raises(ModelValidationError):
        PairwiseFGM(thetas=(1.5,))
    with pytest.raises(ModelValidationError):
        PairwiseFGM(thetas=(0.5, -1.0001))


def test_joint_model_dimension_checks():
    xs = (Pareto(alpha=2.0, scale=1.0), Pareto(alpha=2.0, scale=1.0))
    ys = (Pareto(alpha=1.5, scale=1.0),)
    with pytest.raises(ModelValidationError, match="3 variables"):
        JointModel(x_marginals=xs, y_marginals=ys,
                   copula=GaussianCopula(corr=[[1.0, 0.2], [0.2, 1.0]]))
    with pytest.raises(ModelValidationError, match="thetas"):
        JointModel(x_marginals=xs, y_marginals=xs,
                   copula=PairwiseFGM(thetas=(1.0,)))
    with pytest.raises(ModelValidationError):
        JointModel(x_marginals=(), y_marginals=ys)
    with pytest.raises(ModelValidationError):
        JointModel(x_marginals=xs, y_marginals=ys, copula="comonotone")


def test_marginal_lookup(fgm_pair_model):
    assert fgm_pair_model.marginal("X", 0) is fgm_pair_model.x_marginals[0]
    assert fgm_pair_model.marginal("y", 1) is fgm_pair_model.y_marginals[1]
    with pytest.raises(ValueError):
        fgm_pair_model.marginal("z", 0)


def test_diagnostic_curve_validation():
    with pytest.raises(ModelValidationError, match="lengths"):
        DiagnosticCurve(DiagnosticKind.PQAI, (1.0, 2.0), ((0.1, 0.0),), (False,))
    with pytest.raises(ModelValidationError, match="increase"):
        DiagnosticCurve(DiagnosticKind.PQAI, (2.0, 1.0),
                        ((0.1, 0.0), (0.2, 0.0)), (False, False))
    with pytest.raises(ModelValidationError, match="increase"):
        DiagnosticCurve(DiagnosticKind.SAI_CONST, ((1.0, 5.0), (2.0, 4.0)),
                        ((0.1, 0.0), (0.2, 0.0)), (False, False))


def test_diagnostic_curve_final_resolved():
    curve = DiagnosticCurve(DiagnosticKind.PQAI, (1.0, 2.0, 3.0),
                            ((0.5, 0.1), (0.4, 0.1), (np.nan, np.nan)),
                            (False, False, True))
    assert curve.final_resolved() == 0.4
    assert curve.estimates[:2] == (0.5, 0.4)
