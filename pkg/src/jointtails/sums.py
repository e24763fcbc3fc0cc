"""Randomly weighted sums: simulators, asymptotic predictors, experiments.

The central object of study is the joint exceedance of the two weighted
sequences: the final sums (S_n^Th, T_m^Dl), their running maxima, and the
componentwise maxima of the weighted terms. Three asymptotic predictors are
provided for the right-hand side:

* ``predictor_S``: the exact double sum of pair tails (unit weights),
* ``predictor_S_weighted``: the double sum of weighted pair terms
  E[pair_tail(x/Theta_i, y/Delta_j)], exact or conditionally-exact,
* ``predictor_breiman``: moment-multiplier form
  sum E[Theta_i^a1 Delta_j^a2] P[X_i>x, Y_j>y], valid in the
  regularly-varying regime only.

``maxsum_experiment`` runs the Monte Carlo left-hand sides against a chosen
predictor over a threshold grid and reports ratios with confidence
intervals; the LHS never shares samples with a Monte Carlo RHS (independent
sub-streams), so ratio noise is honest.

Every sampling task draws the main vector first and the weights second,
with Degenerate weights consuming no randomness; this makes unit-weight
configurations bitwise identical to unweighted ones under a shared seed.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Tuple

import numpy as np

from .dependence import (
    DiagnosticCurve,
    DiagnosticKind,
    JointModel,
    pair_tail,
)
from .errors import ModelValidationError, RegimeError
from .marginals import Pareto
from .montecarlo import MCEstimate, run_parallel
from .rng import RandomStream, StreamKey
from .tail_classes import RatioProbe
from .weights import WeightModel, weighted_pair_term


class Variant(str, Enum):
    JOINT_SUM = "joint-sum"
    JOINT_RUNNING_MAX = "joint-running-max"
    JOINT_COMPONENT_MAX = "joint-component-max"


class PredictorKind(str, Enum):
    S_PLAIN = "S_PLAIN"
    S_WEIGHTED = "S_WEIGHTED"
    S_BREIMAN = "S_BREIMAN"


_VARIANTS = (Variant.JOINT_SUM, Variant.JOINT_RUNNING_MAX,
             Variant.JOINT_COMPONENT_MAX)


@dataclass(frozen=True)
class PathSample:
    """One joint draw with all derived path functionals.

    Plain and weighted partial sums are kept side by side; with all-ones
    weights the weighted fields equal the plain ones exactly.
    """

    x: np.ndarray
    y: np.ndarray
    theta: np.ndarray
    delta: np.ndarray
    sums_x: np.ndarray        # S_1..S_n
    sums_y: np.ndarray        # T_1..T_m
    wsums_x: np.ndarray       # S_k^Th
    wsums_y: np.ndarray       # T_l^Dl
    runmax_x: float           # max_k S_k^Th
    runmax_y: float
    compmax_x: float          # max_i Theta_i X_i
    compmax_y: float
    upper_x: float            # sum of positive parts of Theta_i X_i
    upper_y: float


def _check_dims(jm: JointModel, wm: WeightModel):
    if jm.n != wm.n or jm.m != wm.m:
        raise ModelValidationError(
            "model is %dx%d but weights are %dx%d"
            % (jm.n, jm.m, wm.n, wm.m))


def simulate_paths(jm: JointModel, wm: WeightModel,
                   stream: RandomStream) -> PathSample:
    """One draw of the joint path (main vector first, weights second)."""
    _check_dims(jm, wm)
    xs, ys, _ = jm.sample_block(stream, 1)
    th, dl = wm.sample_block(stream, 1)
    x, y = xs[:, 0], ys[:, 0]
    theta, delta = th[:, 0], dl[:, 0]
    wx, wy = theta * x, delta * y
    wsx, wsy = np.cumsum(wx), np.cumsum(wy)
    return PathSample(
        x=x, y=y, theta=theta, delta=delta,
        sums_x=np.cumsum(x), sums_y=np.cumsum(y),
        wsums_x=wsx, wsums_y=wsy,
        runmax_x=float(wsx.max()), runmax_y=float(wsy.max()),
        compmax_x=float(wx.max()), compmax_y=float(wy.max()),
        upper_x=float(np.maximum(wx, 0.0).sum()),
        upper_y=float(np.maximum(wy, 0.0).sum()),
    )


def _variant_task(jm: JointModel, wm: WeightModel, x: float, y: float):
    """Chunk task computing the three variant indicators plus sandwich
    violations on shared draws. Statistic order: joint-sum,
    joint-running-max, joint-component-max, violation count."""

    def task(stream, count):
        xs, ys, _ = jm.sample_block(stream, count)
        th, dl = wm.sample_block(stream, count)
        wx, wy = th * xs, dl * ys
        csx, csy = np.cumsum(wx, axis=0), np.cumsum(wy, axis=0)
        s_ind = (csx[-1] > x) & (csy[-1] > y)
        r_ind = (csx.max(axis=0) > x) & (csy.max(axis=0) > y)
        c_ind = (wx.max(axis=0) > x) & (wy.max(axis=0) > y)
        u_ind = (np.maximum(wx, 0.0).sum(axis=0) > x) \
            & (np.maximum(wy, 0.0).sum(axis=0) > y)
        viol = (s_ind & ~r_ind) | (r_ind & ~u_ind)
        stats = np.stack([s_ind, r_ind, c_ind, viol]).astype(np.float64)
        s = stats.sum(axis=1)
        return s, s  # 0/1 statistics: sumsq == sum

    return task


def estimate_lhs(jm: JointModel, wm: WeightModel, x: float, y: float,
                 variant, n_samples: int, key: StreamKey,
                 workers: int = 1) -> MCEstimate:
    """Direct MC estimate of the joint exceedance for one variant."""
    _check_dims(jm, wm)
    variant = Variant(variant)
    ests = run_parallel(_variant_task(jm, wm, x, y), n_samples, key, workers)
    est = ests[_VARIANTS.index(variant)]
    hits = est.mean * est.n
    if 0 < hits < 10:
        warnings.warn(
            "only %.0f hits at (x=%g, y=%g); estimate is unreliable"
            % (hits, x, y), stacklevel=2)
    return est


def predictor_S(jm: JointModel, x: float, y: float) -> float:
    """Exact double sum of pair tails sum_i sum_j P[X_i>x, Y_j>y]."""
    return float(sum(pair_tail(jm, i, j, x, y)
                     for i in range(jm.n) for j in range(jm.m)))


def predictor_S_weighted(jm: JointModel, wm: WeightModel, x: float, y: float,
                         n_samples: int = 1_000_000,
                         key: Optional[StreamKey] = None,
                         workers: int = 1) -> Tuple[float, float]:
    """(value, se): double sum of weighted pair terms.

    Each term integrates the weight pair out of pair_tail(x/Theta_i,
    y/Delta_j) exactly (quadrature) where possible and by Monte Carlo with
    reported se for lognormal weights; zero-weight mass contributes nothing
    via the pair_tail(+inf, .) = 0 convention.
    """
    _check_dims(jm, wm)
    total, var = 0.0, 0.0
    for i in range(jm.n):
        for j in range(jm.m):
            sub = key.child(i * jm.m + j) if key is not None else None
            val, se = weighted_pair_term(jm, wm, i, j, x, y, n_samples,
                                         sub, workers)
            total += val
            var += se * se
    return total, float(np.sqrt(var))


def _shared_pareto_alpha(marginals, side: str) -> float:
    alphas = set()
    for pos, m in enumerate(marginals):
        if not isinstance(m, Pareto):
            raise RegimeError(
                "%s marginal %d is %s; the moment-multiplier predictor "
                "needs regularly varying (Pareto) marginals"
                % (side, pos, type(m).__name__))
        alphas.add(m.alpha)
    if len(alphas) != 1:
        raise RegimeError(
            "%s marginals carry distinct tail indices %s; a single index "
            "per side is required" % (side, sorted(alphas)))
    return alphas.pop()


def predictor_breiman(jm: JointModel, wm: WeightModel, x: float,
                      y: float) -> float:
    """Moment-multiplier predictor, regularly-varying regime only.

    sum_i sum_j E[Theta_i^a1 Delta_j^a2] P[X_i>x, Y_j>y] with a1, a2 the
    shared Pareto indices of the two sides. Requires every weight moment
    finite strictly beyond the index (boundary configurations rejected).
    """
    from .weights import mixed_moment

    _check_dims(jm, wm)
    a1 = _shared_pareto_alpha(jm.x_marginals, "x")
    a2 = _shared_pareto_alpha(jm.y_marginals, "y")
    for side, specs, a in (("theta", wm.thetas, a1), ("delta", wm.deltas, a2)):
        for pos, s in enumerate(specs):
            # strictly-beyond-the-index moment must exist, not just at it
            if not s.moment_is_finite(a * (1.0 + 1e-6)):
                raise RegimeError(
                    "%s[%d] has no finite moment beyond order %g"
                    % (side, pos, a))
    total = 0.0
    for i in range(jm.n):
        for j in range(jm.m):
            total += mixed_moment(wm, i, j, a1, a2) * pair_tail(jm, i, j, x, y)
    return float(total)


@dataclass(frozen=True, eq=False)
class RatioReport:
    """Grid of LHS estimates vs one predictor, with ratios and CIs.

    ratio = lhs.mean / rhs; the CI is the lhs CI divided by rhs (the rhs is
    exact or quadrature-accurate, with any rhs MC se reported separately).
    ``band`` is the acceptance half-width on |ratio - 1| at the top level.
    """

    grid: tuple                 # ((x, y), ...)
    lhs: dict                   # Variant -> tuple of MCEstimate
    rhs: tuple                  # ((value, se), ...) per grid point
    ratios: dict                # Variant -> tuple of float
    cis: dict                   # Variant -> tuple of (lo, hi)
    predictor_kind: PredictorKind
    band: float
    sandwich_violations: tuple  # per grid point
    n_samples: int

    def final_ratio(self, variant) -> float:
        return self.ratios[Variant(variant)][-1]

    def passes(self, variant) -> bool:
        r = self.final_ratio(variant)
        return bool(np.isfinite(r) and abs(r - 1.0) <= self.band)

    def rows(self):
        """Flat rows (x, y, variant, lhs, se, rhs, ratio, ci_lo, ci_hi, n)."""
        out = []
        for cell, (x, y) in enumerate(self.grid):
            for v in _VARIANTS:
                e = self.lhs[v][cell]
                lo, hi = self.cis[v][cell]
                out.append((x, y, v.value, e.mean, e.se, self.rhs[cell][0],
                            self.ratios[v][cell], lo, hi, e.n))
        return out


def threshold_grid(jm: JointModel, probe: RatioProbe):
    """(x, y) per level: the max marginal quantile on each side."""
    out = []
    for level in probe.quantile_levels:
        x = max(float(m.quantile(level)) for m in jm.x_marginals)
        y = max(float(m.quantile(level)) for m in jm.y_marginals)
        out.append((x, y))
    return tuple(out)


def _rhs_value(jm, wm, x, y, kind: PredictorKind, n_samples, key, workers):
    if kind is PredictorKind.S_PLAIN:
        return predictor_S(jm, x, y), 0.0
    if kind is PredictorKind.S_WEIGHTED:
        return predictor_S_weighted(jm, wm, x, y, n_samples, key, workers)
    return predictor_breiman(jm, wm, x, y), 0.0


def ratio_experiment(jm: JointModel, wm: WeightModel, grid,
                     n_samples: int, key: StreamKey,
                     predictor_kind=PredictorKind.S_PLAIN,
                     workers: int = 1,
                     band: Optional[float] = None) -> RatioReport:
    """Monte Carlo LHS variants vs the chosen predictor over an (x,y) grid.

    LHS cell c draws from key.child(c); Monte Carlo RHS terms draw from
    key.child(1000 + c), so LHS and RHS never share samples. The default
    acceptance band is max(0.15, 5 * relative CI half-width at the top
    level): asymptotic statements at finite thresholds need a declared
    pre-asymptotic allowance.
    """
    _check_dims(jm, wm)
    kind = PredictorKind(predictor_kind)
    grid = tuple((float(x), float(y)) for x, y in grid)
    if not grid or any(x <= 0.0 or y <= 0.0 for x, y in grid):
        raise ModelValidationError("grid needs strictly positive (x, y) pairs")
    lhs = {v: [] for v in _VARIANTS}
    rhs, viols = [], []
    ratios = {v: [] for v in _VARIANTS}
    cis = {v: [] for v in _VARIANTS}
    for cell, (x, y) in enumerate(grid):
        ests = run_parallel(_variant_task(jm, wm, x, y), n_samples,
                            key.child(cell), workers)
        r_val, r_se = _rhs_value(jm, wm, x, y, kind, n_samples,
                                 key.child(1000 + cell), workers)
        rhs.append((r_val, r_se))
        viols.append(int(round(ests[3].mean * ests[3].n)))
        for v, e in zip(_VARIANTS, ests[:3]):
            lhs[v].append(e)
            if r_val > 0.0:
                lo, hi = e.ci95
                ratios[v].append(e.mean / r_val)
                cis[v].append((lo / r_val, hi / r_val))
            else:
                ratios[v].append(np.nan)
                cis[v].append((np.nan, np.nan))
    if band is None:
        top = lhs[Variant.JOINT_SUM][-1]
        rel_half = (1.96 * top.se / top.mean) if top.mean > 0.0 else np.inf
        band = max(0.15, 5.0 * rel_half)
    return RatioReport(
        grid=grid,
        lhs={v: tuple(es) for v, es in lhs.items()},
        rhs=tuple(rhs),
        ratios={v: tuple(rs) for v, rs in ratios.items()},
        cis={v: tuple(cs) for v, cs in cis.items()},
        predictor_kind=kind,
        band=float(band),
        sandwich_violations=tuple(viols),
        n_samples=int(n_samples),
    )


def maxsum_experiment(jm: JointModel, wm: WeightModel, probe: RatioProbe,
                      n_samples: int, key: StreamKey,
                      predictor_kind=PredictorKind.S_PLAIN,
                      workers: int = 1,
                      band: Optional[float] = None) -> RatioReport:
    """ratio_experiment over the probe's marginal-quantile grid."""
    return ratio_experiment(jm, wm, threshold_grid(jm, probe), n_samples,
                            key, predictor_kind, workers, band)


def sum_closure_check(jm: JointModel, seq: str, i: int, k: int,
                      probe: RatioProbe, n_samples: int, key: StreamKey,
                      workers: int = 1) -> DiagnosticCurve:
    """P[V_i + V_k > x] / (tail_i(x) + tail_k(x)) along the probe grid.

    V is one of the two sequences; the second summand is integrated out
    exactly given the rest of the draw. The bivariate summed-pair analogue
    is the iid ratio-4 check in the classes module.
    """
    if i == k:
        raise ModelValidationError("need two distinct indices")
    mi, mk = jm.marginal(seq, i), jm.marginal(seq, k)
    thresholds, values, unresolved = [], [], []
    for cell, level in enumerate(probe.quantile_levels):
        x = max(float(mi.quantile(level)), float(mk.quantile(level)))

        def task(stream, count, x=x):
            xs, ys, lat = jm.sample_block(stream, count)
            v = xs[i] if seq.lower() == "x" else ys[i]
            mult = jm.conditional_tail(seq, k, x - v, lat)
            return np.array([mult.sum()]), np.array([(mult * mult).sum()])

        num = run_parallel(task, n_samples, key.child(cell), workers)[0]
        den = float(mi.tail(x) + mk.tail(x))
        thresholds.append(x)
        if den <= 0.0 or num.unresolved:
            values.append((np.nan, np.nan))
            unresolved.append(True)
        else:
            values.append((num.mean / den, num.se / den))
            unresolved.append(False)
    return DiagnosticCurve(DiagnosticKind.SUM_CLOSURE, tuple(thresholds),
                           tuple(values), tuple(unresolved))


def sum_scale_ratio(jm: JointModel, seq: str, i: int, k: int, factor: float,
                    probe: RatioProbe, n_samples: int, key: StreamKey,
                    workers: int = 1) -> DiagnosticCurve:
    """Scale-ratio curve P[V_i+V_k > t x] / P[V_i+V_k > x] of the sum.

    Backs the scale-insensitivity face of the closure results: for a
    consistently varying sum the curve approaches t^-alpha as x grows."""
    if factor <= 1.0:
        raise ModelValidationError("scale factor must exceed 1")
    mi, mk = jm.marginal(seq, i), jm.marginal(seq, k)
    thresholds, values, unresolved = [], [], []
    for cell, level in enumerate(probe.quantile_levels):
        x = max(float(mi.quantile(level)), float(mk.quantile(level)))

        def task(stream, count, x=x):
            xs, ys, lat = jm.sample_block(stream, count)
            v = xs[i] if seq.lower() == "x" else ys[i]
            base = jm.conditional_tail(seq, k, x - v, lat)
            scaled = jm.conditional_tail(seq, k, factor * x - v, lat)
            return (np.array([base.sum(), scaled.sum()]),
                    np.array([(base * base).sum(), (scaled * scaled).sum()]))

        base, scaled = run_parallel(task, n_samples, key.child(cell), workers)
        thresholds.append(x)
        if base.unresolved or base.mean <= 0.0:
            values.append((np.nan, np.nan))
            unresolved.append(True)
        else:
            ratio = scaled.mean / base.mean
            se = ratio * np.sqrt(
                (scaled.se / scaled.mean) ** 2 + (base.se / base.mean) ** 2
            ) if scaled.mean > 0.0 else np.nan
            values.append((ratio, se))
            unresolved.append(scaled.unresolved)
    return DiagnosticCurve(DiagnosticKind.SUM_CLOSURE, tuple(thresholds),
                           tuple(values), tuple(unresolved))


def product_dependence_check(jm: JointModel, wm: WeightModel, kind,
                             indices, probe: RatioProbe, n_samples: int,
                             key: StreamKey, workers: int = 1) -> DiagnosticCurve:
    """Triple dependence ratio computed on the weighted products.

    kind "GQAI": P[|Th_i X_i|>x, Th_k X_k>x, Dl_j Y_j>y] over the sum of the
    two weighted pair terms; kind "GTAI": the conditional version with
    per-variable thresholds. Thresholds are placed at raw-marginal
    quantiles; with unit weights this reproduces triple_diagnostic on the
    raw variables bit for bit under a shared key.
    """
    kind = str(kind).upper()
    if kind not in ("GQAI", "GTAI"):
        raise ModelValidationError("kind must be GQAI or GTAI")
    _check_dims(jm, wm)
    i, k, j = indices
    if i == k:
        raise ModelValidationError("need two distinct x-side indices")
    mi, mk, mj = jm.x_marginals[i], jm.x_marginals[k], jm.y_marginals[j]
    out_kind = (DiagnosticKind.PRODUCT_GQAI if kind == "GQAI"
                else DiagnosticKind.PRODUCT_GTAI)
    thresholds, values, unresolved = [], [], []
    for cell, level in enumerate(probe.quantile_levels):
        yj = float(mj.quantile(level))
        if kind == "GQAI":
            xi = xk = max(float(mi.quantile(level)), float(mk.quantile(level)))
            thresholds.append((xi, yj))
        else:
            xi, xk = float(mi.quantile(level)), float(mk.quantile(level))
            thresholds.append((xi, xk, yj))

        def task(stream, count, xi=xi, xk=xk, yj=yj):
            xs, ys, lat = jm.sample_block(stream, count)
            th, dl = wm.sample_block(stream, count)
            acc = (np.abs(th[i] * xs[i]) > xi) & (dl[j] * ys[j] > yj)
            with np.errstate(divide="ignore"):
                t = np.where(th[k] > 0.0,
                             xk / np.where(th[k] > 0.0, th[k], 1.0), np.inf)
            mult = jm.conditional_tail("x", k, t, lat)
            vals = np.where(acc, mult, 0.0)
            return np.array([vals.sum()]), np.array([(vals * vals).sum()])

        num = run_parallel(task, n_samples, key.child(cell), workers)[0]
        sub = key.child(1000 + cell)
        if kind == "GQAI":
            d1, s1 = weighted_pair_term(jm, wm, i, j, xi, yj, n_samples,
                                        sub.child(0), workers)
            d2, s2 = weighted_pair_term(jm, wm, k, j, xk, yj, n_samples,
                                        sub.child(1), workers)
            den, den_se = d1 + d2, float(np.hypot(s1, s2))
        else:
            den, den_se = weighted_pair_term(jm, wm, k, j, xk, yj, n_samples,
                                             sub.child(0), workers)
        if den <= 0.0 or num.unresolved:
            values.append((np.nan, np.nan))
            unresolved.append(True)
        else:
            # scale exactly like the raw-variable diagnostics so unit
            # weights reproduce triple_diagnostic bit for bit
            est = num.scaled(1.0 / den)
            se = np.hypot(est.se, est.mean * den_se / den)
            values.append((est.mean, float(se)))
            unresolved.append(False)
    return DiagnosticCurve(out_kind, tuple(thresholds), tuple(values),
                           tuple(unresolved))
