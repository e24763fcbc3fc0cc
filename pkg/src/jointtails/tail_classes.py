"""Tail-class diagnostics: heavy (H), long (L), subexponential (S),
dominatedly varying (D), consistently varying (C), regularly varying (R),
their bivariate joint-excess analogues, and Matuszewska indices.

Class membership is a limit statement, so every verdict here is
"consistent-with" or "inconsistent-with" at a finite probe, never a proof.
Scale-type ratios (D, C, R, Matuszewska and the bivariate versions) are
evaluated in log space on a geometric ladder of thresholds far beyond the
quantile range: linear-space tails underflow float64 around ln x ~ 700,
while exact log tails stay meaningful, which is what lets a super-polynomial
tail ratio actually exceed a cap of 50. Shift-type ratios (L and the joint
insensitivity check) stay at moderate thresholds where x - a is exactly
representable in float64; far out on the ladder x - a rounds to x and every
shift ratio would collapse to 1, including for light tails where it must
not.

The subexponential checks are the only Monte Carlo parts: the 1D check
estimates P[X1+X2 > x]/tail(x) by direct simulation of iid positive parts,
and the bivariate ratio-4 check estimates the joint sum tail of iid pair
copies with the second x-coordinate integrated out exactly given the rest.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from .dependence import (
    DiagnosticCurve,
    DiagnosticKind,
    GaussianCopula,
    Independence,
    JointModel,
    PairwiseFGM,
    log_pair_tail,
    pair_tail,
)
from .errors import ModelValidationError
from .marginals import Marginal, MixtureSpec
from .montecarlo import run_parallel
from .rng import StreamKey

CONSISTENT = "consistent-with"
INCONSISTENT = "inconsistent-with"
UNRESOLVED = "unresolved"

# shift checks need x - a exactly representable and distinct from x
_SHIFT_LN_CAP = 13.0
# hard ceiling keeping exp(ln x) finite in float64
_LN_X_MAX = 600.0
# product-comparison constant below this is treated as vanishing
_SAI_FLOOR = 0.05


def _as_pair(v) -> Tuple[float, float]:
    if np.ndim(v) == 0:
        return float(v), float(v)
    t = tuple(float(c) for c in v)
    if len(t) != 2:
        raise ModelValidationError("probe entries must be scalars or pairs")
    return t


def _check_grid(name, vals, lo=None, hi=None):
    if len(vals) == 0:
        raise ModelValidationError("%s must be non-empty" % name)
    pairs = [_as_pair(v) for v in vals]
    for (a1, a2), (b1, b2) in zip(pairs, pairs[1:]):
        if not (b1 > a1 and b2 > a2):
            raise ModelValidationError("%s must be strictly increasing" % name)
    for p in pairs:
        for c in p:
            if lo is not None and c <= lo:
                raise ModelValidationError("%s entries must exceed %g" % (name, lo))
            if hi is not None and c >= hi:
                raise ModelValidationError("%s entries must stay below %g" % (name, hi))


@dataclass(frozen=True)
class RatioProbe:
    """Probe grids for the ratio diagnostics.

    quantile_levels drive threshold placement; scale_factors are the t (or
    (t1,t2)) multipliers for D/R/Matuszewska ratios; shift_values the a (or
    (a1,a2)) offsets for L ratios; z_levels the inner grid approaching 1 for
    the C check.
    """

    quantile_levels: tuple = (0.9, 0.99, 0.999, 0.9999)
    scale_factors: tuple = (2.0, 4.0, 8.0)
    shift_values: tuple = (1.0, 2.0)
    z_levels: tuple = (0.5, 0.8, 0.9, 0.95, 0.99)

    def __post_init__(self):
        object.__setattr__(self, "quantile_levels",
                           tuple(float(q) for q in self.quantile_levels))
        object.__setattr__(self, "scale_factors", tuple(self.scale_factors))
        object.__setattr__(self, "shift_values", tuple(self.shift_values))
        object.__setattr__(self, "z_levels",
                           tuple(float(z) for z in self.z_levels))
        _check_grid("quantile_levels", self.quantile_levels, lo=0.0, hi=1.0)
        _check_grid("scale_factors", self.scale_factors, lo=0.0)
        _check_grid("shift_values", self.shift_values, lo=0.0)
        _check_grid("z_levels", self.z_levels, lo=0.0, hi=1.0)

    @property
    def top_level(self) -> float:
        return self.quantile_levels[-1]

    def growth_factors(self) -> Tuple[Tuple[float, float], ...]:
        """scale_factors normalized to pairs, restricted to factors > 1."""
        out = [_as_pair(t) for t in self.scale_factors]
        out = [t for t in out if t[0] > 1.0 and t[1] > 1.0]
        if not out:
            raise ModelValidationError("need at least one scale factor above 1")
        return tuple(out)


@dataclass(frozen=True)
class MatuszewskaResult:
    """Upper/lower tail-ratio growth indices from an exact-tail ladder."""

    j_minus: float
    j_plus: float
    above_cap: bool
    cap: float
    table: tuple  # rows (ln_x, factor, index_estimate)

    @property
    def j_plus_report(self):
        return "above cap" if self.above_cap else self.j_plus

    def __iter__(self):
        return iter((self.j_minus, self.j_plus_report))


@dataclass(frozen=True, eq=False)
class ClassReport:
    """Per-class verdicts with the ratio tables backing them."""

    verdicts: dict
    tables: dict
    j_minus: float
    j_plus: object  # float, or the string "above cap"
    cap: float = 50.0
    alpha_hat: Optional[float] = None
    marginals: Optional[tuple] = None

    def __post_init__(self):
        bad = set(self.verdicts.values()) - {CONSISTENT, INCONSISTENT, UNRESOLVED}
        if bad:
            raise ModelValidationError("unknown verdict values %s" % sorted(bad))
        if isinstance(self.j_plus, (int, float)) and np.isfinite(self.j_plus):
            if self.j_minus > self.j_plus + 1e-9:
                raise ModelValidationError("index sandwich violated: J- > J+")


# ---------------------------------------------------------------------------
# ladders and Matuszewska indices


def _ladder(base_ln: float, reach_ln: float) -> np.ndarray:
    """Geometric ln-x rungs base*(1,2,4,...) until reach_ln is passed."""
    base = max(float(base_ln), 1.0)
    rungs = [base]
    while rungs[-1] < reach_ln and rungs[-1] * 2.0 <= _LN_X_MAX:
        rungs.append(rungs[-1] * 2.0)
    return np.array(rungs)


def _index_estimates(log_tail, ln_xs, factors):
    """Rows (ln_x, v, -(log_tail(v x) - log_tail(x))/ln v)."""
    rows = []
    for ln_x in ln_xs:
        x = np.exp(ln_x)
        lt_x = float(log_tail(x))
        for v in factors:
            est = -(float(log_tail(v * x)) - lt_x) / np.log(v)
            rows.append((float(ln_x), float(v), est))
    return rows


def _matuszewska_core(log_tail, base_ln, probe: RatioProbe, cap: float):
    factors = [t[0] for t in probe.growth_factors()]
    ln_xs = _ladder(base_ln, 2.2 * cap)
    rows = _index_estimates(log_tail, ln_xs, factors)
    top_two = set(ln_xs[-2:]) if len(ln_xs) >= 2 else set(ln_xs)
    ests = [r[2] for r in rows if r[0] in top_two]
    j_plus = max(ests)
    j_minus = max(min(ests), 0.0)
    return MatuszewskaResult(j_minus=float(j_minus), j_plus=float(j_plus),
                             above_cap=bool(j_plus > cap), cap=float(cap),
                             table=tuple(rows))


def matuszewska(m: Marginal, probe: RatioProbe, cap: float = 50.0) -> MatuszewskaResult:
    """Estimate the tail-ratio growth indices (J-, J+) from exact log tails.

    The ladder starts at the top probe quantile and doubles in log space
    until a super-polynomial tail would report an index beyond `cap`;
    iterating to the values through the result gives (J-, J+ or "above cap").
    """
    base_ln = np.log(max(float(m.quantile(probe.top_level)), np.e))
    return _matuszewska_core(m.log_tail, base_ln, probe, cap)


# ---------------------------------------------------------------------------
# one-dimensional class checks


def _limit_verdict(values, target, eps):
    """Final-point verdict with a monotone-approach escape hatch."""
    gaps = [abs(v - target) for v in values if np.isfinite(v)]
    if not gaps:
        return UNRESOLVED
    if gaps[-1] <= eps:
        return CONSISTENT
    if len(gaps) >= 2 and all(b < a for a, b in zip(gaps, gaps[1:])):
        return UNRESOLVED
    return INCONSISTENT


def _bounded_verdict(values):
    vals = [v for v in values if np.isfinite(v)]
    if len(vals) < 2:
        return UNRESOLVED
    growth = vals[-1] / vals[-2] if vals[-2] > 0.0 else np.inf
    if growth <= 1.05 and vals[-1] < 1e6:
        return CONSISTENT
    if growth > 1.2 or vals[-1] >= 1e6:
        return INCONSISTENT
    return UNRESOLVED


def _extrapolate_to_one(zs, ratios):
    """Linear extrapolation of ratio(z) to z=1 using the two largest z."""
    (z1, r1), (z2, r2) = (zs[-2], ratios[-2]), (zs[-1], ratios[-1])
    u1, u2 = 1.0 - z1, 1.0 - z2
    slope = (r1 - r2) / (u1 - u2)
    return r2 - u2 * slope


def _s_check_1d(m: Marginal, level: float, n_samples: int, key: StreamKey,
                workers: int):
    """Direct MC of P[X1+ + X2+ > x]/tail(x) at the given quantile level."""
    x = float(m.quantile(level))
    den = float(m.tail(x))

    def task(stream, count):
        s = np.maximum(m.sample(stream, count), 0.0) \
            + np.maximum(m.sample(stream, count), 0.0)
        hits = (s > x).astype(np.float64)
        return np.array([hits.sum()]), np.array([hits.sum()])

    est = run_parallel(task, n_samples, key, workers)[0]
    if den <= 0.0 or est.unresolved:
        return x, np.nan, np.nan, True
    return x, est.mean / den, est.se / den, False


def class_report_1d(m: Marginal, probe: RatioProbe, n_samples: int,
                    key: StreamKey, eps: float = 0.02, cap: float = 50.0,
                    workers: int = 1) -> ClassReport:
    """Verdicts for H, L, S, D, C, R with the backing ratio tables.

    H is analytic family metadata. L uses shift ratios at moderate
    thresholds (exact tails). D/C/R use the far log ladder (exact log
    tails). S is the only Monte Carlo check: n_samples >= 1e5 iid-sum draws
    at the top quantile level.
    """
    if n_samples < 100_000:
        raise ModelValidationError("the S check needs n_samples >= 1e5")
    verdicts, tables = {}, {}
    mat = matuszewska(m, probe, cap)

    # H: family metadata, not estimated
    verdicts["H"] = CONSISTENT if m.heavy else INCONSISTENT
    tables["H"] = ()

    base_ln = np.log(max(float(m.quantile(probe.top_level)), np.e))
    far = _ladder(base_ln, 2.2 * cap)
    near = np.minimum(_ladder(base_ln, 4.0 * base_ln), _SHIFT_LN_CAP)
    near = np.unique(near)

    # L: tail(x - a)/tail(x) -> 1 for every shift a
    l_rows, l_final = [], []
    for a in probe.shift_values:
        a = _as_pair(a)[0]
        ratios = []
        for ln_x in near:
            x = float(np.exp(ln_x))
            r = float(np.exp(m.log_tail(x - a) - m.log_tail(x)))
            l_rows.append((x, a, r))
            ratios.append(r)
        l_final.append(_limit_verdict(ratios, 1.0, eps))
    tables["L"] = tuple(l_rows)
    if all(v == CONSISTENT for v in l_final):
        verdicts["L"] = CONSISTENT
    elif any(v == INCONSISTENT for v in l_final):
        verdicts["L"] = INCONSISTENT
    else:
        verdicts["L"] = UNRESOLVED

    # D: tail(b x)/tail(x) bounded for the smallest shipped b in (0,1)
    # light tails legitimately overflow the ratio to inf; keep that silent
    b = 1.0 / max(t[0] for t in probe.growth_factors())
    with np.errstate(over="ignore"):
        d_vals = [float(np.exp(m.log_tail(b * np.exp(lx)) - m.log_tail(np.exp(lx))))
                  for lx in far]
    tables["D"] = tuple((float(np.exp(lx)), b, v) for lx, v in zip(far, d_vals))
    verdicts["D"] = _bounded_verdict(d_vals)

    # C: the D ratio at z-levels approaching 1, extrapolated to z=1
    x_top = float(np.exp(far[-1]))
    with np.errstate(over="ignore"):
        c_ratios = [float(np.exp(m.log_tail(z * x_top) - m.log_tail(x_top)))
                    for z in probe.z_levels]
    tables["C"] = tuple(zip(probe.z_levels, c_ratios))
    if len(probe.z_levels) >= 2 and all(np.isfinite(c_ratios)):
        limit = _extrapolate_to_one(probe.z_levels, c_ratios)
        verdicts["C"] = CONSISTENT if abs(limit - 1.0) <= eps else INCONSISTENT
    else:
        verdicts["C"] = UNRESOLVED

    # R: the fitted index must agree across factors and across rungs
    factors = [t[0] for t in probe.growth_factors()]
    rows = _index_estimates(m.log_tail, far[-2:], factors)
    tables["R"] = tuple(rows)
    top = [r[2] for r in rows if r[0] == far[-1]]
    prev = [r[2] for r in rows if r[0] == far[-2]]
    alpha_hat = float(np.mean(top))
    stable = (max(top) - min(top) <= 0.05
              and abs(np.mean(top) - np.mean(prev)) <= 0.05)
    verdicts["R"] = CONSISTENT if stable else INCONSISTENT

    # S: iid-sum tail ratio -> 2 by direct Monte Carlo
    x_s, ratio, se, bad = _s_check_1d(m, probe.quantile_levels[-2]
                                      if len(probe.quantile_levels) > 1
                                      else probe.top_level,
                                      n_samples, key, workers)
    tables["S"] = ((x_s, ratio, se),)
    if bad:
        verdicts["S"] = UNRESOLVED
    elif abs(ratio - 2.0) <= 3.0 * se + 0.5:
        # generous pre-asymptotic allowance on top of the MC band
        verdicts["S"] = CONSISTENT
    else:
        verdicts["S"] = INCONSISTENT

    return ClassReport(verdicts=verdicts, tables=tables, j_minus=mat.j_minus,
                       j_plus=mat.j_plus_report, cap=cap, alpha_hat=alpha_hat)


# ---------------------------------------------------------------------------
# bivariate checks


def l2_shift_ratio(lp, x: float, y: float, a1: float, a2: float) -> float:
    """Joint shift ratio; the identity probe short-circuits to exactly 1."""
    if a1 == 0.0 and a2 == 0.0:
        return 1.0
    return float(np.exp(lp(x - a1, y - a2) - lp(x, y)))


def _battery_2d(lp, lt_f, lt_g, base_f_ln, base_g_ln, alphas, probe: RatioProbe,
                eps: float, r2_tol: float = 1e-2):
    """Shared L2/D2/C2/R2/insensitivity engine over exact log tails.

    lp(x, y) is the log joint excess; lt_f/lt_g the marginal log tails.
    Points run along a per-coordinate geometric ladder; shift-type probes
    are clamped to moderate thresholds (see module notes).
    """
    verdicts, tables = {}, {}
    mult_f = _ladder(base_f_ln, 8.0 * max(base_f_ln, 1.0)) / max(base_f_ln, 1.0)
    rungs = [(base_f_ln * m, base_g_ln * m) for m in mult_f[:4]]
    near = [(min(lx, _SHIFT_LN_CAP), min(ly, _SHIFT_LN_CAP)) for lx, ly in rungs]
    near = list(dict.fromkeys(near))

    # L2: joint shift insensitivity at fixed offsets
    l_rows, l_verdicts = [], []
    for a in probe.shift_values:
        a1, a2 = _as_pair(a)
        ratios = []
        for lx, ly in near:
            x, y = float(np.exp(lx)), float(np.exp(ly))
            r = l2_shift_ratio(lp, x, y, a1, a2)
            l_rows.append((x, y, a1, a2, r))
            ratios.append(r)
        l_verdicts.append(_limit_verdict(ratios, 1.0, eps))
    tables["L2"] = tuple(l_rows)
    if all(v == CONSISTENT for v in l_verdicts):
        verdicts["L2"] = CONSISTENT
    elif any(v == INCONSISTENT for v in l_verdicts):
        verdicts["L2"] = INCONSISTENT
    else:
        verdicts["L2"] = UNRESOLVED

    # D2: scale ratio with the smallest b pair, bounded across rungs
    tmax = probe.growth_factors()[-1]
    b1, b2 = 1.0 / tmax[0], 1.0 / tmax[1]
    d_vals, d_rows = [], []
    for lx, ly in rungs:
        x, y = float(np.exp(lx)), float(np.exp(ly))
        v = float(np.exp(lp(b1 * x, b2 * y) - lp(x, y)))
        d_rows.append((x, y, v))
        d_vals.append(v)
    tables["D2"] = tuple(d_rows)
    verdicts["D2"] = _bounded_verdict(d_vals)

    # C2: double scale limit z -> (1,1) at the far rung
    lx, ly = rungs[-1]
    x_t, y_t = float(np.exp(lx)), float(np.exp(ly))
    lp_top = lp(x_t, y_t)
    c_ratios = [float(np.exp(lp(z * x_t, z * y_t) - lp_top))
                for z in probe.z_levels]
    tables["C2"] = tuple(zip(probe.z_levels, c_ratios))
    if len(probe.z_levels) >= 2 and all(np.isfinite(c_ratios)):
        limit = _extrapolate_to_one(probe.z_levels, c_ratios)
        verdicts["C2"] = CONSISTENT if abs(limit - 1.0) <= eps else INCONSISTENT
    else:
        verdicts["C2"] = UNRESOLVED

    # R2: scale ratio against t1^-a1 t2^-a2, guarded by the product constant
    sai_top = float(np.exp(lp_top - lt_f(x_t) - lt_g(y_t)))
    r_rows = []
    if alphas[0] is None or alphas[1] is None or not np.isfinite(sai_top):
        r_verdict = UNRESOLVED
    elif sai_top < _SAI_FLOOR:
        # vanishing product-comparison constant: membership indeterminate
        r_verdict = UNRESOLVED
    else:
        oks = []
        for t in probe.growth_factors():
            target = t[0] ** -alphas[0] * t[1] ** -alphas[1]
            ratio = float(np.exp(lp(t[0] * x_t, t[1] * y_t) - lp_top))
            r_rows.append((t[0], t[1], ratio, target))
            oks.append(np.isfinite(ratio) and abs(ratio - target) <= r2_tol)
        bad = [r for r in r_rows if not np.isfinite(r[2])]
        r_verdict = UNRESOLVED if bad else (
            CONSISTENT if all(oks) else INCONSISTENT)
    tables["R2"] = tuple(r_rows)
    tables["R2_sai"] = ((x_t, y_t, sai_top),)
    verdicts["R2"] = r_verdict

    # joint insensitivity: shifts of size sqrt(threshold)
    ins_vals, ins_rows = [], []
    for lx, ly in near:
        x, y = float(np.exp(lx)), float(np.exp(ly))
        s1, s2 = np.sqrt(x), np.sqrt(y)
        base = lp(x, y)
        hi = float(np.exp(lp(x - s1, y - s2) - base))
        lo = float(np.exp(lp(x + s1, y + s2) - base))
        d = max(abs(hi - 1.0), abs(1.0 - lo))
        ins_rows.append((x, y, d))
        ins_vals.append(d)
    tables["insensitivity"] = tuple(ins_rows)
    verdicts["insensitivity"] = _limit_verdict(ins_vals, 0.0, eps)

    return verdicts, tables


def _log_pair_fn(jm: JointModel, i: int, j: int):
    if isinstance(jm.copula, GaussianCopula):
        def lp(x, y):
            p = pair_tail(jm, i, j, x, y)
            return np.log(p) if p > 0.0 else -np.inf
        return lp, False
    return (lambda x, y: log_pair_tail(jm, i, j, x, y)), True


def class_report_2d(jm: JointModel, i: int, j: int, probe: RatioProbe,
                    n_samples: int, key: StreamKey, eps: float = 0.02,
                    cap: float = 50.0, workers: int = 1) -> ClassReport:
    """Bivariate class verdicts for the pair (X_i, Y_j).

    Runs the shared ratio battery on the exact joint excess. FGM and
    Independence pairs use exact log-scale tails on the far ladder; the
    Gaussian pair tail exists only in linear space, so rungs where it
    underflows come back unresolved instead of estimated. Marginal
    sub-reports are attached for both coordinates.
    """
    mi, mj = jm.x_marginals[i], jm.y_marginals[j]
    lp, _ = _log_pair_fn(jm, i, j)
    base_f = np.log(max(float(mi.quantile(probe.top_level)), np.e))
    base_g = np.log(max(float(mj.quantile(probe.top_level)), np.e))
    verdicts, tables = _battery_2d(
        lp, mi.log_tail, mj.log_tail, base_f, base_g,
        (mi.rv_index, mj.rv_index), probe, eps)
    rep_x = class_report_1d(mi, probe, n_samples, key.child(100), eps, cap, workers)
    rep_y = class_report_1d(mj, probe, n_samples, key.child(101), eps, cap, workers)
    verdicts["H"] = CONSISTENT if (mi.heavy and mj.heavy) else INCONSISTENT
    mat = matuszewska(mi, probe, cap)
    return ClassReport(verdicts=verdicts, tables=tables, j_minus=mat.j_minus,
                       j_plus=mat.j_plus_report, cap=cap,
                       alpha_hat=rep_x.alpha_hat, marginals=(rep_x, rep_y))


def _doubled_pair_model(jm: JointModel, i: int, j: int) -> JointModel:
    """Two iid copies of the (X_i, Y_j) pair, cross-pair independent."""
    mi, mj = jm.x_marginals[i], jm.y_marginals[j]
    cop = jm.copula
    if isinstance(cop, Independence):
        dbl = Independence()
    elif isinstance(cop, PairwiseFGM):
        theta = cop.thetas[i] if (i == j and i < len(cop.thetas)) else 0.0
        dbl = PairwiseFGM((theta, theta))
    else:
        rho = float(cop.corr[i, jm.n + j])
        c = np.eye(4)
        c[0, 2] = c[2, 0] = rho
        c[1, 3] = c[3, 1] = rho
        dbl = GaussianCopula(c)
    return JointModel((mi, mi), (mj, mj), dbl)


def s2_ratio_check(jm: JointModel, i: int, j: int, probe: RatioProbe,
                   n_samples: int, key: StreamKey,
                   workers: int = 1) -> DiagnosticCurve:
    """P[X1+X2 > x, Y1+Y2 > y] / P[X > x, Y > y] for iid pair copies.

    The expected limit is 4. The numerator integrates the second x-copy out
    exactly given everything else, so far grid cells stay resolvable; the
    denominator is the exact pair tail.
    """
    dbl = _doubled_pair_model(jm, i, j)
    mi, mj = jm.x_marginals[i], jm.y_marginals[j]
    thresholds, values, unresolved = [], [], []
    for cell, level in enumerate(probe.quantile_levels):
        x, y = float(mi.quantile(level)), float(mj.quantile(level))

        def task(stream, count, x=x, y=y):
            xs, ys, lat = dbl.sample_block(stream, count)
            mult = dbl.conditional_tail("x", 1, x - xs[0], lat)
            vals = np.where(ys[0] + ys[1] > y, mult, 0.0)
            return np.array([vals.sum()]), np.array([(vals * vals).sum()])

        num = run_parallel(task, n_samples, key.child(cell), workers)[0]
        den = pair_tail(jm, i, j, x, y)
        thresholds.append((x, y))
        if den <= 0.0 or num.unresolved:
            values.append((np.nan, np.nan))
            unresolved.append(True)
        else:
            values.append((num.mean / den, num.se / den))
            unresolved.append(False)
    return DiagnosticCurve(DiagnosticKind.S2_RATIO, tuple(thresholds),
                           tuple(values), tuple(unresolved))


def mixture_closure_check(mx_f: MixtureSpec, mx_g: MixtureSpec,
                          jm1: JointModel, jm2: JointModel, p: float,
                          probe: RatioProbe, eps: float = 0.02,
                          cap: float = 50.0) -> ClassReport:
    """Class verdicts for the two-component joint mixture.

    The mixture joint excess is p*pair1(x,y) + (1-p)*pair2(x,y), evaluated
    exactly in log space; mx_f and mx_g must declare the matching marginal
    mixtures for the (0,0) pair of the two models.
    """
    if not (0.0 < p < 1.0):
        raise ModelValidationError("mixture weight p must lie in (0,1)")
    if not (abs(mx_f.p - p) < 1e-12 and abs(mx_g.p - p) < 1e-12):
        raise ModelValidationError("mixture specs disagree with weight p")
    if mx_f.left != jm1.x_marginals[0] or mx_f.right != jm2.x_marginals[0]:
        raise ModelValidationError(
            "x mixture components must match the models' first x-marginals")
    if mx_g.left != jm1.y_marginals[0] or mx_g.right != jm2.y_marginals[0]:
        raise ModelValidationError(
            "y mixture components must match the models' first y-marginals")
    lp1, ok1 = _log_pair_fn(jm1, 0, 0)
    lp2, ok2 = _log_pair_fn(jm2, 0, 0)
    if not (ok1 and ok2):
        raise ModelValidationError(
            "mixture closure needs log-scale pair tails (FGM or Independence)")
    lw1, lw2 = np.log(p), np.log1p(-p)

    def lp(x, y):
        return float(np.logaddexp(lw1 + lp1(x, y), lw2 + lp2(x, y)))

    base_f = np.log(max(float(jm1.x_marginals[0].quantile(probe.top_level)),
                        float(jm2.x_marginals[0].quantile(probe.top_level)), np.e))
    base_g = np.log(max(float(jm1.y_marginals[0].quantile(probe.top_level)),
                        float(jm2.y_marginals[0].quantile(probe.top_level)), np.e))
    verdicts, tables = _battery_2d(
        lp, mx_f.log_tail, mx_g.log_tail, base_f, base_g,
        (mx_f.rv_index, mx_g.rv_index), probe, eps)
    mat = _matuszewska_core(mx_f.log_tail, base_f, probe, cap)
    return ClassReport(verdicts=verdicts, tables=tables, j_minus=mat.j_minus,
                       j_plus=mat.j_plus_report, cap=cap)
