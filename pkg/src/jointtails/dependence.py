"""Joint models: two heavy-tailed sequences coupled by a copula.

A :class:`JointModel` holds n x-marginals, m y-marginals and one of three
copulas over the n+m variables:

* ``Independence``: all variables independent.
* ``GaussianCopula(corr)``: latent Gaussian vector with unit-diagonal PSD
  correlation matrix; every off-diagonal entry strictly inside (-1,1), which
  keeps every pair asymptotically independent.
* ``PairwiseFGM(thetas)``: pairs (X_i, Y_i), i < min(n,m), coupled by a
  Farlie-Gumbel-Morgenstern copula with parameter theta_i; everything else
  independent. The coupled pair satisfies
  P[X>x, Y>y] = Fbar(x) Gbar(y) (1 + theta F(x) G(y)).

The module provides exact joint excess probabilities (``pair_tail``),
block sampling driven by explicit random streams, and the asymptotic
(in)dependence diagnostics: pairwise and triple ratio curves, the
survival-product constant, and the bivariate slow-variation probe.

Triple and pairwise ratio numerators are estimated by conditional-probability
Monte Carlo: one coordinate is integrated out exactly given the others (its
conditional tail is closed form for every shipped copula). This keeps far
cells resolvable at realistic sample sizes without importance sampling; the
randomness still exercises the joint law, the conditioning step is exact
arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import quad
from scipy.special import ndtr, ndtri

from .errors import ModelValidationError
from .marginals import Marginal
from .montecarlo import MCEstimate, run_parallel
from .rng import RandomStream, StreamKey

_PSD_TOL = -1e-10


class DiagnosticKind(str, Enum):
    PQAI = "PQAI"
    TAI = "TAI"
    GQAI_X = "GQAI_X"
    GQAI_Y = "GQAI_Y"
    GTAI_X = "GTAI_X"
    GTAI_Y = "GTAI_Y"
    SAI_CONST = "SAI_CONST"
    SLOWVAR = "SLOWVAR"
    # curves produced by the weights / classes / sums modules
    ASSUME_A_B = "ASSUME_A_B"
    ASSUME_A_C = "ASSUME_A_C"
    S2_RATIO = "S2_RATIO"
    SUM_CLOSURE = "SUM_CLOSURE"
    PRODUCT_GQAI = "PRODUCT_GQAI"
    PRODUCT_GTAI = "PRODUCT_GTAI"


@dataclass(frozen=True)
class Independence:
    """All n+m variables independent."""


@dataclass(frozen=True, eq=False)
class GaussianCopula:
    """Latent Gaussian copula over all n+m variables."""

    corr: object  # (n+m, n+m) array-like

    def __post_init__(self):
        c = np.array(self.corr, dtype=np.float64)
        if c.ndim != 2 or c.shape[0] != c.shape[1]:
            raise ModelValidationError("correlation matrix must be square")
        if not np.allclose(c, c.T, atol=1e-12):
            raise ModelValidationError("correlation matrix must be symmetric")
        if not np.allclose(np.diag(c), 1.0, atol=1e-12):
            raise ModelValidationError("correlation matrix must have unit diagonal")
        off = c[~np.eye(c.shape[0], dtype=bool)]
        if off.size and np.max(np.abs(off)) >= 1.0:
            raise ModelValidationError(
                "off-diagonal correlations must lie strictly inside (-1,1); "
                "|rho|=1 would create an asymptotically dependent pair"
            )
        w = np.linalg.eigvalsh(c)
        if w.min() < _PSD_TOL:
            raise ModelValidationError(
                "correlation matrix is not positive semidefinite "
                "(min eigenvalue %.3g)" % w.min()
            )
        c.setflags(write=False)
        object.__setattr__(self, "corr", c)

    @property
    def dim(self) -> int:
        return self.corr.shape[0]

    def cholesky(self) -> np.ndarray:
        # tiny jitter keeps semidefinite boundary matrices factorizable
        c = self.corr
        try:
            return np.linalg.cholesky(c)
        except np.linalg.LinAlgError:
            return np.linalg.cholesky(c + 1e-12 * np.eye(c.shape[0]))


@dataclass(frozen=True)
class PairwiseFGM:
    """FGM coupling of (X_i, Y_i) for i < len(thetas); theta_i in [-1, 1]."""

    thetas: Tuple[float, ...]

    def __post_init__(self):
        thetas = tuple(float(t) for t in np.atleast_1d(np.asarray(self.thetas, dtype=np.float64)))
        for t in thetas:
            if not (-1.0 <= t <= 1.0):
                raise ModelValidationError("FGM theta must lie in [-1, 1]")
        object.__setattr__(self, "thetas", thetas)


def _fgm_conditional_inverse(u: np.ndarray, w: np.ndarray, theta: float) -> np.ndarray:
    """Inverse of v -> P[V <= v | U = u] for the FGM copula.

    Solves w = v (1 + a (1 - v)) with a = theta (1 - 2u) via the stable root
    v = 2w / (b + sqrt(b^2 - 4 a w)), b = 1 + a, valid for all a including 0.
    """
    a = theta * (1.0 - 2.0 * u)
    b = 1.0 + a
    disc = b * b - 4.0 * a * w
    return 2.0 * w / (b + np.sqrt(disc))


@dataclass(frozen=True, eq=False)
class JointModel:
    """n x-marginals and m y-marginals joined by one copula."""

    x_marginals: Tuple[Marginal, ...]
    y_marginals: Tuple[Marginal, ...]
    copula: object = field(default_factory=Independence)
    _cond_cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        xs = tuple(self.x_marginals)
        ys = tuple(self.y_marginals)
        if not xs or not ys:
            raise ModelValidationError("both sequences must be non-empty")
        for mspec in xs + ys:
            if not isinstance(mspec, Marginal):
                raise ModelValidationError("marginals must be Marginal instances")
        cop = self.copula
        if isinstance(cop, GaussianCopula):
            if cop.dim != len(xs) + len(ys):
                raise ModelValidationError(
                    "correlation matrix is %dx%d but the model has %d variables"
                    % (cop.dim, cop.dim, len(xs) + len(ys))
                )
        elif isinstance(cop, PairwiseFGM):
            if len(cop.thetas) != min(len(xs), len(ys)):
                raise ModelValidationError(
                    "PairwiseFGM needs exactly min(n,m)=%d thetas, got %d"
                    % (min(len(xs), len(ys)), len(cop.thetas))
                )
        elif not isinstance(cop, Independence):
            raise ModelValidationError("unknown copula type %r" % type(cop).__name__)
        object.__setattr__(self, "x_marginals", xs)
        object.__setattr__(self, "y_marginals", ys)

    @property
    def n(self) -> int:
        return len(self.x_marginals)

    @property
    def m(self) -> int:
        return len(self.y_marginals)

    @property
    def dim(self) -> int:
        return self.n + self.m

    def marginal(self, seq: str, idx: int) -> Marginal:
        seq = seq.lower()
        if seq == "x":
            return self.x_marginals[idx]
        if seq == "y":
            return self.y_marginals[idx]
        raise ValueError("seq must be 'x' or 'y'")

    def _latent_index(self, seq: str, idx: int) -> int:
        n = self.n
        if seq.lower() == "x":
            if not 0 <= idx < n:
                raise ModelValidationError("x index %d out of range" % idx)
            return idx
        if not 0 <= idx < self.m:
            raise ModelValidationError("y index %d out of range" % idx)
        return n + idx

    # -- sampling -------------------------------------------------------
    def sample_block(self, stream: RandomStream, count: int):
        """Draw `count` joint samples.

        Returns (X, Y, latents): X is (n, count), Y is (m, count); latents is
        the copula-level representation used by conditional tails (uniform
        matrix for Independence/FGM, latent normal matrix for Gaussian),
        shape (n+m, count).

        Stream consumption order (part of the determinism contract):
        variable-major, X_1..X_n then Y_1..Y_m, one uniform row each; FGM
        couplings consume their extra uniform within the partner's row slot.
        """
        n, m, d = self.n, self.m, self.dim
        cop = self.copula
        if isinstance(cop, GaussianCopula):
            eps = ndtri(stream.uniforms(d * count).reshape(d, count))
            z = cop.cholesky() @ eps
            u = ndtr(z)
            lat = z
        else:
            u = np.empty((d, count))
            for i in range(n):
                u[i] = stream.uniforms(count)
            if isinstance(cop, PairwiseFGM):
                k = len(cop.thetas)
                for j in range(m):
                    w = stream.uniforms(count)
                    if j < k:
                        u[n + j] = _fgm_conditional_inverse(u[j], w, cop.thetas[j])
                    else:
                        u[n + j] = w
            else:
                for j in range(m):
                    u[n + j] = stream.uniforms(count)
            lat = u
        x = np.empty((n, count))
        y = np.empty((m, count))
        for i in range(n):
            x[i] = self.x_marginals[i].quantile(u[i])
        for j in range(m):
            y[j] = self.y_marginals[j].quantile(u[n + j])
        return x, y, lat

    # -- exact conditional tails (Rao-Blackwellization kernel) ----------
    def _gauss_cond_coeffs(self, g: int):
        cached = self._cond_cache.get(g)
        if cached is None:
            corr = self.copula.corr
            rest = [i for i in range(self.dim) if i != g]
            sub = corr[np.ix_(rest, rest)]
            cross = corr[rest, g]
            w = np.linalg.solve(sub, cross)
            var = max(1.0 - float(cross @ w), 1e-14)
            cached = (np.array(rest), w, np.sqrt(var))
            self._cond_cache[g] = cached
        return cached

    def conditional_tail(self, seq: str, idx: int, t, latents: np.ndarray) -> np.ndarray:
        """P[target > t | every other coordinate], per sample.

        ``t`` may be a scalar or a per-sample array. Exact for every shipped
        copula: constant marginal tail under Independence, the closed-form
        FGM conditional given the partner, and the univariate normal
        conditional given the remaining latents for the Gaussian copula.
        """
        marg = self.marginal(seq, idx)
        g = self._latent_index(seq, idx)
        count = latents.shape[1]
        tail = np.broadcast_to(np.asarray(marg.tail(t), dtype=np.float64), (count,))
        cop = self.copula
        if isinstance(cop, Independence):
            return np.array(tail, dtype=np.float64, copy=True)
        if isinstance(cop, PairwiseFGM):
            n, k = self.n, len(cop.thetas)
            if seq.lower() == "x":
                partner = n + idx if idx < k else None
            else:
                partner = idx if idx < k else None
            if partner is None:
                return np.array(tail, dtype=np.float64, copy=True)
            theta = cop.thetas[idx]
            other_u = latents[partner]
            u = 1.0 - tail  # CDF at the threshold
            return tail * (1.0 - theta * u * (1.0 - 2.0 * other_u))
        # Gaussian: Phi-bar of the standardized conditional threshold
        rest, w, sd = self._gauss_cond_coeffs(g)
        mu = w @ latents[rest]
        with np.errstate(divide="ignore", invalid="ignore"):
            zt = -ndtri(tail)
        zt = np.broadcast_to(zt, (count,))
        out = np.empty(count)
        ok = np.isfinite(zt)
        out[np.isposinf(zt)] = 0.0
        out[np.isneginf(zt)] = 1.0
        out[ok] = ndtr((mu[ok] - zt[ok]) / sd)
        return out


@dataclass(frozen=True)
class DiagnosticCurve:
    """Ratio diagnostic along a threshold grid."""

    kind: DiagnosticKind
    thresholds: tuple
    values: Tuple[Tuple[float, float], ...]  # (estimate, se)
    unresolved: Tuple[bool, ...]

    def __post_init__(self):
        if not (len(self.thresholds) == len(self.values) == len(self.unresolved)):
            raise ModelValidationError("curve field lengths differ")
        pts = [np.atleast_1d(np.asarray(t, dtype=np.float64)) for t in self.thresholds]
        for a, b in zip(pts, pts[1:]):
            if not np.all(b > a):
                raise ModelValidationError(
                    "thresholds must increase strictly componentwise"
                )

    @property
    def estimates(self):
        return tuple(v[0] for v in self.values)

    def final_resolved(self) -> Optional[float]:
        for val, bad in zip(reversed(self.values), reversed(self.unresolved)):
            if not bad:
                return val[0]
        return None


def sample_joint(jm: JointModel, stream: RandomStream):
    """One draw from the joint law: (x-vector length n, y-vector length m)."""
    x, y, _ = jm.sample_block(stream, 1)
    return x[:, 0], y[:, 0]


def _gauss_pair_survival(a: float, b: float, rho: float) -> float:
    """P[Z1 > a, Z2 > b] for standard bivariate normal, |rho| < 1.

    Conditioning on Z1 and integrating with adaptive Gauss-Kronrod
    quadrature to absolute tolerance 1e-12.
    """
    if np.isposinf(a) or np.isposinf(b):
        return 0.0
    if rho == 0.0:
        return float(ndtr(-a) * ndtr(-b))
    s = np.sqrt(1.0 - rho * rho)
    norm = 1.0 / np.sqrt(2.0 * np.pi)

    def integrand(z):
        return norm * np.exp(-0.5 * z * z) * ndtr((rho * z - b) / s)

    lo = a if np.isfinite(a) else -np.inf
    val, _ = quad(integrand, lo, np.inf, epsabs=1e-12, epsrel=1e-10, limit=200)
    return float(min(max(val, 0.0), 1.0))


def pair_tail(jm: JointModel, i: int, j: int, x: float, y: float) -> float:
    """Exact joint excess P[X_i > x, Y_j > y]."""
    if not 0 <= i < jm.n:
        raise ModelValidationError("x index %d out of range" % i)
    if not 0 <= j < jm.m:
        raise ModelValidationError("y index %d out of range" % j)
    fx = jm.x_marginals[i].tail(x)
    gy = jm.y_marginals[j].tail(y)
    cop = jm.copula
    if isinstance(cop, Independence):
        return fx * gy
    if isinstance(cop, PairwiseFGM):
        if i == j and i < len(cop.thetas):
            theta = cop.thetas[i]
            return fx * gy * (1.0 + theta * (1.0 - fx) * (1.0 - gy))
        return fx * gy
    rho = float(cop.corr[i, jm.n + j])
    if rho == 0.0:
        return fx * gy
    with np.errstate(divide="ignore"):
        a = -ndtri(fx) if fx > 0.0 else np.inf
        b = -ndtri(gy) if gy > 0.0 else np.inf
    val = _gauss_pair_survival(float(a), float(b), rho)
    # clip into the Frechet-Hoeffding box to absorb quadrature roundoff
    return float(min(min(fx, gy), max(val, max(0.0, fx + gy - 1.0))))


def pair_tail_vec(jm: JointModel, i: int, j: int, x, y) -> np.ndarray:
    """pair_tail evaluated on aligned arrays of thresholds.

    Closed form (hence cheap) for Independence and FGM; the Gaussian copula
    needs one quadrature per distinct point and falls back to a loop.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    x, y = np.broadcast_arrays(x, y)
    cop = jm.copula
    if isinstance(cop, GaussianCopula):
        flat = [pair_tail(jm, i, j, float(a), float(b))
                for a, b in zip(x.ravel(), y.ravel())]
        return np.array(flat).reshape(x.shape)
    fx = np.asarray(jm.x_marginals[i].tail(x), dtype=np.float64)
    gy = np.asarray(jm.y_marginals[j].tail(y), dtype=np.float64)
    if isinstance(cop, PairwiseFGM) and i == j and i < len(cop.thetas):
        theta = cop.thetas[i]
        return fx * gy * (1.0 + theta * (1.0 - fx) * (1.0 - gy))
    return fx * gy


def log_pair_tail(jm: JointModel, i: int, j: int, x: float, y: float) -> float:
    """ln pair_tail, usable far beyond float64 tail underflow (FGM/Indep)."""
    cop = jm.copula
    if isinstance(cop, GaussianCopula):
        p = pair_tail(jm, i, j, x, y)
        if p <= 0.0:
            raise ModelValidationError(
                "Gaussian pair tail underflowed; log-scale ladder not available"
            )
        return float(np.log(p))
    lf = jm.x_marginals[i].log_tail(x)
    lg = jm.y_marginals[j].log_tail(y)
    if isinstance(cop, PairwiseFGM) and i == j and i < len(cop.thetas):
        theta = cop.thetas[i]
        fx = -np.expm1(lf)  # CDF values, exact near 1
        gy = -np.expm1(lg)
        corr = 1.0 + theta * fx * gy
        if corr <= 0.0:
            return -np.inf
        return float(lf + lg + np.log(corr))
    return float(lf + lg)


# ---------------------------------------------------------------------------
# diagnostics


def _curve(kind, thresholds, ests):
    values = tuple((e.mean, e.se) for e in ests)
    unresolved = tuple(e.unresolved for e in ests)
    return DiagnosticCurve(kind, tuple(thresholds), values, unresolved)


def _rb_joint_estimate(
    jm: JointModel,
    indicator_vars,              # list of (seq, idx, threshold, use_abs)
    rb_var,                      # (seq, idx, threshold) integrated out exactly
    n_samples: int,
    key: StreamKey,
    workers: int,
) -> MCEstimate:
    """E[prod indicators * P[rb_var beyond its threshold | rest]]."""

    def task(stream, count):
        x, y, lat = jm.sample_block(stream, count)
        acc = np.ones(count, dtype=bool)
        for seq, idx, thr, use_abs in indicator_vars:
            v = x[idx] if seq == "x" else y[idx]
            acc &= (np.abs(v) > thr) if use_abs else (v > thr)
        seq, idx, thr = rb_var
        mult = jm.conditional_tail(seq, idx, thr, lat)
        vals = np.where(acc, mult, 0.0)
        return np.array([vals.sum()]), np.array([(vals * vals).sum()])

    return run_parallel(task, n_samples, key, workers)[0]


def _ratio_est(num: MCEstimate, den: float) -> MCEstimate:
    if den <= 0.0:
        return MCEstimate(np.nan, np.nan, num.n, True)
    return num.scaled(1.0 / den)


def pair_diagnostic(
    jm: JointModel,
    kind,
    seq: str,
    i: int,
    k: int,
    probe,
    n_samples: int,
    key: StreamKey,
    workers: int = 1,
) -> DiagnosticCurve:
    """Pairwise asymptotic-independence ratio curves.

    PQAI: P[|V_i|>x, V_k>x] / (Fbar_i(x) + Fbar_k(x)), one shared threshold
    per level (the larger of the two marginal quantiles).
    TAI:  P[|V_i|>x_i | V_k>x_k], per-variable thresholds.
    """
    kind = DiagnosticKind(kind)
    if kind not in (DiagnosticKind.PQAI, DiagnosticKind.TAI):
        raise ModelValidationError("pair_diagnostic kind must be PQAI or TAI")
    if i == k:
        raise ModelValidationError("need two distinct indices")
    mi, mk = jm.marginal(seq, i), jm.marginal(seq, k)
    thresholds, ests = [], []
    for cell, level in enumerate(probe.quantile_levels):
        sub = key.child(cell)
        if kind is DiagnosticKind.PQAI:
            thr = max(mi.quantile(level), mk.quantile(level))
            num = _rb_joint_estimate(
                jm, [(seq, i, thr, True)], (seq, k, thr), n_samples, sub, workers
            )
            den = mi.tail(thr) + mk.tail(thr)
            thresholds.append(thr)
        else:
            xi, xk = mi.quantile(level), mk.quantile(level)
            num = _rb_joint_estimate(
                jm, [(seq, i, xi, True)], (seq, k, xk), n_samples, sub, workers
            )
            den = mk.tail(xk)
            thresholds.append((xi, xk))
        ests.append(_ratio_est(num, den))
    return _curve(kind, thresholds, ests)


def triple_diagnostic(
    jm: JointModel,
    kind,
    indices,
    probe,
    n_samples: int,
    key: StreamKey,
    workers: int = 1,
) -> DiagnosticCurve:
    """Three-variable asymptotic-independence ratio curves.

    indices = (i, k, j): i and k index the named sequence, j the other one.
    GQAI_*: P[|V_i|>x, V_k>x, W_j>y] / (pair(i,j) + pair(k,j)), shared x.
    GTAI_*: P[|V_i|>x_i | V_k>x_k, W_j>y_j].
    """
    kind = DiagnosticKind(kind)
    if kind not in (
        DiagnosticKind.GQAI_X,
        DiagnosticKind.GQAI_Y,
        DiagnosticKind.GTAI_X,
        DiagnosticKind.GTAI_Y,
    ):
        raise ModelValidationError("triple_diagnostic kind invalid")
    i, k, j = indices
    if i == k:
        raise ModelValidationError("need two distinct in-sequence indices")
    own = "x" if kind in (DiagnosticKind.GQAI_X, DiagnosticKind.GTAI_X) else "y"
    other = "y" if own == "x" else "x"
    mi, mk = jm.marginal(own, i), jm.marginal(own, k)
    mj = jm.marginal(other, j)

    def cross_pair(a_idx: int, a_thr: float, b_thr: float) -> float:
        # pair_tail is declared for (x-index, y-index); orient accordingly
        if own == "x":
            return pair_tail(jm, a_idx, j, a_thr, b_thr)
        return pair_tail(jm, j, a_idx, b_thr, a_thr)

    thresholds, ests = [], []
    for cell, level in enumerate(probe.quantile_levels):
        sub = key.child(cell)
        yj = mj.quantile(level)
        if kind in (DiagnosticKind.GQAI_X, DiagnosticKind.GQAI_Y):
            thr = max(mi.quantile(level), mk.quantile(level))
            num = _rb_joint_estimate(
                jm,
                [(own, i, thr, True), (other, j, yj, False)],
                (own, k, thr),
                n_samples,
                sub,
                workers,
            )
            den = cross_pair(i, thr, yj) + cross_pair(k, thr, yj)
            thresholds.append((thr, yj))
        else:
            xi, xk = mi.quantile(level), mk.quantile(level)
            num = _rb_joint_estimate(
                jm,
                [(own, i, xi, True), (other, j, yj, False)],
                (own, k, xk),
                n_samples,
                sub,
                workers,
            )
            den = cross_pair(k, xk, yj)
            thresholds.append((xi, xk, yj))
        ests.append(_ratio_est(num, den))
    return _curve(kind, thresholds, ests)


def sai_constant(jm: JointModel, i: int, j: int, probe, n_samples: int = 0,
                 key: Optional[StreamKey] = None) -> DiagnosticCurve:
    """Curve of pair_tail(x,y) / (Fbar_i(x) Gbar_j(y)); exact, se = 0."""
    mi, mj = jm.x_marginals[i], jm.y_marginals[j]
    thresholds, values, unresolved = [], [], []
    for level in probe.quantile_levels:
        x, y = mi.quantile(level), mj.quantile(level)
        den = mi.tail(x) * mj.tail(y)
        if den <= 0.0:
            values.append((np.nan, 0.0))
            unresolved.append(True)
        else:
            values.append((pair_tail(jm, i, j, x, y) / den, 0.0))
            unresolved.append(False)
        thresholds.append((x, y))
    return DiagnosticCurve(DiagnosticKind.SAI_CONST, tuple(thresholds),
                           tuple(values), tuple(unresolved))


def slow_variation_probe(jm: JointModel, i: int, j: int, t, probe,
                         n_samples: int = 0,
                         key: Optional[StreamKey] = None) -> DiagnosticCurve:
    """Curve of f(t1 x, t2 y)/f(x, y) with f(x,y) = pair_tail/(Fbar Gbar)."""
    t1, t2 = float(t[0]), float(t[1])
    if t1 <= 0.0 or t2 <= 0.0:
        raise ModelValidationError("scale factors must be positive")
    mi, mj = jm.x_marginals[i], jm.y_marginals[j]

    def f(x, y):
        den = mi.tail(x) * mj.tail(y)
        return pair_tail(jm, i, j, x, y) / den if den > 0.0 else np.nan

    thresholds, values, unresolved = [], [], []
    for level in probe.quantile_levels:
        x, y = mi.quantile(level), mj.quantile(level)
        base, scaled = f(x, y), f(t1 * x, t2 * y)
        bad = not (np.isfinite(base) and np.isfinite(scaled) and base > 0.0)
        values.append((np.nan if bad else scaled / base, 0.0))
        unresolved.append(bad)
        thresholds.append((x, y))
    return DiagnosticCurve(DiagnosticKind.SLOWVAR, tuple(thresholds),
                           tuple(values), tuple(unresolved))
