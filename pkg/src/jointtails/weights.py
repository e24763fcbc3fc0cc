"""Nonnegative random weight vectors, independent of the main variables.

A :class:`WeightModel` is a list of per-weight specs for (Theta_1..Theta_n,
Delta_1..Delta_m) plus a coupling:

* ``IndependentWeights``: each non-degenerate weight gets its own uniform.
* ``Comonotone``: every weight is a monotone (quantile) transform of one
  shared uniform draw, so all weights move together.

Shipped specs: ``Degenerate(c)``, ``UniformWeight(a, b]``,
``LognormalWeight(mu, sigma)`` and ``Bernoulli(p, c)`` (value c with
probability p, zero otherwise).

Besides sampling, the module computes mixed moments E[Theta_i^a1 Delta_j^a2]
(closed form where available, deterministic quadrature for lognormal
couplings, Monte Carlo on request), the exact weighted-pair term
E[pair_tail(x/Theta_i, y/Delta_j)] used by the weighted-sum predictor, and
the tail-comparison curves behind the discounted-sum regularity condition:
the weight tail P[Theta > x^kappa] must be negligible against the weighted
joint excess for the discount-factor theorems to apply.

Stream-consumption contract (load-bearing for reproducibility): weights are
drawn after the main vector; Degenerate specs consume no randomness;
Comonotone coupling consumes exactly one uniform when any weight is random.
This makes all-Degenerate weight models bitwise-invisible to downstream
samplers.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy.integrate import quad
from scipy.special import ndtr, ndtri

from .dependence import DiagnosticCurve, DiagnosticKind, JointModel, pair_tail, pair_tail_vec
from .errors import InfiniteMomentError, ModelValidationError
from .montecarlo import MCEstimate, run_parallel
from .rng import RandomStream, StreamKey

# coupling tags (string-valued for YAML friendliness)
IndependentWeights = "IndependentWeights"
Comonotone = "Comonotone"
_COUPLINGS = (IndependentWeights, Comonotone)


@dataclass(frozen=True)
class Degenerate:
    """Constant weight c >= 0. Consumes no randomness."""

    c: float

    def __post_init__(self):
        if not (self.c >= 0.0):
            raise ModelValidationError("Degenerate weight needs c >= 0")

    def quantile(self, u):
        return np.broadcast_to(np.float64(self.c), np.shape(u)).copy() \
            if np.ndim(u) else float(self.c)

    def tail(self, t):
        t = np.asarray(t, dtype=np.float64)
        out = np.where(t < self.c, 1.0, 0.0)
        return float(out) if out.ndim == 0 else out

    def moment(self, a: float) -> float:
        if self.c == 0.0 and a < 0.0:
            raise InfiniteMomentError(
                "Degenerate(0) has infinite moment of order %g" % a)
        return float(self.c ** a) if self.c > 0.0 else (1.0 if a == 0.0 else 0.0)

    def moment_is_finite(self, a: float) -> bool:
        return self.c > 0.0 or a >= 0.0

    @property
    def upper(self) -> float:
        return float(self.c)

    @property
    def zero_mass(self) -> float:
        return 1.0 if self.c == 0.0 else 0.0

    @property
    def random(self) -> bool:
        return False


@dataclass(frozen=True)
class UniformWeight:
    """Uniform on (a, b], 0 <= a < b."""

    a: float
    b: float

    def __post_init__(self):
        if not (0.0 <= self.a < self.b):
            raise ModelValidationError("UniformWeight needs 0 <= a < b")

    def quantile(self, u):
        return self.a + (self.b - self.a) * np.asarray(u, dtype=np.float64)

    def tail(self, t):
        t = np.asarray(t, dtype=np.float64)
        out = np.clip((self.b - t) / (self.b - self.a), 0.0, 1.0)
        return float(out) if out.ndim == 0 else out

    def moment(self, p: float) -> float:
        if not self.moment_is_finite(p):
            raise InfiniteMomentError(
                "Uniform(%g,%g] has infinite moment of order %g" % (self.a, self.b, p))
        if p == -1.0:
            return float(np.log(self.b / self.a) / (self.b - self.a))
        return float((self.b ** (p + 1.0) - self.a ** (p + 1.0))
                     / ((p + 1.0) * (self.b - self.a)))

    def moment_is_finite(self, p: float) -> bool:
        return self.a > 0.0 or p > -1.0

    @property
    def upper(self) -> float:
        return float(self.b)

    @property
    def zero_mass(self) -> float:
        return 0.0

    @property
    def random(self) -> bool:
        return True


@dataclass(frozen=True)
class LognormalWeight:
    """Lognormal weight: exp(mu + sigma Z)."""

    mu: float
    sigma: float

    def __post_init__(self):
        if not (self.sigma > 0.0):
            raise ModelValidationError("LognormalWeight needs sigma > 0")

    def quantile(self, u):
        return np.exp(self.mu + self.sigma * ndtri(np.asarray(u, dtype=np.float64)))

    def tail(self, t):
        t = np.asarray(t, dtype=np.float64)
        out = np.ones_like(t)
        pos = t > 0.0
        z = (np.log(t, where=pos, out=np.full_like(t, -np.inf)) - self.mu) / self.sigma
        out = np.where(pos, ndtr(-z), 1.0)
        return float(out) if out.ndim == 0 else out

    def moment(self, p: float) -> float:
        return float(np.exp(p * self.mu + 0.5 * (p * self.sigma) ** 2))

    def moment_is_finite(self, p: float) -> bool:
        return True

    @property
    def upper(self) -> float:
        return np.inf

    @property
    def zero_mass(self) -> float:
        return 0.0

    @property
    def random(self) -> bool:
        return True


@dataclass(frozen=True)
class Bernoulli:
    """Weight equal to c > 0 with probability p in (0,1], else zero."""

    p: float
    c: float = 1.0

    def __post_init__(self):
        if not (0.0 < self.p <= 1.0):
            raise ModelValidationError("Bernoulli weight needs p in (0, 1]")
        if not (self.c > 0.0):
            raise ModelValidationError("Bernoulli weight needs c > 0")

    def quantile(self, u):
        return np.where(np.asarray(u, dtype=np.float64) > 1.0 - self.p, self.c, 0.0)

    def tail(self, t):
        t = np.asarray(t, dtype=np.float64)
        out = np.where(t < 0.0, 1.0, np.where(t < self.c, self.p, 0.0))
        return float(out) if out.ndim == 0 else out

    def moment(self, a: float) -> float:
        if not self.moment_is_finite(a):
            raise InfiniteMomentError(
                "Bernoulli(p=%g) with an atom at zero has infinite moment of order %g"
                % (self.p, a))
        if a == 0.0:
            return 1.0
        return float(self.p * self.c ** a)

    def moment_is_finite(self, a: float) -> bool:
        return a >= 0.0 or self.p == 1.0

    @property
    def upper(self) -> float:
        return float(self.c)

    @property
    def zero_mass(self) -> float:
        return float(1.0 - self.p)

    @property
    def random(self) -> bool:
        return self.p < 1.0

    def atoms(self):
        """(value, probability) support points."""
        if self.p < 1.0:
            return ((0.0, 1.0 - self.p), (self.c, self.p))
        return ((self.c, 1.0),)


_SPEC_TYPES = (Degenerate, UniformWeight, LognormalWeight, Bernoulli)


@dataclass(frozen=True)
class ProbeFunctions:
    """Power-law comparison functions b(x)=x^kb, c(y)=y^kc, a(x)=x^ka.

    Exponents live in (0,1) so each function grows without bound while
    staying o(x), the regime the tail-comparison conditions require.
    """

    kappa_b: float = 0.5
    kappa_c: float = 0.5
    kappa_a: float = 0.5

    def __post_init__(self):
        for name in ("kappa_b", "kappa_c", "kappa_a"):
            v = getattr(self, name)
            if not (0.0 < v < 1.0):
                raise ModelValidationError("%s must lie in (0, 1)" % name)

    def b(self, x):
        return np.asarray(x, dtype=np.float64) ** self.kappa_b

    def c(self, y):
        return np.asarray(y, dtype=np.float64) ** self.kappa_c

    def a(self, x):
        return np.asarray(x, dtype=np.float64) ** self.kappa_a


@dataclass(frozen=True)
class WeightModel:
    """Joint law of (Theta_1..Theta_n, Delta_1..Delta_m)."""

    thetas: Tuple[object, ...]
    deltas: Tuple[object, ...]
    coupling: str = "IndependentWeights"

    def __post_init__(self):
        thetas = tuple(self.thetas)
        deltas = tuple(self.deltas)
        if not thetas or not deltas:
            raise ModelValidationError("need at least one weight per side")
        for side, specs in (("theta", thetas), ("delta", deltas)):
            for pos, s in enumerate(specs):
                if not isinstance(s, _SPEC_TYPES):
                    raise ModelValidationError(
                        "%s[%d] is not a weight spec" % (side, pos))
                if isinstance(s, Degenerate) and s.c == 0.0:
                    raise ModelValidationError(
                        "%s[%d] is degenerate at zero; every weight needs P[w>0] > 0"
                        % (side, pos))
        if self.coupling not in _COUPLINGS:
            raise ModelValidationError(
                "coupling must be one of %s" % (_COUPLINGS,))
        object.__setattr__(self, "thetas", thetas)
        object.__setattr__(self, "deltas", deltas)

    @property
    def n(self) -> int:
        return len(self.thetas)

    @property
    def m(self) -> int:
        return len(self.deltas)

    @property
    def all_degenerate(self) -> bool:
        return all(not s.random for s in self.thetas + self.deltas)

    def spec(self, side: str, idx: int):
        if side == "theta":
            return self.thetas[idx]
        if side == "delta":
            return self.deltas[idx]
        raise ValueError("side must be 'theta' or 'delta'")

    def sample_block(self, stream: RandomStream, count: int):
        """(TH, DL): arrays (n, count) and (m, count).

        Comonotone: one shared uniform row pushed through every quantile.
        Independent: one uniform row per random (non-Degenerate) weight,
        theta side first. Degenerate weights consume nothing.
        """
        n, m = self.n, self.m
        th = np.empty((n, count))
        dl = np.empty((m, count))
        if self.coupling == "Comonotone":
            shared = stream.uniforms(count) if not self.all_degenerate else None
            for i, s in enumerate(self.thetas):
                th[i] = s.quantile(shared) if s.random else s.c
            for j, s in enumerate(self.deltas):
                dl[j] = s.quantile(shared) if s.random else s.c
        else:
            for i, s in enumerate(self.thetas):
                th[i] = s.quantile(stream.uniforms(count)) if s.random else s.c
            for j, s in enumerate(self.deltas):
                dl[j] = s.quantile(stream.uniforms(count)) if s.random else s.c
        return th, dl


def sample_weights(wm: WeightModel, stream: RandomStream):
    """One draw: (theta-vector length n, delta-vector length m)."""
    th, dl = wm.sample_block(stream, 1)
    return th[:, 0], dl[:, 0]


# ---------------------------------------------------------------------------
# moments


def _is_atomic(s) -> bool:
    return isinstance(s, (Degenerate, Bernoulli))


def _atoms(s):
    if isinstance(s, Degenerate):
        return ((s.c, 1.0),)
    return s.atoms()


def _pow0(v: float, a: float) -> float:
    # 0^a = 0 for a > 0; the a <= 0 cases are screened out beforehand
    return 0.0 if v == 0.0 else float(v ** a)


def _check_finite(spec, a: float, label: str):
    if not spec.moment_is_finite(a):
        raise InfiniteMomentError(
            "%s (%r) has infinite moment of order %g" % (label, spec, a))


def _comonotone_moment(s1, s2, a1: float, a2: float) -> Optional[float]:
    """Closed-form E[q1(U)^a1 q2(U)^a2] where available, else None."""
    if isinstance(s1, Degenerate):
        return _pow0(s1.c, a1) * s2.moment(a2)
    if isinstance(s2, Degenerate):
        return s1.moment(a1) * _pow0(s2.c, a2)
    if isinstance(s1, Bernoulli) and isinstance(s2, Bernoulli):
        # both step functions of the shared uniform
        return _pow0(s1.c, a1) * _pow0(s2.c, a2) * min(s1.p, s2.p)
    if isinstance(s1, Bernoulli) or isinstance(s2, Bernoulli):
        bern, other, ab, ao = (
            (s1, s2, a1, a2) if isinstance(s1, Bernoulli) else (s2, s1, a2, a1))
        # other's contribution restricted to u > 1 - p
        if isinstance(other, UniformWeight):
            lo = other.quantile(1.0 - bern.p)
            hi = other.b
            val = (hi ** (ao + 1.0) - lo ** (ao + 1.0)) / (
                (ao + 1.0) * (other.b - other.a)) if ao != -1.0 else \
                np.log(hi / lo) / (other.b - other.a)
            return _pow0(bern.c, ab) * float(val)
        if isinstance(other, LognormalWeight):
            z = ndtri(1.0 - bern.p)
            return _pow0(bern.c, ab) * other.moment(ao) * float(
                ndtr(-(z - ao * other.sigma)))
        return None
    if isinstance(s1, LognormalWeight) and isinstance(s2, LognormalWeight):
        mu = a1 * s1.mu + a2 * s2.mu
        sd = a1 * s1.sigma + a2 * s2.sigma
        return float(np.exp(mu + 0.5 * sd * sd))
    if isinstance(s1, UniformWeight) and isinstance(s2, UniformWeight) \
            and s1.a == 0.0 and s2.a == 0.0:
        return float(s1.b ** a1 * s2.b ** a2 / (a1 + a2 + 1.0))
    return None


def mixed_moment(wm: WeightModel, i: int, j: int, a1: float, a2: float,
                 method: str = "auto", n_samples: int = 1_000_000,
                 key: Optional[StreamKey] = None):
    """E[Theta_i^a1 Delta_j^a2].

    method="auto" prefers closed forms, then deterministic quadrature over
    the shared uniform (rel tol 1e-10). method="mc" forces Monte Carlo and
    returns an MCEstimate with its standard error; a key is required.
    Infinite-moment requests fail loudly, naming the offending weight.
    """
    s1, s2 = wm.thetas[i], wm.deltas[j]
    _check_finite(s1, a1, "theta[%d]" % i)
    _check_finite(s2, a2, "delta[%d]" % j)
    if method == "mc":
        if key is None:
            raise ValueError("method='mc' needs a stream key")

        def task(stream, count):
            th, dl = wm.sample_block(stream, count)
            with np.errstate(divide="ignore"):
                vals = np.where(th[i] > 0.0, th[i], 1.0) ** a1 \
                    * np.where(dl[j] > 0.0, dl[j], 1.0) ** a2
                vals = np.where((th[i] == 0.0) | (dl[j] == 0.0), 0.0, vals)
            return np.array([vals.sum()]), np.array([(vals * vals).sum()])

        return run_parallel(task, n_samples, key)[0]
    if method != "auto":
        raise ValueError("method must be 'auto' or 'mc'")
    if wm.coupling == "IndependentWeights":
        return s1.moment(a1) * s2.moment(a2)
    closed = _comonotone_moment(s1, s2, a1, a2)
    if closed is not None:
        return closed

    def integrand(u):
        v1 = float(np.asarray(s1.quantile(u)))
        v2 = float(np.asarray(s2.quantile(u)))
        if v1 == 0.0 or v2 == 0.0:
            return 0.0
        return v1 ** a1 * v2 ** a2

    pts = sorted({1.0 - s.p for s in (s1, s2) if isinstance(s, Bernoulli)})
    val, _ = quad(integrand, 0.0, 1.0, epsabs=0.0, epsrel=1e-10,
                  limit=400, points=pts or None)
    return float(val)


# ---------------------------------------------------------------------------
# weighted joint excess E[pair_tail(x / Theta_i, y / Delta_j)]


def _scaled_threshold(x: float, w):
    w = np.asarray(w, dtype=np.float64)
    with np.errstate(divide="ignore"):
        out = np.where(w > 0.0, x / np.where(w > 0.0, w, 1.0), np.inf)
    return float(out) if out.ndim == 0 else out


def weighted_pair_term(jm: JointModel, wm: WeightModel, i: int, j: int,
                       x: float, y: float, n_samples: int = 1_000_000,
                       key: Optional[StreamKey] = None,
                       workers: int = 1) -> Tuple[float, float]:
    """(value, se) for E[pair_tail(x/Theta_i, y/Delta_j)].

    Exact enumeration when both weights are atomic; deterministic quadrature
    (rel tol 1e-8, se=0) when no lognormal weight is involved; Monte Carlo
    over the weight pair with exact inner pair tails otherwise. Weight mass
    at zero enters through pair_tail(+inf, .) = 0.
    """
    s1, s2 = wm.thetas[i], wm.deltas[j]

    def pt(th_val: float, dl_val: float) -> float:
        if th_val == 0.0 or dl_val == 0.0:
            return 0.0
        return pair_tail(jm, i, j, x / th_val, y / dl_val)

    if _is_atomic(s1) and _is_atomic(s2):
        total = 0.0
        if wm.coupling == "Comonotone":
            # shared uniform: atoms align on u-intervals
            cuts = sorted({0.0, 1.0, *(1.0 - s.p for s in (s1, s2)
                                       if isinstance(s, Bernoulli))})
            for lo, hi in zip(cuts, cuts[1:]):
                mid = 0.5 * (lo + hi)
                total += (hi - lo) * pt(float(np.asarray(s1.quantile(mid))),
                                        float(np.asarray(s2.quantile(mid))))
        else:
            for v1, p1 in _atoms(s1):
                for v2, p2 in _atoms(s2):
                    total += p1 * p2 * pt(v1, v2)
        return total, 0.0

    has_ln = isinstance(s1, LognormalWeight) or isinstance(s2, LognormalWeight)
    if not has_ln:
        if wm.coupling == "Comonotone":
            def integrand(u):
                return pt(float(np.asarray(s1.quantile(u))),
                          float(np.asarray(s2.quantile(u))))

            pts = sorted({1.0 - s.p for s in (s1, s2) if isinstance(s, Bernoulli)})
            val, _ = quad(integrand, 0.0, 1.0, epsabs=0.0, epsrel=1e-8,
                          limit=400, points=pts or None)
            return float(val), 0.0
        # independent: integrate the random coordinate(s), enumerate atoms
        if _is_atomic(s1) or _is_atomic(s2):
            atom, unif, atom_first = (
                (s1, s2, True) if _is_atomic(s1) else (s2, s1, False))
            total = 0.0
            for v, p in _atoms(atom):
                if v == 0.0:
                    continue

                def integrand(u, v=v):
                    w = float(np.asarray(unif.quantile(u)))
                    return pt(v, w) if atom_first else pt(w, v)

                part, _ = quad(integrand, 0.0, 1.0, epsabs=0.0,
                               epsrel=1e-8, limit=400)
                total += p * part
            return float(total), 0.0

        def outer(u1):
            def inner(u2):
                return pt(float(np.asarray(s1.quantile(u1))),
                          float(np.asarray(s2.quantile(u2))))
            val, _ = quad(inner, 0.0, 1.0, epsabs=0.0, epsrel=1e-8, limit=200)
            return val

        val, _ = quad(outer, 0.0, 1.0, epsabs=0.0, epsrel=1e-8, limit=200)
        return float(val), 0.0

    if key is None:
        raise ValueError("lognormal weights need Monte Carlo: pass a stream key")

    def task(stream, count):
        th, dl = wm.sample_block(stream, count)
        xt = _scaled_threshold(x, th[i])
        yt = _scaled_threshold(y, dl[j])
        vals = pair_tail_vec(jm, i, j, xt, yt)
        return np.array([vals.sum()]), np.array([(vals * vals).sum()])

    est = run_parallel(task, n_samples, key, workers)[0]
    return float(est.mean), float(est.se)


def assumption_a_check(wm: WeightModel, jm: JointModel, pf: ProbeFunctions,
                       probe, n_samples: int, key: StreamKey,
                       side: str = "theta", i: int = 0, j: int = 0,
                       workers: int = 1) -> DiagnosticCurve:
    """Weight-tail negligibility curve for the discounted-sum condition.

    side="theta": P[Theta_i > b(x)] / E[pair_tail(x/Theta_i, y/Delta_j)]
    side="delta": P[Delta_j > c(y)] / (same denominator)
    along the probe's quantile grid with x, y the per-level marginal
    quantiles. Numerators are exact; the denominator is the weighted pair
    term above (exact or conditionally-exact Monte Carlo). Levels whose
    denominator cannot be resolved are flagged unresolved.
    """
    if side not in ("theta", "delta"):
        raise ValueError("side must be 'theta' or 'delta'")
    kind = DiagnosticKind.ASSUME_A_B if side == "theta" else DiagnosticKind.ASSUME_A_C
    mi, mj = jm.x_marginals[i], jm.y_marginals[j]
    thresholds, values, unresolved = [], [], []
    for cell, level in enumerate(probe.quantile_levels):
        x, y = mi.quantile(level), mj.quantile(level)
        if side == "theta":
            num = float(wm.thetas[i].tail(float(pf.b(x))))
        else:
            num = float(wm.deltas[j].tail(float(pf.c(y))))
        den, se = weighted_pair_term(jm, wm, i, j, x, y, n_samples,
                                     key.child(cell), workers)
        thresholds.append((x, y))
        if den <= 0.0:
            if num == 0.0:
                # Remark-style bounded-weight case: exact zero numerator
                values.append((0.0, 0.0))
                unresolved.append(False)
            else:
                values.append((np.nan, np.nan))
                unresolved.append(True)
        else:
            ratio = num / den
            values.append((ratio, (se / den) * ratio if se else 0.0))
            unresolved.append(False)
    return DiagnosticCurve(kind, tuple(thresholds), tuple(values),
                           tuple(unresolved))
