"""Scenario files: one YAML document drives a whole experiment suite.

Grammar (YAML, nested key-value):

    schema_version: 1            # required, currently always 1
    seed: 2026                   # stream seed, non-negative integer
    n_samples: 1000000           # default sample count per experiment
    marginals_x:                 # one entry per x-variable, required
      - {kind: pareto, alpha: 2.0, scale: 1.0}
      - {kind: lognormal, mu: 0.0, sigma: 1.0}
      - {kind: heavy_weibull, shape: 0.5, scale: 1.0}
      - {kind: exponential, rate: 1.0}
    marginals_y: [...]           # same forms, required
    copula:                      # optional, default independence
      kind: independence | gaussian | fgm
      corr: [[1.0, 0.5], [0.5, 1.0]]   # gaussian: (n+m) x (n+m)
      thetas: [1.0]                    # fgm: min(n, m) entries
    weights:                     # optional, default Degenerate(1) everywhere
      coupling: independent | comonotone
      thetas:                    # n entries
        - {kind: degenerate, c: 1.0}
        - {kind: uniform, a: 0.0, b: 1.0}
        - {kind: lognormal, mu: 0.0, sigma: 1.0}
        - {kind: bernoulli, p: 0.5, c: 2.0}
      deltas: [...]              # m entries
    probe:                       # optional threshold ladder, all lists optional
      quantile_levels: [0.9, 0.99, 0.999, 0.9999]
      scale_factors: [2.0, 4.0, 8.0]
      shift_values: [1.0, 2.0]
      z_levels: [0.5, 0.8, 0.9, 0.95, 0.99]
    experiments:                 # may be empty
      - kind: maxsum
        predictor: S_PLAIN | S_WEIGHTED | S_BREIMAN
        band: 0.15               # optional |ratio-1| acceptance half-width
      - kind: class_report_1d
        side: x, index: 0        # optional eps, cap, expect: {L: consistent-with, ...}
      - kind: class_report_2d
        i: 0, j: 0               # optional eps, cap, expect
      - kind: matuszewska
        side: x, index: 0        # optional cap, expect: {j_minus: [lo,hi], j_plus: [lo,hi] | above-cap}
      - kind: dependence
        diagnostic: PQAI | TAI | GQAI_X | GQAI_Y | GTAI_X | GTAI_Y | SAI_CONST | SLOWVAR
        seq: x, i: 0, k: 1       # pairwise forms
        indices: [0, 1, 0]       # triple forms (i, k, j)
        i: 0, j: 0, t: [2.0, 2.0]  # SAI_CONST / SLOWVAR
      - kind: assumption_a
        side: theta | delta, i: 0, j: 0
        kappa: {b: 0.5, c: 0.5, a: 0.5}
      - kind: sum_closure
        seq: x, i: 0, k: 1, scale_factor: 2.0
      - kind: product_dependence
        flavor: GQAI | GTAI, indices: [0, 1, 0]
      - kind: ruin
        horizon: 4               # must equal both model dimensions
        surplus_grid: [[31.6, 100.0], [56.2, 215.4]]
        predictor: S_WEIGHTED    # optional
      - kind: s2_ratio
        i: 0, j: 0
      - kind: mixture_closure
        p: 0.5                   # mixing weight of this scenario's (0,0) pair
        second: {marginals_x: [...], marginals_y: [...], copula: {...}}
    outputs:
      dir: out                   # optional report directory

    # Every experiment also accepts n_samples (overrides the top-level
    # count) and, where a ratio curve is produced, band as
    # {below: B} or {target: T, tol: E} or {lo: L, hi: H}.

Parsing validates everything and reports every violation at once, each
tagged with its location. ``canonical_form`` serializes a parsed scenario
back to text with sorted keys and materialized defaults; parse ->
serialize -> parse is the identity on valid scenarios, and the SHA-256 of
the canonical text is the scenario hash stamped into every report.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
import yaml

from .dependence import (
    DiagnosticKind,
    GaussianCopula,
    Independence,
    JointModel,
    PairwiseFGM,
)
from .errors import ModelValidationError, ScenarioError
from .marginals import Exponential, HeavyWeibull, Lognormal, Marginal, Pareto
from .sums import PredictorKind
from .tail_classes import RatioProbe
from .weights import (
    Bernoulli,
    Comonotone,
    Degenerate,
    IndependentWeights,
    LognormalWeight,
    UniformWeight,
    WeightModel,
)

SCHEMA_VERSION = 1

EXPERIMENT_KINDS = (
    "class_report_1d", "class_report_2d", "matuszewska", "dependence",
    "assumption_a", "maxsum", "sum_closure", "product_dependence", "ruin",
    "s2_ratio", "mixture_closure",
)

_VERDICT_VALUES = ("consistent-with", "inconsistent-with", "unresolved")

_PAIR_DIAGNOSTICS = ("PQAI", "TAI")
_TRIPLE_DIAGNOSTICS = ("GQAI_X", "GQAI_Y", "GTAI_X", "GTAI_Y")
_EXACT_DIAGNOSTICS = ("SAI_CONST", "SLOWVAR")


class _Collector:
    """Accumulates violation strings; never raises until the end."""

    def __init__(self):
        self.violations = []

    def err(self, msg: str, loc: Optional[str] = None):
        where = "at top level" if loc is None else "in " + loc
        self.violations.append("%s %s" % (msg, where))

    def raise_if_any(self):
        if self.violations:
            raise ScenarioError(self.violations)


def _is_num(v) -> bool:
    return isinstance(v, (int, float, np.integer, np.floating)) \
        and not isinstance(v, bool)


def _is_int(v) -> bool:
    return isinstance(v, (int, np.integer)) and not isinstance(v, bool)


def _check_fields(col, node, loc, required, optional) -> bool:
    """Unknown / missing field sweep; returns False when node unusable."""
    if not isinstance(node, dict):
        col.err("expected a mapping", loc)
        return False
    for k in node:
        if k not in required and k not in optional:
            col.err("unknown field '%s'" % k, loc)
    ok = True
    for k in required:
        if k not in node:
            col.err("missing required field '%s'" % k, loc)
            ok = False
    return ok


def _num_field(col, node, name, loc, default=None, required=False,
               integer=False, minimum=None, maximum=None,
               strict_min=None, strict_max=None):
    if name not in node:
        if required:
            return None
        return default
    v = node[name]
    if integer and not _is_int(v):
        col.err("field '%s' must be an integer" % name, loc)
        return None
    if not _is_num(v):
        col.err("field '%s' must be a number" % name, loc)
        return None
    v = int(v) if integer else float(v)
    if minimum is not None and v < minimum:
        col.err("field '%s' must be >= %g" % (name, minimum), loc)
        return None
    if maximum is not None and v > maximum:
        col.err("field '%s' must be <= %g" % (name, maximum), loc)
        return None
    if strict_min is not None and v <= strict_min:
        col.err("field '%s' must be > %g" % (name, strict_min), loc)
        return None
    if strict_max is not None and v >= strict_max:
        col.err("field '%s' must be < %g" % (name, strict_max), loc)
        return None
    return v


def _num_list(col, node, name, loc, default=None):
    if name not in node:
        return default
    v = node[name]
    if not isinstance(v, list) or not v or not all(_is_num(e) for e in v):
        col.err("field '%s' must be a non-empty list of numbers" % name, loc)
        return None
    return tuple(float(e) for e in v)


# field -> default; None marks a required field
_MARGINAL_SPECS = {
    "pareto": (Pareto, {"alpha": None, "scale": 1.0}),
    "lognormal": (Lognormal, {"mu": 0.0, "sigma": 1.0}),
    "heavy_weibull": (HeavyWeibull, {"shape": None, "scale": 1.0}),
    "exponential": (Exponential, {"rate": 1.0}),
}


def _build_marginal(col, node, loc) -> Optional[Marginal]:
    if not isinstance(node, dict):
        col.err("expected a mapping", loc)
        return None
    kind = node.get("kind")
    if kind not in _MARGINAL_SPECS:
        col.err("unknown marginal kind %r (expected one of %s)"
                % (kind, ", ".join(sorted(_MARGINAL_SPECS))), loc)
        return None
    cls, spec = _MARGINAL_SPECS[kind]
    req = {f for f, d in spec.items() if d is None}
    if not _check_fields(col, node, loc, {"kind"} | req,
                         (set(spec) - req) | {"shift"}):
        return None
    kw = {"shift": _num_field(col, node, "shift", loc, default=0.0)}
    for f, d in spec.items():
        kw[f] = _num_field(col, node, f, loc, required=d is None, default=d)
    if any(v is None for v in kw.values()):
        return None
    try:
        return cls(**kw)
    except ModelValidationError as e:
        col.err(str(e), loc)
        return None


def _build_marginals(col, root, name) -> Optional[Tuple[Marginal, ...]]:
    if name not in root:
        col.err("missing required field '%s'" % name)
        return None
    node = root[name]
    if not isinstance(node, list) or not node:
        col.err("field '%s' must be a non-empty list" % name)
        return None
    out = []
    for pos, entry in enumerate(node):
        m = _build_marginal(col, entry, "%s[%d]" % (name, pos))
        if m is not None:
            out.append(m)
    return tuple(out) if len(out) == len(node) else None


def _build_copula(col, root, n, m, loc="copula", node=None):
    if node is None:
        node = root.get("copula", {"kind": "independence"})
    if not isinstance(node, dict):
        col.err("expected a mapping", loc)
        return None
    kind = node.get("kind")
    if kind == "independence":
        if _check_fields(col, node, loc, {"kind"}, set()):
            return Independence()
        return None
    if kind == "fgm":
        if not _check_fields(col, node, loc, {"kind", "thetas"}, set()):
            return None
        thetas = _num_list(col, node, "thetas", loc)
        if thetas is None:
            return None
        try:
            cop = PairwiseFGM(thetas=thetas)
        except ModelValidationError as e:
            col.err(str(e), loc)
            return None
        if n is not None and len(thetas) != min(n, m):
            col.err("fgm needs min(n, m) = %d thetas, got %d"
                    % (min(n, m), len(thetas)), loc)
            return None
        return cop
    if kind == "gaussian":
        if not _check_fields(col, node, loc, {"kind", "corr"}, set()):
            return None
        corr = node["corr"]
        if (not isinstance(corr, list)
                or not all(isinstance(r, list)
                           and all(_is_num(v) for v in r) for r in corr)):
            col.err("field 'corr' must be a matrix (list of number lists)",
                    loc)
            return None
        try:
            cop = GaussianCopula(corr=np.asarray(corr, dtype=np.float64))
        except (ModelValidationError, ValueError) as e:
            col.err(str(e), loc)
            return None
        if n is not None and cop.corr.shape[0] != n + m:
            col.err("correlation matrix is %dx%d but n + m = %d"
                    % (cop.corr.shape[0], cop.corr.shape[1], n + m), loc)
            return None
        return cop
    col.err("unknown copula kind %r (expected independence, gaussian or fgm)"
            % (kind,), loc)
    return None


_WEIGHT_FIELDS = {
    "degenerate": ({"c"}, set()),
    "uniform": ({"b"}, {"a"}),
    "lognormal": (set(), {"mu", "sigma"}),
    "bernoulli": ({"p", "c"}, set()),
}


def _build_weight(col, node, loc):
    if not isinstance(node, dict):
        col.err("expected a mapping", loc)
        return None
    kind = node.get("kind")
    if kind not in _WEIGHT_FIELDS:
        col.err("unknown weight kind %r (expected one of %s)"
                % (kind, ", ".join(sorted(_WEIGHT_FIELDS))), loc)
        return None
    req, opt = _WEIGHT_FIELDS[kind]
    if not _check_fields(col, node, loc, {"kind"} | req, opt):
        return None
    try:
        if kind == "degenerate":
            return Degenerate(c=_num_field(col, node, "c", loc, required=True))
        if kind == "uniform":
            return UniformWeight(a=_num_field(col, node, "a", loc, default=0.0),
                                 b=_num_field(col, node, "b", loc,
                                              required=True))
        if kind == "lognormal":
            return LognormalWeight(
                mu=_num_field(col, node, "mu", loc, default=0.0),
                sigma=_num_field(col, node, "sigma", loc, default=1.0))
        return Bernoulli(p=_num_field(col, node, "p", loc, required=True),
                         c=_num_field(col, node, "c", loc, required=True))
    except (ModelValidationError, TypeError) as e:
        if not isinstance(e, TypeError):
            col.err(str(e), loc)
        return None


def _build_weights(col, root, n, m) -> Optional[WeightModel]:
    node = root.get("weights")
    if node is None:
        if n is None:
            return None
        return WeightModel(thetas=(Degenerate(1.0),) * n,
                           deltas=(Degenerate(1.0),) * m)
    if not _check_fields(col, node, "weights", {"thetas", "deltas"},
                         {"coupling"}):
        return None
    coupling = node.get("coupling", "independent")
    if coupling not in ("independent", "comonotone"):
        col.err("field 'coupling' must be independent or comonotone",
                "weights")
        return None
    specs = {}
    for name, want in (("thetas", n), ("deltas", m)):
        entries = node[name]
        if not isinstance(entries, list) or not entries:
            col.err("field '%s' must be a non-empty list" % name, "weights")
            return None
        built = [_build_weight(col, e, "weights.%s[%d]" % (name, pos))
                 for pos, e in enumerate(entries)]
        if any(b is None for b in built):
            return None
        if want is not None and len(built) != want:
            col.err("%d %s for %d variables" % (len(built), name, want),
                    "weights")
            return None
        specs[name] = tuple(built)
    if len(specs) != 2:
        return None
    try:
        return WeightModel(
            thetas=specs["thetas"], deltas=specs["deltas"],
            coupling=Comonotone if coupling == "comonotone"
            else IndependentWeights)
    except ModelValidationError as e:
        col.err(str(e), "weights")
        return None


def _build_probe(col, root) -> Optional[RatioProbe]:
    node = root.get("probe")
    if node is None:
        return RatioProbe()
    if not _check_fields(col, node, "probe", set(),
                         {"quantile_levels", "scale_factors", "shift_values",
                          "z_levels"}):
        return None
    default = RatioProbe()
    kw = {}
    for name in ("quantile_levels", "scale_factors", "shift_values",
                 "z_levels"):
        got = _num_list(col, node, name, "probe",
                        default=getattr(default, name))
        if got is None:
            return None
        kw[name] = got
    try:
        return RatioProbe(**kw)
    except ModelValidationError as e:
        col.err(str(e), "probe")
        return None


def _index_field(col, node, name, loc, limit, label, required=True,
                 default=None):
    v = _num_field(col, node, name, loc, required=required, integer=True,
                   default=default)
    if v is None:
        return None
    if limit is not None and not (0 <= v < limit):
        col.err("field '%s' is %d but %s has %d entries"
                % (name, v, label, limit), loc)
        return None
    return v


def _band_field(col, node, loc):
    band = node.get("band")
    if band is None:
        return None
    if _is_num(band):
        if band <= 0:
            col.err("field 'band' must be positive", loc)
            return None
        return float(band)
    if isinstance(band, dict):
        keys = set(band)
        shapes = ({"below"}, {"target", "tol"}, {"lo", "hi"})
        if keys not in shapes:
            col.err("field 'band' must be a number or one of "
                    "{below}, {target, tol}, {lo, hi}", loc)
            return None
        out = {}
        for k in sorted(keys):
            if not _is_num(band[k]):
                col.err("band entry '%s' must be a number" % k, loc)
                return None
            out[k] = float(band[k])
        if "lo" in out and out["lo"] >= out["hi"]:
            col.err("band 'lo' must be below 'hi'", loc)
            return None
        if "tol" in out and out["tol"] <= 0:
            col.err("band 'tol' must be positive", loc)
            return None
        return out
    col.err("field 'band' must be a number or a mapping", loc)
    return None


def _expect_field(col, node, loc):
    expect = node.get("expect")
    if expect is None:
        return None
    if not isinstance(expect, dict) or not expect:
        col.err("field 'expect' must be a non-empty mapping", loc)
        return None
    out = {}
    for k in sorted(expect):
        v = expect[k]
        if not isinstance(k, str) or v not in _VERDICT_VALUES:
            col.err("expect entry %r must map a property name to one of %s"
                    % (k, ", ".join(_VERDICT_VALUES)), loc)
            return None
        out[str(k)] = str(v)
    return out


_COMMON_OPT = {"n_samples", "band"}


def _check_experiment(col, node, pos, n, m, copula_kind):
    loc = "experiments[%d]" % pos
    if not isinstance(node, dict):
        col.err("expected a mapping", loc)
        return None
    kind = node.get("kind")
    if kind not in EXPERIMENT_KINDS:
        col.err("unknown experiment kind %r" % (kind,), loc)
        return None
    params = {}
    n_over = _num_field(col, node, "n_samples", loc, integer=True, minimum=1)
    if "n_samples" in node and n_over is None:
        return None
    if n_over is not None:
        params["n_samples"] = n_over

    def fields(req, opt, with_band=True):
        extra = _COMMON_OPT if with_band else {"n_samples"}
        return _check_fields(col, node, loc, {"kind"} | req, opt | extra)

    if kind in ("class_report_1d", "matuszewska"):
        opt = {"cap", "expect"} if kind == "matuszewska" \
            else {"eps", "cap", "expect"}
        if not fields({"side", "index"}, opt, with_band=False):
            return None
        side = node.get("side")
        if side not in ("x", "y"):
            col.err("field 'side' must be x or y", loc)
            return None
        limit, label = (n, "marginals_x") if side == "x" else (m, "marginals_y")
        idx = _index_field(col, node, "index", loc, limit, label)
        if idx is None:
            return None
        params.update(side=side, index=idx)
        params["cap"] = _num_field(col, node, "cap", loc, default=50.0,
                                   strict_min=0.0)
        if kind == "class_report_1d":
            params["eps"] = _num_field(col, node, "eps", loc, default=0.02,
                                       strict_min=0.0)
        expect = node.get("expect")
        if kind == "matuszewska":
            if expect is not None:
                exp = _matuszewska_expect(col, expect, loc)
                if exp is None:
                    return None
                params["expect"] = exp
        elif expect is not None:
            exp = _expect_field(col, node, loc)
            if exp is None:
                return None
            params["expect"] = exp
    elif kind in ("class_report_2d", "s2_ratio"):
        opt = {"eps", "cap", "expect"} if kind == "class_report_2d" else set()
        if not fields({"i", "j"}, opt, with_band=kind == "s2_ratio"):
            return None
        i = _index_field(col, node, "i", loc, n, "marginals_x")
        j = _index_field(col, node, "j", loc, m, "marginals_y")
        if i is None or j is None:
            return None
        params.update(i=i, j=j)
        if kind == "class_report_2d":
            params["eps"] = _num_field(col, node, "eps", loc, default=0.02,
                                       strict_min=0.0)
            params["cap"] = _num_field(col, node, "cap", loc, default=50.0,
                                       strict_min=0.0)
            if node.get("expect") is not None:
                exp = _expect_field(col, node, loc)
                if exp is None:
                    return None
                params["expect"] = exp
        else:
            band = _band_field(col, node, loc)
            if "band" in node and band is None:
                return None
            if band is not None:
                params["band"] = band
    elif kind == "dependence":
        diag = node.get("diagnostic")
        if diag in _PAIR_DIAGNOSTICS:
            if not fields({"diagnostic", "seq", "i", "k"}, set()):
                return None
            seq = node.get("seq")
            if seq not in ("x", "y"):
                col.err("field 'seq' must be x or y", loc)
                return None
            limit, label = (n, "marginals_x") if seq == "x" \
                else (m, "marginals_y")
            i = _index_field(col, node, "i", loc, limit, label)
            k = _index_field(col, node, "k", loc, limit, label)
            if i is None or k is None:
                return None
            if i == k:
                col.err("fields 'i' and 'k' must differ", loc)
                return None
            params.update(diagnostic=diag, seq=seq, i=i, k=k)
        elif diag in _TRIPLE_DIAGNOSTICS:
            if not fields({"diagnostic", "indices"}, set()):
                return None
            own, other = (n, m) if diag.endswith("_X") else (m, n)
            own_lbl, oth_lbl = ("marginals_x", "marginals_y") \
                if diag.endswith("_X") else ("marginals_y", "marginals_x")
            idx = node.get("indices")
            if not (isinstance(idx, list) and len(idx) == 3
                    and all(_is_int(v) for v in idx)):
                col.err("field 'indices' must be three integers [i, k, j]",
                        loc)
                return None
            i, k, j = (int(v) for v in idx)
            bad = False
            for v, lim, lbl in ((i, own, own_lbl), (k, own, own_lbl),
                                (j, other, oth_lbl)):
                if lim is not None and not (0 <= v < lim):
                    col.err("index %d out of range for %s" % (v, lbl), loc)
                    bad = True
            if i == k:
                col.err("the first two indices must differ", loc)
                bad = True
            if bad:
                return None
            params.update(diagnostic=diag, indices=[i, k, j])
        elif diag in _EXACT_DIAGNOSTICS:
            opt = {"t"} if diag == "SLOWVAR" else set()
            if not fields({"diagnostic", "i", "j"}, opt, with_band=False):
                return None
            i = _index_field(col, node, "i", loc, n, "marginals_x")
            j = _index_field(col, node, "j", loc, m, "marginals_y")
            if i is None or j is None:
                return None
            params.update(diagnostic=diag, i=i, j=j)
            if diag == "SLOWVAR":
                t = _num_list(col, node, "t", loc, default=(2.0, 2.0))
                if t is None:
                    return None
                if len(t) != 2 or any(v <= 0 for v in t):
                    col.err("field 't' must be two positive numbers", loc)
                    return None
                params["t"] = list(t)
        else:
            col.err("unknown diagnostic %r" % (diag,), loc)
            return None
        band = _band_field(col, node, loc)
        if "band" in node and band is None:
            return None
        if band is not None:
            params["band"] = band
    elif kind == "assumption_a":
        if not fields({"side", "i", "j"}, {"kappa"}):
            return None
        side = node.get("side")
        if side not in ("theta", "delta"):
            col.err("field 'side' must be theta or delta", loc)
            return None
        i = _index_field(col, node, "i", loc, n, "marginals_x")
        j = _index_field(col, node, "j", loc, m, "marginals_y")
        if i is None or j is None:
            return None
        kappa = {"b": 0.5, "c": 0.5, "a": 0.5}
        knode = node.get("kappa")
        if knode is not None:
            if not _check_fields(col, knode, loc + ".kappa", set(),
                                 {"b", "c", "a"}):
                return None
            for f in sorted(knode):
                v = _num_field(col, knode, f, loc + ".kappa",
                               strict_min=0.0, strict_max=1.0)
                if v is None:
                    return None
                kappa[f] = v
        params.update(side=side, i=i, j=j, kappa=kappa)
        band = _band_field(col, node, loc)
        if "band" in node and band is None:
            return None
        if band is not None:
            params["band"] = band
    elif kind == "maxsum":
        if not fields(set(), {"predictor"}):
            return None
        predictor = node.get("predictor", "S_PLAIN")
        if predictor not in tuple(p.value for p in PredictorKind):
            col.err("unknown predictor %r" % (predictor,), loc)
            return None
        params["predictor"] = predictor
        band = _band_field(col, node, loc)
        if "band" in node and band is None:
            return None
        if band is not None:
            if not _is_num(band) and not isinstance(band, float):
                col.err("maxsum band must be a single number", loc)
                return None
            params["band"] = band
    elif kind == "sum_closure":
        if not fields({"seq", "i", "k"}, {"scale_factor"}):
            return None
        seq = node.get("seq")
        if seq not in ("x", "y"):
            col.err("field 'seq' must be x or y", loc)
            return None
        limit, label = (n, "marginals_x") if seq == "x" else (m, "marginals_y")
        i = _index_field(col, node, "i", loc, limit, label)
        k = _index_field(col, node, "k", loc, limit, label)
        if i is None or k is None:
            return None
        if i == k:
            col.err("fields 'i' and 'k' must differ", loc)
            return None
        factor = _num_field(col, node, "scale_factor", loc, default=2.0,
                            strict_min=1.0)
        if factor is None:
            return None
        params.update(seq=seq, i=i, k=k, scale_factor=factor)
        band = _band_field(col, node, loc)
        if "band" in node and band is None:
            return None
        if band is not None:
            params["band"] = band
    elif kind == "product_dependence":
        if not fields({"flavor", "indices"}, set()):
            return None
        flavor = node.get("flavor")
        if flavor not in ("GQAI", "GTAI"):
            col.err("field 'flavor' must be GQAI or GTAI", loc)
            return None
        idx = node.get("indices")
        if not (isinstance(idx, list) and len(idx) == 3
                and all(_is_int(v) for v in idx)):
            col.err("field 'indices' must be three integers [i, k, j]", loc)
            return None
        i, k, j = (int(v) for v in idx)
        bad = False
        for v, lim, lbl in ((i, n, "marginals_x"), (k, n, "marginals_x"),
                            (j, m, "marginals_y")):
            if lim is not None and not (0 <= v < lim):
                col.err("index %d out of range for %s" % (v, lbl), loc)
                bad = True
        if i == k:
            col.err("the first two indices must differ", loc)
            bad = True
        if bad:
            return None
        params.update(flavor=flavor, indices=[i, k, j])
        band = _band_field(col, node, loc)
        if "band" in node and band is None:
            return None
        if band is not None:
            params["band"] = band
    elif kind == "ruin":
        if not fields({"horizon", "surplus_grid"}, {"predictor"}):
            return None
        horizon = _num_field(col, node, "horizon", loc, required=True,
                             integer=True, minimum=1)
        if horizon is None:
            return None
        if n is not None and (horizon != n or horizon != m):
            col.err("horizon %d does not match model dimensions %dx%d"
                    % (horizon, n, m), loc)
            return None
        grid = node.get("surplus_grid")
        ok_grid = (isinstance(grid, list) and grid
                   and all(isinstance(p, list) and len(p) == 2
                           and all(_is_num(v) and v > 0 for v in p)
                           for p in grid))
        if not ok_grid:
            col.err("field 'surplus_grid' must be a non-empty list of "
                    "positive [x, y] pairs", loc)
            return None
        params.update(horizon=horizon,
                      surplus_grid=[[float(a), float(b)] for a, b in grid])
        predictor = node.get("predictor")
        if predictor is not None:
            if predictor not in tuple(p.value for p in PredictorKind):
                col.err("unknown predictor %r" % (predictor,), loc)
                return None
            params["predictor"] = predictor
        band = _band_field(col, node, loc)
        if "band" in node and band is None:
            return None
        if band is not None:
            if not isinstance(band, float):
                col.err("ruin band must be a single number", loc)
                return None
            params["band"] = band
    elif kind == "mixture_closure":
        if not fields({"p", "second"}, {"eps", "cap", "expect"},
                      with_band=False):
            return None
        p = _num_field(col, node, "p", loc, required=True,
                       strict_min=0.0, strict_max=1.0)
        if p is None:
            return None
        if node.get("expect") is not None:
            exp = _expect_field(col, node, loc)
            if exp is None:
                return None
            params["expect"] = exp
        if copula_kind == "gaussian":
            col.err("mixture closure requires an fgm or independence copula",
                    loc)
            return None
        second = node.get("second")
        sloc = loc + ".second"
        if not _check_fields(col, second, sloc,
                             {"marginals_x", "marginals_y"}, {"copula"}):
            return None
        sx = _build_marginals_nested(col, second, "marginals_x", sloc)
        sy = _build_marginals_nested(col, second, "marginals_y", sloc)
        if sx is None or sy is None:
            return None
        scop_node = second.get("copula", {"kind": "independence"})
        if isinstance(scop_node, dict) and scop_node.get("kind") == "gaussian":
            col.err("mixture closure requires an fgm or independence copula",
                    sloc)
            return None
        scop = _build_copula(col, {}, len(sx), len(sy),
                             loc=sloc + ".copula", node=scop_node)
        if scop is None:
            return None
        try:
            JointModel(x_marginals=sx, y_marginals=sy, copula=scop)
        except ModelValidationError as e:
            col.err(str(e), sloc)
            return None
        params.update(
            p=p,
            eps=_num_field(col, node, "eps", loc, default=0.02,
                           strict_min=0.0),
            cap=_num_field(col, node, "cap", loc, default=50.0,
                           strict_min=0.0),
            second={
                "marginals_x": [_marginal_dict(v) for v in sx],
                "marginals_y": [_marginal_dict(v) for v in sy],
                "copula": _copula_dict(scop),
            })
    return {"kind": kind, **params}


def _build_marginals_nested(col, node, name, parent_loc):
    entries = node.get(name)
    if not isinstance(entries, list) or not entries:
        col.err("field '%s' must be a non-empty list" % name, parent_loc)
        return None
    out = []
    for pos, entry in enumerate(entries):
        m = _build_marginal(col, entry, "%s.%s[%d]" % (parent_loc, name, pos))
        if m is not None:
            out.append(m)
    return tuple(out) if len(out) == len(entries) else None


def _matuszewska_expect(col, expect, loc):
    if not isinstance(expect, dict) or not expect:
        col.err("field 'expect' must be a non-empty mapping", loc)
        return None
    out = {}
    for k in sorted(expect):
        if k not in ("j_minus", "j_plus"):
            col.err("unknown field '%s'" % k, loc + ".expect")
            return None
        v = expect[k]
        if k == "j_plus" and v == "above-cap":
            out[k] = "above-cap"
            continue
        if (isinstance(v, list) and len(v) == 2 and all(_is_num(e) for e in v)
                and v[0] <= v[1]):
            out[k] = [float(v[0]), float(v[1])]
        else:
            col.err("expect entry '%s' must be [lo, hi]%s"
                    % (k, " or above-cap" if k == "j_plus" else ""), loc)
            return None
    return out


@dataclass(frozen=True, eq=False)
class Experiment:
    """One validated experiment: a kind plus canonical parameters."""

    kind: str
    params: dict


@dataclass(frozen=True, eq=False)
class ScenarioFile:
    """A fully validated scenario, ready to run."""

    schema_version: int
    seed: int
    n_samples: int
    marginals_x: Tuple[Marginal, ...]
    marginals_y: Tuple[Marginal, ...]
    copula: object
    weights: WeightModel
    probe: RatioProbe
    experiments: Tuple[Experiment, ...]
    out_dir: Optional[str] = None

    def joint_model(self) -> JointModel:
        return JointModel(x_marginals=self.marginals_x,
                          y_marginals=self.marginals_y, copula=self.copula)


_TOP_REQUIRED = {"schema_version", "marginals_x", "marginals_y"}
_TOP_OPTIONAL = {"seed", "n_samples", "copula", "weights", "probe",
                 "experiments", "outputs"}


def parse_scenario(text: str) -> ScenarioFile:
    """Parse and validate; raises ScenarioError listing every violation."""
    try:
        root = yaml.safe_load(text)
    except yaml.YAMLError as e:
        raise ScenarioError(["unparseable document: %s" % e])
    col = _Collector()
    if not isinstance(root, dict):
        col.err("document must be a mapping")
        col.raise_if_any()
    _check_fields(col, root, None, _TOP_REQUIRED, _TOP_OPTIONAL)
    version = _num_field(col, root, "schema_version", None, integer=True,
                         required="schema_version" in root)
    if version is not None and version != SCHEMA_VERSION:
        col.err("unsupported schema_version %d (supported: %d)"
                % (version, SCHEMA_VERSION))
    seed = _num_field(col, root, "seed", None, default=0, integer=True,
                      minimum=0)
    n_samples = _num_field(col, root, "n_samples", None, default=1_000_000,
                           integer=True, minimum=1)
    mx = _build_marginals(col, root, "marginals_x")
    my = _build_marginals(col, root, "marginals_y")
    n = len(mx) if mx is not None else None
    m = len(my) if my is not None else None
    copula = _build_copula(col, root, n, m)
    weights = _build_weights(col, root, n, m)
    probe = _build_probe(col, root)

    out_dir = None
    outputs = root.get("outputs")
    if outputs is not None:
        if _check_fields(col, outputs, "outputs", set(), {"dir"}):
            d = outputs.get("dir")
            if d is not None and not isinstance(d, str):
                col.err("field 'dir' must be a string", "outputs")
            else:
                out_dir = d

    copula_kind = None
    if copula is not None:
        copula_kind = _copula_dict(copula)["kind"]
    experiments = []
    exp_node = root.get("experiments", [])
    if not isinstance(exp_node, list):
        col.err("field 'experiments' must be a list")
    else:
        for pos, entry in enumerate(exp_node):
            params = _check_experiment(col, entry, pos, n, m, copula_kind)
            if params is not None:
                kind = params.pop("kind")
                experiments.append(Experiment(kind=kind, params=params))
    col.raise_if_any()
    return ScenarioFile(
        schema_version=version, seed=seed, n_samples=n_samples,
        marginals_x=mx, marginals_y=my, copula=copula, weights=weights,
        probe=probe, experiments=tuple(experiments), out_dir=out_dir)


def parse_scenario_file(path) -> ScenarioFile:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_scenario(fh.read())


def _marginal_dict(mg: Marginal) -> dict:
    base = {"shift": float(mg.shift)}
    if isinstance(mg, Pareto):
        return {"kind": "pareto", "alpha": float(mg.alpha),
                "scale": float(mg.scale), **base}
    if isinstance(mg, Lognormal):
        return {"kind": "lognormal", "mu": float(mg.mu),
                "sigma": float(mg.sigma), **base}
    if isinstance(mg, HeavyWeibull):
        return {"kind": "heavy_weibull", "shape": float(mg.shape),
                "scale": float(mg.scale), **base}
    return {"kind": "exponential", "rate": float(mg.rate), **base}


def _copula_dict(cop) -> dict:
    if isinstance(cop, Independence):
        return {"kind": "independence"}
    if isinstance(cop, PairwiseFGM):
        return {"kind": "fgm", "thetas": [float(t) for t in cop.thetas]}
    return {"kind": "gaussian",
            "corr": [[float(v) for v in row] for row in cop.corr]}


def _weight_dict(w) -> dict:
    if isinstance(w, Degenerate):
        return {"kind": "degenerate", "c": float(w.c)}
    if isinstance(w, UniformWeight):
        return {"kind": "uniform", "a": float(w.a), "b": float(w.b)}
    if isinstance(w, LognormalWeight):
        return {"kind": "lognormal", "mu": float(w.mu),
                "sigma": float(w.sigma)}
    return {"kind": "bernoulli", "p": float(w.p), "c": float(w.c)}


def canonical_dict(sf: ScenarioFile) -> dict:
    """Plain nested structure with every default materialized."""
    out = {
        "schema_version": int(sf.schema_version),
        "seed": int(sf.seed),
        "n_samples": int(sf.n_samples),
        "marginals_x": [_marginal_dict(m) for m in sf.marginals_x],
        "marginals_y": [_marginal_dict(m) for m in sf.marginals_y],
        "copula": _copula_dict(sf.copula),
        "weights": {
            "coupling": "comonotone" if sf.weights.coupling == Comonotone
            else "independent",
            "thetas": [_weight_dict(w) for w in sf.weights.thetas],
            "deltas": [_weight_dict(w) for w in sf.weights.deltas],
        },
        "probe": {
            "quantile_levels": [float(v) for v in sf.probe.quantile_levels],
            "scale_factors": [float(v) for v in sf.probe.scale_factors],
            "shift_values": [float(v) for v in sf.probe.shift_values],
            "z_levels": [float(v) for v in sf.probe.z_levels],
        },
        "experiments": [{"kind": e.kind, **e.params} for e in sf.experiments],
    }
    if sf.out_dir is not None:
        out["outputs"] = {"dir": sf.out_dir}
    return out


def marginal_from_dict(d: dict) -> Marginal:
    cls, spec = _MARGINAL_SPECS[d["kind"]]
    kw = {f: d.get(f, default if default is not None else None)
          for f, default in spec.items()}
    kw["shift"] = d.get("shift", 0.0)
    return cls(**kw)


def copula_from_dict(d: dict):
    if d["kind"] == "independence":
        return Independence()
    if d["kind"] == "fgm":
        return PairwiseFGM(thetas=tuple(d["thetas"]))
    return GaussianCopula(corr=np.asarray(d["corr"], dtype=np.float64))


def joint_model_from_dict(d: dict) -> JointModel:
    return JointModel(
        x_marginals=tuple(marginal_from_dict(v) for v in d["marginals_x"]),
        y_marginals=tuple(marginal_from_dict(v) for v in d["marginals_y"]),
        copula=copula_from_dict(d.get("copula", {"kind": "independence"})))


def canonical_form(sf: ScenarioFile) -> str:
    return yaml.safe_dump(canonical_dict(sf), sort_keys=True,
                          default_flow_style=False)


def scenario_hash(sf: ScenarioFile) -> str:
    return hashlib.sha256(canonical_form(sf).encode("utf-8")).hexdigest()
