"""Deterministic report emission: CSV for plotting, JSON for machines.

Every CSV starts with a provenance comment block (scenario hash, seed,
sample count, schema version, experiment name) so a stray file can always
be traced back to the exact configuration that produced it. Floats are
written with ``repr``. That is the shortest round-trip form, so output
bytes are identical across platforms and thread counts whenever the
underlying doubles are, which the Monte Carlo engine guarantees.

Band evaluation turns each experiment result into one of four statuses:
``pass`` and ``fail`` against a declared acceptance band, ``inconclusive``
when the deciding cell is unresolved (no Monte Carlo hits) and ``none``
when the experiment declared no band at all.
"""

from __future__ import annotations

import csv
import json

import numpy as np

from .dependence import DiagnosticCurve
from .sums import RatioReport, Variant
from .tail_classes import ClassReport, MatuszewskaResult, UNRESOLVED

PASS, FAIL, INCONCLUSIVE, NONE = "pass", "fail", "inconclusive", "none"

_GATED_VARIANTS = (Variant.JOINT_SUM, Variant.JOINT_RUNNING_MAX)


def fmt_cell(v) -> str:
    """Canonical text for one CSV cell."""
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_csv(path, provenance: dict, header, rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        for k, v in provenance.items():
            fh.write("# %s: %s\n" % (k, fmt_cell(v)))
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(list(header))
        for row in rows:
            w.writerow([fmt_cell(v) for v in row])


def to_plain(obj):
    """Recursive conversion to json-serializable plain values."""
    if isinstance(obj, dict):
        return {str(k.value if hasattr(k, "value") else k): to_plain(v)
                for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_plain(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if np.isfinite(v) else repr(v)
    if hasattr(obj, "value") and not isinstance(obj, str):
        return to_plain(obj.value)
    return obj


def write_json(path, payload: dict):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        json.dump(to_plain(payload), fh, sort_keys=True, indent=2)
        fh.write("\n")


def _threshold_width(curve: DiagnosticCurve) -> int:
    t = curve.thresholds[0]
    return len(t) if isinstance(t, (tuple, list)) else 1


def curve_rows(curve: DiagnosticCurve, series=None):
    """(header, rows) in long form; multi-part thresholds get t1..tk."""
    width = _threshold_width(curve)
    header = ["t%d" % (d + 1) for d in range(width)] + \
        ["estimate", "se", "unresolved"]
    if series is not None:
        header = ["series"] + header
    rows = []
    for t, (est, se), unres in zip(curve.thresholds, curve.values,
                                   curve.unresolved):
        parts = list(t) if isinstance(t, (tuple, list)) else [t]
        row = parts + [est, se, unres]
        if series is not None:
            row = [series] + row
        rows.append(tuple(row))
    return header, rows


def curve_payload(curve: DiagnosticCurve) -> dict:
    return {
        "kind": curve.kind.value,
        "thresholds": to_plain(curve.thresholds),
        "values": to_plain(curve.values),
        "unresolved": to_plain(curve.unresolved),
    }


def ratio_rows(report: RatioReport, horizon=None):
    header = ["x", "y", "variant", "lhs", "se", "rhs", "ratio",
              "ci_lo", "ci_hi", "n"]
    rows = report.rows()
    if horizon is not None:
        header = header + ["horizon"]
        rows = [row + (horizon,) for row in rows]
    return header, rows


def ratio_payload(report: RatioReport) -> dict:
    variants = {}
    for v, ests in report.lhs.items():
        variants[v.value] = {
            "mean": [e.mean for e in ests],
            "se": [e.se for e in ests],
            "n": [e.n for e in ests],
            "unresolved": [e.unresolved for e in ests],
            "ratio": list(report.ratios[v]),
            "ci": [list(c) for c in report.cis[v]],
        }
    return {
        "grid": to_plain(report.grid),
        "predictor": report.predictor_kind.value,
        "band": report.band,
        "rhs": to_plain(report.rhs),
        "variants": to_plain(variants),
        "sandwich_violations": to_plain(report.sandwich_violations),
        "n_samples": report.n_samples,
    }


def class_rows(report: ClassReport):
    """Long-form rows: verdicts, index summary, then every table."""
    header = ["series", "c1", "c2", "c3", "c4"]
    rows = []
    for prop in sorted(report.verdicts):
        rows.append(("verdict:" + prop, report.verdicts[prop], None, None,
                     None))
    rows.append(("matuszewska", report.j_minus, report.j_plus, None, None))
    if report.alpha_hat is not None:
        rows.append(("alpha_hat", report.alpha_hat, None, None, None))
    for name in sorted(report.tables):
        for entry in report.tables[name]:
            vals = list(entry) if isinstance(entry, (tuple, list)) else [entry]
            vals = vals[:4] + [None] * (4 - len(vals))
            rows.append(tuple(["table:" + name] + vals))
    return header, rows


def class_payload(report: ClassReport) -> dict:
    out = {
        "verdicts": dict(report.verdicts),
        "j_minus": report.j_minus,
        "j_plus": report.j_plus,
        "cap": report.cap,
        "alpha_hat": report.alpha_hat,
        "tables": {k: to_plain(v) for k, v in report.tables.items()},
    }
    if report.marginals is not None:
        out["marginals"] = [class_payload(r) for r in report.marginals]
    return out


def matuszewska_rows(result: MatuszewskaResult):
    header = ["series", "ln_x", "factor", "estimate"]
    rows = [("summary", result.j_minus, None, result.j_plus_report)]
    for ln_x, factor, est in result.table:
        rows.append(("rung", ln_x, factor, est))
    return header, rows


def matuszewska_payload(result: MatuszewskaResult) -> dict:
    return {
        "j_minus": result.j_minus,
        "j_plus": result.j_plus_report,
        "above_cap": result.above_cap,
        "cap": result.cap,
        "table": to_plain(result.table),
    }


def _status(ok: bool) -> str:
    return PASS if ok else FAIL


def evaluate_ratio_band(report: RatioReport, variants=_GATED_VARIANTS,
                        gated=True):
    """Top-grid-level |ratio - 1| <= band for each gated variant.

    With gated=False the band is informational only: unresolved top
    cells still flag INCONCLUSIVE but finite ratios report NONE.
    """
    details = []
    worst = PASS if gated else NONE
    for v in variants:
        est = report.lhs[v][-1]
        ratio = report.ratios[v][-1]
        if est.unresolved or not np.isfinite(ratio):
            details.append("%s unresolved at top level" % v.value)
            worst = INCONCLUSIVE if worst != FAIL else worst
            continue
        if not gated:
            details.append("%s ratio %.6g (no band)" % (v.value, ratio))
            continue
        ok = abs(ratio - 1.0) <= report.band
        details.append("%s ratio %.6g (band %.3g)"
                       % (v.value, ratio, report.band))
        if not ok:
            worst = FAIL
    return worst, "; ".join(details)


def evaluate_curve_band(curve: DiagnosticCurve, band):
    est, unres = curve.values[-1][0], curve.unresolved[-1]
    if unres or not np.isfinite(est):
        # nothing decidable at the deciding cell, band or not
        return INCONCLUSIVE, "final cell unresolved"
    if band is None:
        return NONE, "no band declared"
    if isinstance(band, dict):
        if "below" in band:
            return (_status(est < band["below"]),
                    "final %.6g vs below %.6g" % (est, band["below"]))
        if "target" in band:
            ok = abs(est - band["target"]) <= band["tol"]
            return (_status(ok), "final %.6g vs %.6g +/- %.6g"
                    % (est, band["target"], band["tol"]))
        ok = band["lo"] <= est <= band["hi"]
        return (_status(ok), "final %.6g vs [%.6g, %.6g]"
                % (est, band["lo"], band["hi"]))
    ok = abs(est - 1.0) <= float(band)
    return _status(ok), "final %.6g within %.3g of 1" % (est, float(band))


def evaluate_expectations(report: ClassReport, expect):
    if not expect:
        return NONE, "no expectations declared"
    details = []
    worst = PASS
    for prop in sorted(expect):
        want = expect[prop]
        got = report.verdicts.get(prop)
        details.append("%s=%s (expected %s)" % (prop, got, want))
        if got == want:
            continue
        if got == UNRESOLVED:
            worst = INCONCLUSIVE if worst != FAIL else worst
        else:
            worst = FAIL
    return worst, "; ".join(details)


def evaluate_matuszewska(result: MatuszewskaResult, expect):
    if not expect:
        return NONE, "no expectations declared"
    details = []
    ok = True
    if "j_minus" in expect:
        lo, hi = expect["j_minus"]
        good = lo <= result.j_minus <= hi
        ok = ok and good
        details.append("j_minus %.4g vs [%g, %g]" % (result.j_minus, lo, hi))
    if "j_plus" in expect:
        want = expect["j_plus"]
        if want == "above-cap":
            good = result.above_cap
            details.append("j_plus %s (expected above cap %g)"
                           % (result.j_plus_report, result.cap))
        else:
            lo, hi = want
            good = (not result.above_cap) and lo <= result.j_plus <= hi
            details.append("j_plus %s vs [%g, %g]"
                           % (result.j_plus_report, lo, hi))
        ok = ok and good
    return _status(ok), "; ".join(details)


def summary_exit_code(statuses) -> int:
    if any(s in (FAIL, INCONCLUSIVE) for s in statuses):
        return 2
    return 0
