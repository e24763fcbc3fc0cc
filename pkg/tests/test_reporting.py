"""Report serialization and band evaluation."""

import numpy as np
import pytest

from jointtails.dependence import DiagnosticCurve, DiagnosticKind
from jointtails.montecarlo import MCEstimate
from jointtails.reporting import (
    FAIL,
    INCONCLUSIVE,
    NONE,
    PASS,
    curve_rows,
    evaluate_curve_band,
    evaluate_matuszewska,
    evaluate_ratio_band,
    fmt_cell,
    matuszewska_rows,
    ratio_rows,
    summary_exit_code,
    to_plain,
    write_csv,
    write_json,
)
from jointtails.sums import PredictorKind, RatioReport, Variant
from jointtails.tail_classes import RatioProbe, matuszewska
from jointtails.marginals import Pareto


def curve(values, unresolved=None, pairs=False):
    k = len(values)
    thr = tuple((float(i + 2), float(i + 3)) for i in range(k)) if pairs \
        else tuple(float(i + 2) for i in range(k))
    return DiagnosticCurve(
        kind=DiagnosticKind.PQAI,
        thresholds=thr,
        values=tuple((float(v), 0.01) for v in values),
        unresolved=tuple(unresolved or (False,) * k))


def small_report(ratio=1.0, band=0.2, unresolved_top=False):
    n = 1000
    est = MCEstimate(mean=ratio * 1e-3, se=1e-5, n=n,
                     unresolved=unresolved_top)
    variants = (Variant.JOINT_SUM, Variant.JOINT_RUNNING_MAX,
                Variant.JOINT_COMPONENT_MAX)
    lhs = {v: (est,) for v in variants}
    r = np.nan if unresolved_top else ratio
    lo, hi = est.ci95
    return RatioReport(grid=((10.0, 10.0),), lhs=lhs, rhs=((1e-3, 0.0),),
                       ratios={v: (r,) for v in variants},
                       cis={v: ((lo / 1e-3, hi / 1e-3),) for v in variants},
                       predictor_kind=PredictorKind.S_PLAIN, band=band,
                       sandwich_violations=(0,), n_samples=n)


def test_fmt_cell_forms():
    assert fmt_cell(None) == ""
    assert fmt_cell(True) == "true" and fmt_cell(np.False_) == "false"
    assert fmt_cell(3) == "3" and fmt_cell(np.int64(-2)) == "-2"
    assert fmt_cell(0.1) == "0.1"
    assert fmt_cell(np.float64(1e-7)) == "1e-07"
    assert fmt_cell("joint-sum") == "joint-sum"


def test_fmt_cell_round_trips_doubles():
    rng = np.random.default_rng(1)
    for v in rng.standard_normal(200) * 10.0 ** rng.integers(-12, 12, 200):
        assert float(fmt_cell(float(v))) == v


def test_write_csv_layout(tmp_path):
    path = tmp_path / "out.csv"
    write_csv(path, {"scenario_hash": "abc", "seed": 7},
              ["a", "b"], [(1, 0.5), (None, True)])
    text = path.read_text()
    assert text == (
        "# scenario_hash: abc\n"
        "# seed: 7\n"
        "a,b\n"
        "1,0.5\n"
        ",true\n")


def test_write_json_plain_and_sorted(tmp_path):
    path = tmp_path / "out.json"
    write_json(path, {"z": np.float64(0.5), "a": (Variant.JOINT_SUM, np.inf),
                      "n": np.int32(3), "flag": np.True_})
    text = path.read_text()
    assert text.index('"a"') < text.index('"flag"') < text.index('"n"')
    assert '"inf"' in text and '"joint-sum"' in text


def test_to_plain_enum_keys_and_arrays():
    out = to_plain({Variant.JOINT_SUM: np.array([1.0, 2.0])})
    assert out == {"joint-sum": [1.0, 2.0]}
    assert to_plain(DiagnosticKind.PQAI) == "PQAI"
    assert to_plain((np.nan,))[0] == "nan"


def test_curve_rows_scalar_and_pair_thresholds():
    header, rows = curve_rows(curve([0.5, 0.25]))
    assert header == ["t1", "estimate", "se", "unresolved"]
    assert rows[0] == (2.0, 0.5, 0.01, False)
    header, rows = curve_rows(curve([0.5], pairs=True), series="gqai")
    assert header == ["series", "t1", "t2", "estimate", "se", "unresolved"]
    assert rows[0] == ("gqai", 2.0, 3.0, 0.5, 0.01, False)


def test_ratio_rows_optional_horizon():
    rep = small_report()
    header, rows = ratio_rows(rep)
    assert header[-1] == "n" and len(rows) == 3
    header, rows = ratio_rows(rep, horizon=4)
    assert header[-1] == "horizon" and rows[0][-1] == 4


def test_matuszewska_rows_shape():
    mat = matuszewska(Pareto(alpha=2.0), RatioProbe())
    header, rows = matuszewska_rows(mat)
    assert header == ["series", "ln_x", "factor", "estimate"]
    assert rows[0][0] == "summary"
    assert all(r[0] == "rung" for r in rows[1:])
    assert len(rows) == 1 + len(mat.table)


def test_evaluate_ratio_band_statuses():
    ok, detail = evaluate_ratio_band(small_report(ratio=1.1, band=0.2))
    assert ok == PASS and "joint-sum" in detail
    bad, _ = evaluate_ratio_band(small_report(ratio=1.5, band=0.2))
    assert bad == FAIL
    inc, detail = evaluate_ratio_band(small_report(unresolved_top=True))
    assert inc == INCONCLUSIVE and "unresolved" in detail


def test_evaluate_ratio_band_ungated():
    # informational runs never fail, but unresolved still blocks
    status, detail = evaluate_ratio_band(small_report(ratio=2.0), gated=False)
    assert status == NONE and "no band" in detail
    status, _ = evaluate_ratio_band(small_report(unresolved_top=True),
                                    gated=False)
    assert status == INCONCLUSIVE


def test_evaluate_curve_band_rules():
    assert evaluate_curve_band(curve([0.5, 0.04]), {"below": 0.05})[0] == PASS
    assert evaluate_curve_band(curve([0.5, 0.06]), {"below": 0.05})[0] == FAIL
    assert evaluate_curve_band(
        curve([2.0, 1.05]), {"target": 1.0, "tol": 0.1})[0] == PASS
    assert evaluate_curve_band(
        curve([2.0, 3.9]), {"lo": 3.4, "hi": 4.6})[0] == PASS
    assert evaluate_curve_band(curve([2.0, 1.15]), 0.1)[0] == FAIL
    assert evaluate_curve_band(curve([2.0, 1.05]), None) == \
        (NONE, "no band declared")
    # an unresolved deciding cell wins over any band, declared or not
    got = evaluate_curve_band(curve([2.0, np.nan], (False, True)), 0.1)
    assert got == (INCONCLUSIVE, "final cell unresolved")
    got = evaluate_curve_band(curve([2.0, np.nan], (False, True)), None)
    assert got[0] == INCONCLUSIVE


def test_evaluate_matuszewska_bands():
    mat = matuszewska(Pareto(alpha=2.0), RatioProbe())
    ok, _ = evaluate_matuszewska(mat, {"j_minus": [1.9, 2.1],
                                       "j_plus": [1.9, 2.1]})
    assert ok == PASS
    bad, _ = evaluate_matuszewska(mat, {"j_plus": "above-cap"})
    assert bad == FAIL
    assert evaluate_matuszewska(mat, None) == (NONE,
                                               "no expectations declared")


def test_summary_exit_code():
    assert summary_exit_code([PASS, NONE, PASS]) == 0
    assert summary_exit_code([]) == 0
    assert summary_exit_code([PASS, FAIL]) == 2
    assert summary_exit_code([PASS, INCONCLUSIVE]) == 2
