"""Batch surface: run scenario files, validate them, re-summarize reports.

    jointtails run <scenario.yaml> [--seed S] [--samples N] [--threads T]
                                   [--out DIR]
    jointtails check <scenario.yaml>
    jointtails report <dir>

``run`` executes every experiment in the scenario sequentially (Monte
Carlo parallelism lives inside each experiment), writing one CSV and one
JSON per experiment plus a ``summary.json``. Exit code 0 means every
declared acceptance band passed, 2 flags a band failure or an
inconclusive (unresolved) decision, 1 is a configuration or I/O error.
``check`` only parses and validates. ``report`` rebuilds the summary from
per-experiment JSON files already on disk.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys

from .dependence import (
    DiagnosticKind,
    JointModel,
    pair_diagnostic,
    sai_constant,
    slow_variation_probe,
    triple_diagnostic,
)
from .errors import JointTailsError, ScenarioError
from .marginals import MixtureSpec
from .reporting import (
    class_payload,
    class_rows,
    curve_payload,
    curve_rows,
    evaluate_curve_band,
    evaluate_expectations,
    evaluate_matuszewska,
    evaluate_ratio_band,
    matuszewska_payload,
    matuszewska_rows,
    ratio_payload,
    ratio_rows,
    summary_exit_code,
    write_csv,
    write_json,
)
from .rng import StreamKey
from .ruin import RiskScenario, ruin_report
from .scenario import (
    ScenarioFile,
    canonical_form,
    joint_model_from_dict,
    parse_scenario_file,
    scenario_hash,
)
from .sums import (
    Variant,
    maxsum_experiment,
    product_dependence_check,
    sum_closure_check,
    sum_scale_ratio,
)
from .tail_classes import (
    class_report_1d,
    class_report_2d,
    matuszewska,
    mixture_closure_check,
    s2_ratio_check,
)
from .weights import ProbeFunctions, assumption_a_check


def _run_one(sf: ScenarioFile, jm: JointModel, exp, n: int, key: StreamKey,
             workers: int):
    """Returns (csv_header, csv_rows, json_payload, band_status, detail)."""
    p = exp.params
    probe, wm = sf.probe, sf.weights
    kind = exp.kind
    if kind == "class_report_1d":
        margs = sf.marginals_x if p["side"] == "x" else sf.marginals_y
        rep = class_report_1d(margs[p["index"]], probe, n, key,
                              eps=p["eps"], cap=p["cap"], workers=workers)
        header, rows = class_rows(rep)
        status, detail = evaluate_expectations(rep, p.get("expect"))
        return header, rows, class_payload(rep), status, detail
    if kind == "class_report_2d":
        rep = class_report_2d(jm, p["i"], p["j"], probe, n, key,
                              eps=p["eps"], cap=p["cap"], workers=workers)
        header, rows = class_rows(rep)
        status, detail = evaluate_expectations(rep, p.get("expect"))
        return header, rows, class_payload(rep), status, detail
    if kind == "matuszewska":
        margs = sf.marginals_x if p["side"] == "x" else sf.marginals_y
        res = matuszewska(margs[p["index"]], probe, cap=p["cap"])
        header, rows = matuszewska_rows(res)
        status, detail = evaluate_matuszewska(res, p.get("expect"))
        return header, rows, matuszewska_payload(res), status, detail
    if kind == "dependence":
        diag = p["diagnostic"]
        if diag in ("PQAI", "TAI"):
            curve = pair_diagnostic(jm, DiagnosticKind[diag], p["seq"],
                                    p["i"], p["k"], probe, n, key, workers)
        elif diag == "SAI_CONST":
            curve = sai_constant(jm, p["i"], p["j"], probe)
        elif diag == "SLOWVAR":
            curve = slow_variation_probe(jm, p["i"], p["j"], tuple(p["t"]),
                                         probe)
        else:
            curve = triple_diagnostic(jm, DiagnosticKind[diag],
                                      tuple(p["indices"]), probe, n, key,
                                      workers)
        header, rows = curve_rows(curve)
        status, detail = evaluate_curve_band(curve, p.get("band"))
        return header, rows, curve_payload(curve), status, detail
    if kind == "assumption_a":
        kp = p["kappa"]
        pf = ProbeFunctions(kappa_b=kp["b"], kappa_c=kp["c"], kappa_a=kp["a"])
        curve = assumption_a_check(wm, jm, pf, probe, n, key,
                                   side=p["side"], i=p["i"], j=p["j"],
                                   workers=workers)
        header, rows = curve_rows(curve)
        status, detail = evaluate_curve_band(curve, p.get("band"))
        return header, rows, curve_payload(curve), status, detail
    if kind == "maxsum":
        rep = maxsum_experiment(jm, wm, probe, n, key,
                                predictor_kind=p["predictor"],
                                workers=workers, band=p.get("band"))
        header, rows = ratio_rows(rep)
        status, detail = evaluate_ratio_band(rep, gated="band" in p)
        return header, rows, ratio_payload(rep), status, detail
    if kind == "sum_closure":
        closure = sum_closure_check(jm, p["seq"], p["i"], p["k"], probe, n,
                                    key.child(0), workers)
        scale = sum_scale_ratio(jm, p["seq"], p["i"], p["k"],
                                p["scale_factor"], probe, n, key.child(1),
                                workers)
        header, rows = curve_rows(closure, series="closure")
        _, more = curve_rows(scale, series="scale_ratio")
        payload = {"closure": curve_payload(closure),
                   "scale_ratio": curve_payload(scale),
                   "scale_factor": p["scale_factor"]}
        status, detail = evaluate_curve_band(closure, p.get("band"))
        return header, rows + more, payload, status, detail
    if kind == "product_dependence":
        curve = product_dependence_check(jm, wm, p["flavor"],
                                         tuple(p["indices"]), probe, n, key,
                                         workers)
        header, rows = curve_rows(curve)
        status, detail = evaluate_curve_band(curve, p.get("band"))
        return header, rows, curve_payload(curve), status, detail
    if kind == "ruin":
        rs = RiskScenario(horizon=p["horizon"], claims=jm, discounts=wm,
                          surplus_grid=tuple(tuple(s)
                                             for s in p["surplus_grid"]))
        rep = ruin_report(rs, n, key, predictor_kind=p.get("predictor"),
                          workers=workers, band=p.get("band"))
        header, rows = ratio_rows(rep, horizon=p["horizon"])
        status, detail = evaluate_ratio_band(
            rep, variants=(Variant.JOINT_RUNNING_MAX,), gated="band" in p)
        payload = ratio_payload(rep)
        payload["horizon"] = p["horizon"]
        return header, rows, payload, status, detail
    if kind == "s2_ratio":
        curve = s2_ratio_check(jm, p["i"], p["j"], probe, n, key, workers)
        header, rows = curve_rows(curve)
        status, detail = evaluate_curve_band(curve, p.get("band"))
        return header, rows, curve_payload(curve), status, detail
    # mixture_closure
    jm2 = joint_model_from_dict(p["second"])
    mx_f = MixtureSpec(p=p["p"], left=jm.x_marginals[0],
                       right=jm2.x_marginals[0])
    mx_g = MixtureSpec(p=p["p"], left=jm.y_marginals[0],
                       right=jm2.y_marginals[0])
    rep = mixture_closure_check(mx_f, mx_g, jm, jm2, p["p"], probe,
                                eps=p["eps"], cap=p["cap"])
    header, rows = class_rows(rep)
    status, detail = evaluate_expectations(rep, p.get("expect"))
    return header, rows, class_payload(rep), status, detail


def run_experiments(sf: ScenarioFile, out_dir: str, workers: int = 1) -> int:
    """Execute every experiment; write reports; return the exit code."""
    jm = sf.joint_model()
    digest = scenario_hash(sf)
    os.makedirs(out_dir, exist_ok=True)
    entries = []
    for e_idx, exp in enumerate(sf.experiments):
        n = exp.params.get("n_samples", sf.n_samples)
        key = StreamKey(seed=sf.seed).child(e_idx)
        header, rows, payload, status, detail = _run_one(
            sf, jm, exp, n, key, workers)
        stem = "%02d-%s" % (e_idx, exp.kind)
        provenance = {
            "scenario_hash": digest,
            "seed": sf.seed,
            "n_samples": n,
            "schema_version": sf.schema_version,
            "experiment": stem,
        }
        write_csv(os.path.join(out_dir, stem + ".csv"), provenance, header,
                  rows)
        write_json(os.path.join(out_dir, stem + ".json"), {
            "experiment": stem,
            "kind": exp.kind,
            "params": exp.params,
            "provenance": provenance,
            "band": {"status": status, "detail": detail},
            "result": payload,
        })
        entries.append({"experiment": stem, "kind": exp.kind,
                        "band": status, "detail": detail})
    code = summary_exit_code([e["band"] for e in entries])
    write_json(os.path.join(out_dir, "summary.json"), {
        "scenario_hash": digest,
        "seed": sf.seed,
        "n_samples": sf.n_samples,
        "schema_version": sf.schema_version,
        "experiments": entries,
        "exit_code": code,
    })
    return code


def _cmd_run(args) -> int:
    try:
        sf = parse_scenario_file(args.scenario)
    except ScenarioError as e:
        print(str(e), file=sys.stderr)
        return 1
    except OSError as e:
        print("cannot read scenario: %s" % e, file=sys.stderr)
        return 1
    if args.seed is not None:
        sf = dataclasses.replace(sf, seed=args.seed)
    if args.samples is not None:
        sf = dataclasses.replace(sf, n_samples=args.samples)
    out_dir = args.out or sf.out_dir or "out"
    try:
        return run_experiments(sf, out_dir, workers=max(1, args.threads))
    except JointTailsError as e:
        print("configuration error: %s" % e, file=sys.stderr)
        return 1
    except OSError as e:
        print("i/o error: %s" % e, file=sys.stderr)
        return 1


def _cmd_check(args) -> int:
    try:
        sf = parse_scenario_file(args.scenario)
    except ScenarioError as e:
        print(str(e), file=sys.stderr)
        return 1
    except OSError as e:
        print("cannot read scenario: %s" % e, file=sys.stderr)
        return 1
    print("ok %s" % scenario_hash(sf))
    if args.canonical:
        sys.stdout.write(canonical_form(sf))
    return 0


def _cmd_report(args) -> int:
    try:
        names = sorted(f for f in os.listdir(args.dir)
                       if f.endswith(".json") and f != "summary.json")
        entries = []
        meta = None
        for name in names:
            with open(os.path.join(args.dir, name), encoding="utf-8") as fh:
                payload = json.load(fh)
            entries.append({
                "experiment": payload["experiment"],
                "kind": payload["kind"],
                "band": payload["band"]["status"],
                "detail": payload["band"]["detail"],
            })
            meta = payload["provenance"]
        code = summary_exit_code([e["band"] for e in entries])
        write_json(os.path.join(args.dir, "summary.json"), {
            "scenario_hash": meta["scenario_hash"] if meta else None,
            "seed": meta["seed"] if meta else None,
            "n_samples": meta["n_samples"] if meta else None,
            "schema_version": meta["schema_version"] if meta else None,
            "experiments": entries,
            "exit_code": code,
        })
        for e in entries:
            print("%s %s: %s" % (e["band"].ljust(12), e["experiment"],
                                 e["detail"]))
        return code
    except (OSError, KeyError, json.JSONDecodeError) as e:
        print("cannot summarize %s: %s" % (args.dir, e), file=sys.stderr)
        return 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="jointtails",
        description="Joint tail asymptotics: scenario runner")
    sub = ap.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="execute a scenario file")
    run.add_argument("scenario")
    run.add_argument("--seed", type=int, default=None,
                     help="override the scenario seed")
    run.add_argument("--samples", type=int, default=None,
                     help="override the default sample count")
    run.add_argument("--threads", type=int, default=1,
                     help="worker threads for Monte Carlo chunks")
    run.add_argument("--out", default=None, help="report directory")
    run.set_defaults(func=_cmd_run)

    check = sub.add_parser("check", help="parse and validate only")
    check.add_argument("scenario")
    check.add_argument("--canonical", action="store_true",
                       help="print the canonical form")
    check.set_defaults(func=_cmd_check)

    rep = sub.add_parser("report", help="re-summarize a report directory")
    rep.add_argument("dir")
    rep.set_defaults(func=_cmd_report)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
