"""Batch command-line front end: ``fraclap <subcommand> [options]``.

Every subcommand writes a JSON report (stdout, or ``--report``) holding the
toolkit version, the fully resolved configuration and the results.  Bulk
numerics go to CSV or field files referenced from the report.

Exit codes: 0 success, 2 precondition violation (the diagnostic names the
module contract), 1 internal error.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import __version__
from .errors import FraclapError, StructuralError
from .extension import DEFAULT_ETAS, MeshSpec, apply_via_extension, calibrate_dtn, solve_mode, write_profile_csv
from .gamma import admissible, lambda_factor, lambda_factor_printed, sign_walk, sign_walk_poles
from .grid import FracParams, PeriodicField, load_field, save_field
from .hankel import QuadratureSpec, resolve_ft_convention
from .models import (
    BubbleParams,
    GridSpec,
    SingularModel,
    bubble_residual,
    completeness_probe,
    growth_diagnostic,
    output_exponent_exceeds_codimension,
    verify_homogeneous_action,
)
from .spectral import ZERO_MODE_POLICIES, MultiplierSpec, apply_spectral, pv_evaluate

__all__ = ["main", "build_parser", "run"]


class UsageError(FraclapError):
    contract = "cli"


# -- helpers ----------------------------------------------------------------


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else str(x)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, complex):
        return {"re": _jsonable(obj.real), "im": _jsonable(obj.imag)}
    if isinstance(obj, Path):
        return str(obj)
    return obj


def _dump(report: dict) -> str:
    return json.dumps(_jsonable(report), indent=2, sort_keys=True, allow_nan=False) + "\n"


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _float_list(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _require(cond: bool, message: str, contract: str) -> None:
    if not cond:
        raise UsageError(message, contract=contract)


def _mesh_spec(args) -> MeshSpec:
    return MeshSpec(J=args.J, x_max=args.x_max, grading=args.grading, decay=args.decay, tol=args.solver_tol)


def _read_field(path: str) -> PeriodicField:
    p = Path(path)
    if not p.exists():
        raise StructuralError(f"field file not found: {path}")
    return load_field(p)


def _read_rows(path: str, width: int | None = None) -> list[list[float]]:
    rows = []
    with open(path, newline="") as fh:
        for line_no, row in enumerate(csv.reader(fh), 1):
            if not row or row[0].lstrip().startswith("#"):
                continue
            try:
                vals = [float(x) for x in row]
            except ValueError:
                if line_no == 1:  # header line
                    continue
                raise StructuralError(f"{path}:{line_no}: non-numeric entry in {row!r}")
            if width is not None and len(vals) != width:
                raise StructuralError(f"{path}:{line_no}: expected {width} columns, got {len(vals)}")
            rows.append(vals)
    return rows


# -- subcommands ------------------------------------------------------------


def cmd_apply(args) -> dict:
    field = _read_field(args.input)
    spec = MultiplierSpec(args.gamma, args.zero_mode_policy)
    out = apply_spectral(field, spec)
    report = {"dims": list(field.dims), "box_lengths": list(field.box_lengths),
              "output_norm": out.norm(), "max_abs_imag": float(np.max(np.abs(out.values.imag)))}
    if args.output:
        save_field(out, args.output)
        report["output_file"] = args.output
    return report


def cmd_pv(args) -> dict:
    field = _read_field(args.input)
    if args.point is not None:
        _require(len(args.point) == field.ndim, f"--point needs {field.ndim} indices, got {args.point}", "spectral-op")
        res = pv_evaluate(field, args.gamma, tuple(args.point), args.images)
        return {"point": args.point, "value": res.value, "local_correction": res.local_correction,
                "tail_error": res.tail_error}
    _require(args.output is not None, "--out is required when --point is not given", "cli")
    vals = np.empty(field.dims, dtype=complex)
    tail = 0.0
    for idx in np.ndindex(*field.dims):
        res = pv_evaluate(field, args.gamma, idx, args.images)
        vals[idx] = res.value
        tail = max(tail, res.tail_error)
    save_field(field.with_values(vals), args.output)
    return {"output_file": args.output, "tail_error": tail, "points": int(vals.size)}


def cmd_extend(args) -> dict:
    mesh = _mesh_spec(args)
    prof = solve_mode(args.eta, args.gamma, mesh, args.f0)
    report = {"dtn": prof.dtn_value, "dtn_error": prof.dtn_error, "nodes": int(prof.x_nodes.size)}
    if args.profile_csv:
        write_profile_csv(prof, args.profile_csv)
        report["profile_csv"] = args.profile_csv
    return report


def cmd_calibrate(args) -> dict:
    cal = calibrate_dtn(args.gamma, args.etas, _mesh_spec(args), args.fit_tol)
    return cal.report()


def cmd_lambda(args) -> dict:
    lam = lambda_factor(args.n, args.k, args.gamma)
    printed = lambda_factor_printed(args.n, args.k, args.gamma)
    return {"lambda": None if lam.is_pole else lam.value, "sign": lam.sign if not lam.is_pole else None,
            "log_abs": lam.log_abs, "indeterminate": lam.is_pole,
            "lambda_printed_prefactor": None if printed.is_pole else printed.value}


def _sign_char(sign):
    return None if sign is None else ("+" if sign > 0 else "-")


def cmd_admissible(args) -> dict:
    if args.scan:
        rows = []
        steps = args.gamma_steps
        for n in range(args.n_min, args.n_max + 1):
            for k in range(n):
                for j in range(1, steps):
                    g = round(n / 2 * j / steps, 12)
                    rows.append(admissible(n, k, g).as_dict())
        with open(args.scan, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            cols = ["n", "k", "gamma", "ratio_sign", "lambda", "simple_bound", "dimrest"]
            w.writerow(cols)
            for r in rows:
                w.writerow(["" if r[c] is None else (repr(r[c]) if isinstance(r[c], float) else r[c]) for c in cols])
        return {"scan_csv": args.scan, "rows": len(rows),
                "dimrest_true": sum(r["dimrest"] for r in rows)}
    _require(None not in (args.n, args.k, args.gamma), "--n, --k and --gamma are required without --scan", "cli")
    rep = admissible(args.n, args.k, args.gamma)
    lam = lambda_factor(args.n, args.k, args.gamma)
    return {"dimrest": rep.dimrest_holds, "simple_bound": rep.simple_bound_holds,
            "lambda_sign": None if lam.is_pole else _sign_char(lam.sign),
            "ratio_sign": _sign_char(rep.ratio_sign), "lambda": rep.as_dict()["lambda"],
            "distributional_extension": output_exponent_exceeds_codimension(args.n, args.k, args.gamma)}


def cmd_signwalk(args) -> dict:
    steps = args.gamma_steps
    grid = [args.n / 2 * j / steps for j in range(1, steps)]
    walk = sign_walk(args.n, args.k, grid)
    changes = []  # first gamma at which the sign differs from the last defined one (poles skipped)
    last = None
    for g, s in walk:
        if s is None:
            continue
        if last is not None and s != last:
            changes.append(g)
        last = s
    return {"poles": sign_walk_poles(args.n, args.k), "sign_changes_after": changes,
            "walk": [[g, _sign_char(s)] for g, s in walk]}


def cmd_model_verify(args) -> dict:
    model = SingularModel(args.n, args.k, args.gamma, args.amplitude)
    grid = GridSpec(args.points, args.box_length) if args.points else None
    fit = verify_homogeneous_action(model, grid, args.mollification_radius, None, args.stability_tol)
    report = fit.report()
    report["sign_matches_ratio"] = bool(np.sign(fit.fitted_prefactor) == admissible(args.n, args.k, args.gamma).ratio_sign)
    return report


def cmd_bubble(args) -> dict:
    center = tuple(args.center) if args.center else None
    _require(center is None or len(center) == args.n, f"--center needs {args.n} components", "model-solutions")
    params = BubbleParams(args.n, args.gamma, args.mu, center, args.amplitude)
    grid = GridSpec(args.points, args.box_length) if args.points else None
    res = bubble_residual(params, grid, args.origin, args.max_boundary_ratio, args.max_cv)
    return res.report()


def cmd_growth(args) -> dict:
    params = FracParams(args.n, args.gamma)
    report = {}
    if args.samples:
        _require(args.lambda_set is not None, "--lambda-set is required with --samples", "cli")
        rows = _read_rows(args.samples, args.n + 1)
        lam = _read_rows(args.lambda_set, args.n)
        rep = growth_diagnostic([(r[:-1], r[-1]) for r in rows], lam, params)
        report["growth"] = rep.report()
    if args.ray:
        rows = _read_rows(args.ray, 2)
        res = completeness_probe([tuple(r) for r in rows], params, args.tail)
        report["completeness"] = asdict(res)
    _require(bool(report), "give --samples/--lambda-set and/or --ray", "cli")
    return report


def cmd_ft_oracle(args) -> dict:
    return resolve_ft_convention(args.N, args.alpha, args.match_tol, QuadratureSpec(args.intervals, args.quad_tol))


def cmd_selftest(args) -> dict:
    from .selftest import CRITERIA, run_all

    numbers = args.criteria or sorted(CRITERIA)
    bad = [c for c in numbers if c not in CRITERIA]
    _require(not bad, f"unknown criteria {bad}; choose from {sorted(CRITERIA)}", "cli")
    results = run_all(numbers, echo=lambda line: print(line, file=sys.stderr, flush=True))
    passed = sum(r.passed for r in results)
    print(f"{passed}/{len(results)} criteria passed", file=sys.stderr)
    report = {"criteria": []}
    for r in results:
        d = r.as_dict()
        d.pop("elapsed_s")  # wall time is shown in the table, kept out of the report for determinism
        d["details"] = _strip_timing(d["details"])
        report["criteria"].append(d)
    report["all_passed"] = passed == len(results)
    return report


def _strip_timing(obj):
    if isinstance(obj, dict):
        return {k: _strip_timing(v) for k, v in obj.items() if k != "seconds"}
    if isinstance(obj, list):
        return [_strip_timing(v) for v in obj]
    return obj


def cmd_tables(args) -> dict:
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    bubble_path = out_dir / "bubble_lambda.csv"
    with open(bubble_path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["n", "gamma", "lambda_estimate", "residual_cv", "periodization_error", "status"])
        for n, g in ((1, 0.25), (1, 0.5), (2, 0.25), (2, 0.5), (2, 0.75), (3, 0.5), (3, 0.75)):
            try:
                r = bubble_residual(BubbleParams(n, g))
                w.writerow([n, g, repr(r.lambda_estimate), repr(r.residual_norm), repr(r.periodization_error), "ok"])
            except FraclapError as exc:
                w.writerow([n, g, "", "", "", type(exc).__name__])
    dtn_path = out_dir / "d_gamma.csv"
    mesh = MeshSpec(J=1000, x_max=60.0)
    with open(dtn_path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["gamma", "d_gamma_estimate", "kappa", "fitted_exponent", "fit_deviation"])
        for j in range(1, 20):
            g = round(0.05 * j, 2)
            c = calibrate_dtn(g, DEFAULT_ETAS, mesh)
            w.writerow([g, repr(c.d_gamma_estimate), repr(c.kappa), repr(c.fitted_exponent), repr(c.fit_deviation)])
    return {"bubble_csv": str(bubble_path), "d_gamma_csv": str(dtn_path)}


# -- parser -----------------------------------------------------------------


def _add_mesh(p):
    d = MeshSpec()
    p.add_argument("--J", type=int, default=d.J, help="cells on the graded mesh")
    p.add_argument("--x-max", type=float, default=None, help="truncation depth (default: decay/|eta|)")
    p.add_argument("--grading", type=float, default=None, help="mesh grading exponent (default: max(2, 1/gamma))")
    p.add_argument("--decay", type=float, default=d.decay, help="decay lengths kept when x-max is automatic")
    p.add_argument("--solver-tol", type=float, default=d.tol, help="accepted Richardson correction")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fraclap", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"fraclap {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def add(name, func, help_):
        p = sub.add_parser(name, help=help_)
        p.set_defaults(func=func)
        if name in ("apply", "pv"):
            p.add_argument("--out", dest="output", default=None, help="output field file")
            p.add_argument("--report", dest="report", default=None, help="write the JSON report here instead of stdout")
        else:
            p.add_argument("--out", "--report", dest="report", default=None,
                           help="write the JSON report here instead of stdout")
        return p

    p = add("apply", cmd_apply, "spectral (-Delta)^gamma of a field file")
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--zero-mode-policy", choices=ZERO_MODE_POLICIES, default="annihilate")

    p = add("pv", cmd_pv, "principal-value (-Delta)^gamma, 0 < gamma < 1")
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--point", type=_int_list, default=None, help="grid index, e.g. 3,5")
    p.add_argument("--images", type=int, default=3)

    p = add("extend", cmd_extend, "solve the extension ODE for one mode")
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--eta", type=float, required=True)
    p.add_argument("--f0", type=float, default=1.0)
    p.add_argument("--profile-csv", default=None)
    _add_mesh(p)

    p = add("calibrate", cmd_calibrate, "fit the Dirichlet-to-Neumann power law")
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--etas", type=_float_list, default=list(DEFAULT_ETAS))
    p.add_argument("--fit-tol", type=float, default=1e-3)
    _add_mesh(p)

    p = add("lambda", cmd_lambda, "model factor lambda(n, k, gamma)")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--gamma", type=float, required=True)

    p = add("admissible", cmd_admissible, "admissibility predicate, single triple or CSV scan")
    p.add_argument("--n", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--gamma", type=float)
    p.add_argument("--scan", default=None, help="write a CSV scan here")
    p.add_argument("--n-min", type=int, default=3)
    p.add_argument("--n-max", type=int, default=10)
    p.add_argument("--gamma-steps", type=int, default=20, help="gamma = (n/2) j / steps, 0 < j < steps")

    p = add("signwalk", cmd_signwalk, "sign of the admissibility ratio along gamma")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--gamma-steps", type=int, default=40)

    p = add("model-verify", cmd_model_verify, "fit the action on the homogeneous model")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--amplitude", type=float, default=1.0)
    p.add_argument("--points", type=int, default=None, help="points per axis (default depends on n-k)")
    p.add_argument("--box-length", type=float, default=1.0)
    p.add_argument("--mollification-radius", type=float, default=None)
    p.add_argument("--stability-tol", type=float, default=5e-3)

    p = add("bubble", cmd_bubble, "residual of the bubble against the critical equation")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--mu", type=float, default=1.0)
    p.add_argument("--amplitude", type=float, default=1.0)
    p.add_argument("--center", type=_float_list, default=None)
    p.add_argument("--origin", type=_float_list, default=None, help="lower box corner")
    p.add_argument("--points", type=int, default=None)
    p.add_argument("--box-length", type=float, default=None)
    p.add_argument("--max-boundary-ratio", type=float, default=0.25)
    p.add_argument("--max-cv", type=float, default=0.05)

    p = add("growth", cmd_growth, "growth sup and completeness probe from CSV samples")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--samples", default=None, help="CSV rows: z_1..z_n,u")
    p.add_argument("--lambda-set", default=None, help="CSV rows: q_1..q_n")
    p.add_argument("--ray", default=None, help="CSV rows: s,u with s decreasing")
    p.add_argument("--tail", type=int, default=8)

    p = add("ft-oracle", cmd_ft_oracle, "Hankel quadrature for the homogeneous Fourier constant")
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--intervals", type=int, default=QuadratureSpec().intervals)
    p.add_argument("--quad-tol", type=float, default=QuadratureSpec().tol)
    p.add_argument("--match-tol", type=float, default=1e-3)

    p = add("selftest", cmd_selftest, "run the acceptance criteria and print a pass/fail table")
    p.add_argument("--criteria", type=_int_list, default=None, help="subset, e.g. 1,2,5")

    p = add("tables", cmd_tables, "regenerate the CSV tables under data/")
    p.add_argument("--out-dir", default="data")
    return parser


def _config(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "report")}


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse: 2 for usage errors, 0 for --help/--version
        return int(exc.code or 0)
    report = {"version": __version__, "subcommand": args.subcommand, "config": _config(args)}
    code = 0
    try:
        report["result"] = args.func(args)
        if args.subcommand == "selftest" and not report["result"]["all_passed"]:
            code = 1
    except FraclapError as exc:
        code = 2
        report["error"] = {"type": type(exc).__name__, "contract": exc.contract, "message": str(exc)}
        print(f"fraclap: error [{exc.contract}]: {exc}", file=sys.stderr)
    except Exception as exc:  # noqa: BLE001
        code = 1
        report["error"] = {"type": type(exc).__name__, "contract": None, "message": str(exc)}
        print(f"fraclap: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
    text = _dump(report)
    if args.report:
        Path(args.report).write_text(text)
    else:
        sys.stdout.write(text)
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
