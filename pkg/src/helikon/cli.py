"""Command-line front end: solve, sweep, mesh, verify.

Exit codes: 0 success, 1 usage/configuration error, 2 mathematical failure
(no root in bracket, mesh of unsolved data without --force).  All structured
output is JSON (sorted keys) or CSV with canonical row order, so reruns are
byte-identical at any parallelism.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import __version__
from .periods import (abel_bilinear_check, axis_turning, cross_check_hpc,
                      end_residue, period_report)
from .solver import SolveFailure, solve_k, sweep
from .surface import (Mesh, apply_screw, export_mesh, helicoid_mesh,
                      immerse, mesh_report)
from .weierstrass import data_for, helicoid_data


def _default_workers() -> int:
    env = os.environ.get("HELIKON_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


def _write_json(path, payload) -> None:
    payload = dict(payload)
    payload["version"] = __version__
    text = json.dumps(payload, sort_keys=True, indent=2)
    if path == "-":
        sys.stdout.write(text + "\n")
    else:
        with open(path, "w") as fh:
            fh.write(text + "\n")


def cmd_solve(args) -> int:
    try:
        sol = solve_k(args.k,
                      theta_bracket=(args.theta_lo, args.theta_hi),
                      b_bracket=None if args.b_lo is None else (args.b_lo, args.b_hi),
                      tol_h=args.tol_h, tol_v=args.tol_v)
    except SolveFailure as exc:
        _write_json(args.out, {"error": str(exc),
                               "scan_table": [[None if v is None else float(v) for v in row]
                                              for row in exc.scan_table]})
        print(f"solve failed: {exc}", file=sys.stderr)
        return 2
    data = data_for(sol.theta_angle, sol.k, sol.b)
    res1, _ = end_residue(data, 1)
    res2, _ = end_residue(data, 2)
    payload = {
        "k": sol.k,
        "theta": sol.theta_angle,
        "b": sol.b,
        "a": sol.a,
        "residuals": {
            "horiz": sol.horiz_residual,
            "vert": sol.vert_residual,
            "cross_check": cross_check_hpc(data),
        },
        "residues": {"E1": [res1.real, res1.imag], "E2": [res2.real, res2.imag]},
        "abel_defect": abel_bilinear_check(data),
        "axis_turning": axis_turning(data),
        "iterations": sol.iterations,
    }
    _write_json(args.out, payload)
    return 0


def cmd_sweep(args) -> int:
    thetas = np.linspace(args.theta_lo, args.theta_hi, args.theta_n)
    bs = np.linspace(args.b_lo, args.b_hi, args.b_n)
    rows = sweep(args.k, thetas, bs, workers=args.jobs)
    lines = ["k,theta,b,horiz_residual,vert_residual,quad_err,flag"]
    for th, b, h, v, q, flag in rows:
        lines.append(f"{args.k!r},{th!r},{b!r},{h!r},{v!r},{q!r},{flag}")
    text = "\n".join(lines) + "\n"
    if args.out == "-":
        sys.stdout.write(text)
    else:
        with open(args.out, "w") as fh:
            fh.write(text)
    return 0


def cmd_mesh(args) -> int:
    if args.helicoid:
        if args.k is None:
            print("mesh --helicoid needs --k", file=sys.stderr)
            return 1
        mesh, check = helicoid_mesh(args.k, resolution=args.res, verify=True)
        report = {"helicoid": True, "k": args.k,
                  "closed_form_max_error": check}
        data = None
    else:
        if args.from_solution:
            with open(args.from_solution) as fh:
                sol = json.load(fh)
            k, theta, b = sol["k"], sol["theta"], sol["b"]
        elif args.k is not None and args.theta is not None and args.b is not None:
            k, theta, b = args.k, args.theta, args.b
        else:
            print("mesh needs --from, or --k/--theta/--b, or --helicoid --k",
                  file=sys.stderr)
            return 1
        data = data_for(theta, k, b)
        try:
            mesh = immerse(data, resolution=args.res, end_cutoff=args.cutoff,
                           force=args.force)
        except Exception as exc:
            print(f"mesh failed: {exc}", file=sys.stderr)
            return 2
        alt = immerse(data, resolution=args.res, end_cutoff=args.cutoff,
                      force=args.force, tree_order=1)
        report = mesh_report(data, mesh, mesh_alt=alt)
    if args.copies > 1:
        mesh = apply_screw(mesh, args.k if args.k is not None else mesh.screw_angle / (2 * np.pi),
                           args.copies)
    export_mesh(mesh, args.format, args.out, comment=f"v{__version__}")
    if args.report:
        _write_json(args.report, report)
    return 0


def cmd_verify(args) -> int:
    from .verify import run_battery

    results = run_battery(only=args.only, inject=args.inject)
    ok = all(r["pass"] for r in results)
    _write_json(args.out, {"checks": results, "all_pass": ok})
    for r in results:
        status = "PASS" if r["pass"] else "FAIL"
        print(f"[{status}] {r['name']}: {r['detail']}")
    return 0 if ok else 2


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="helikon",
                                description="Screw-invariant genus-one helicoid toolkit")
    sub = p.add_subparsers(dest="command", required=True)

    ps = sub.add_parser("solve", help="solve the period problem for one twist k")
    ps.add_argument("--k", type=float, required=True)
    ps.add_argument("--theta-lo", type=float, default=1.2)
    ps.add_argument("--theta-hi", type=float, default=2.2)
    ps.add_argument("--b-lo", type=float, default=None)
    ps.add_argument("--b-hi", type=float, default=None)
    ps.add_argument("--tol-h", type=float, default=1e-6)
    ps.add_argument("--tol-v", type=float, default=1e-6)
    ps.add_argument("--out", default="-")
    ps.set_defaults(func=cmd_solve)

    pw = sub.add_parser("sweep", help="residual field over a (theta, b) grid")
    pw.add_argument("--k", type=float, required=True)
    pw.add_argument("--theta-lo", type=float, default=1.2)
    pw.add_argument("--theta-hi", type=float, default=2.2)
    pw.add_argument("--theta-n", type=int, default=20)
    pw.add_argument("--b-lo", type=float, default=0.51)
    pw.add_argument("--b-hi", type=float, default=0.99)
    pw.add_argument("--b-n", type=int, default=20)
    pw.add_argument("--jobs", type=int, default=_default_workers())
    pw.add_argument("--out", default="-")
    pw.set_defaults(func=cmd_sweep)

    pm = sub.add_parser("mesh", help="triangulate a solved surface (or the helicoid)")
    pm.add_argument("--from", dest="from_solution", default=None,
                    help="solution JSON produced by `solve`")
    pm.add_argument("--helicoid", action="store_true")
    pm.add_argument("--k", type=float, default=None)
    pm.add_argument("--theta", type=float, default=None)
    pm.add_argument("--b", type=float, default=None)
    pm.add_argument("--force", action="store_true",
                    help="mesh unsolved parameters (exploratory)")
    pm.add_argument("--res", type=int, default=64)
    pm.add_argument("--cutoff", type=float, default=0.05)
    pm.add_argument("--copies", type=int, default=1)
    pm.add_argument("--format", choices=("obj", "ply"), default="obj")
    pm.add_argument("--out", required=True)
    pm.add_argument("--report", default=None)
    pm.set_defaults(func=cmd_mesh)

    pv = sub.add_parser("verify", help="run the built-in invariant battery")
    pv.add_argument("--only", default=None, help="run only checks whose name contains this")
    pv.add_argument("--inject", default=None,
                    help="test hook: perturb the named check to prove it can fail")
    pv.add_argument("--out", default="-")
    pv.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code not in (0, None) else 0
    if getattr(args, "k", None) is not None and args.command in ("solve", "sweep"):
        if args.k <= 0.5:
            print(f"twist parameter k must exceed 1/2, got {args.k}", file=sys.stderr)
            return 1
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
