"""Batch command-line front end.

Every number in the outputs is produced by a library call; the CLI only
parses configuration, dispatches, and writes CSV.  Exit codes: 0 success,
2 validation failure, 3 consistency/certificate failure, 4 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import fileio
from .errors import (
    ConsistencyViolated,
    DataError,
    GeometryError,
    InitialConditionViolated,
    NonDiagonalRicci,
    NonScalarCasimir,
    OrbisolError,
    ParityViolated,
    SingularMetric,
    StepSizeUnderflow,
)
from .flow import first_integral_residual, integrate, soliton_residual_along
from .geometry import DiagonalTensor, validate_geometry
from .indeterminacy import indeterminacy_total, kernel_scan
from .recursion import InitialData, check_initial_conditions, jet_residual, solve_series
from .skeletons import resolve_geometry

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_CERTIFICATE = 3
EXIT_NUMERICAL = 4

_VALIDATION_ERRORS = (DataError, GeometryError, InitialConditionViolated,
                      NonScalarCasimir)
_CERTIFICATE_ERRORS = (ConsistencyViolated, ParityViolated)
_NUMERICAL_ERRORS = (StepSizeUnderflow, SingularMetric, NonDiagonalRicci)


def _load_config(args):
    cfg = {}
    if args.config:
        with open(args.config) as fh:
            cfg.update(json.load(fh))
    for key in ("geometry", "epsilon", "u2", "u0", "order", "t0", "t_end",
                "rtol", "atol", "out", "n", "k", "exact"):
        v = getattr(args, key, None)
        if v is not None:
            cfg[key] = v
    if getattr(args, "L1", None):
        cfg["L1"] = dict(item.split("=") for item in args.L1)
    if getattr(args, "kernel", None):
        kp = cfg.setdefault("kernel_params", {})
        for item in args.kernel:
            m, coeffs = item.split(":")
            kp[m] = [float(c) for c in coeffs.split(",")]
    return cfg


def _build_problem(cfg):
    name = cfg.get("geometry")
    if name is None:
        raise DataError("a geometry name or file is required")
    if os.path.exists(name):
        spec, preset = fileio.load_geometry(name), {}
    else:
        spec, preset = resolve_geometry(name, k=cfg.get("k"), n=cfg.get("n"),
                                        epsilon=cfg.get("epsilon"))
    eps = cfg.get("epsilon")
    if eps is None:
        eps = preset.get("epsilon")
    u2 = cfg.get("u2")
    if u2 is None:
        u2 = preset.get("u2")
    if eps is None or u2 is None:
        raise DataError("epsilon and u2 must be given (no preset covers them)")
    L1_map = {k: float(v) for k, v in cfg.get("L1", {}).items()}
    L1 = DiagonalTensor.from_labels(spec, L1_map)
    kernel_params = {int(m): np.asarray(c, dtype=float)
                     for m, c in cfg.get("kernel_params", {}).items()}
    data = InitialData(
        epsilon=float(eps), L1=L1, u2=float(u2),
        kernel_params=kernel_params,
        order=int(cfg.get("order", cfg.get("series_order", 12))),
        u0=float(cfg.get("u0", 0.0)),
        exact=bool(cfg.get("exact", False)),
    )
    return spec, data


def _outdir(cfg):
    out = cfg.get("out") or cfg.get("outputs") or "."
    os.makedirs(out, exist_ok=True)
    return out


def cmd_series(args):
    cfg = _load_config(args)
    spec, data = _build_problem(cfg)
    sol = solve_series(spec, data)
    out = _outdir(cfg)
    path = os.path.join(out, "jet.csv")
    sol.to_csv(path)
    worst = sol.max_consistency_residual()
    print(f"jet through order {sol.order} written to {path}")
    print(f"max relative consistency residual: {worst:.3e}")
    for line in sol.free_param_log:
        print(f"  {line}")
    return EXIT_OK


def cmd_integrate(args):
    cfg = _load_config(args)
    spec, data = _build_problem(cfg)
    sol = solve_series(spec, data)
    t0 = float(cfg.get("t0", 0.05))
    t_end = float(cfg.get("t_end", 10.0))
    rtol = float(cfg.get("rtol", 1e-9))
    atol = float(cfg.get("atol", 1e-12))
    traj = integrate(spec, data, sol, t0, t_end, rtol=rtol, atol=atol)
    out = _outdir(cfg)
    path = os.path.join(out, "trajectory.csv")
    eps = float(data.epsilon)
    fileio.trajectory_to_csv(spec, traj, path, eps)
    if getattr(args, "emit_plot_data", False):
        fileio.plot_data_csv(spec, traj, os.path.join(out, "profiles.csv"))
    fi = np.max(np.abs(first_integral_residual(spec, eps, traj)))
    print(f"trajectory on [{t0}, {traj.reached:.6f}] written to {path}")
    print(f"handoff: {traj.handoff}")
    print(f"max |first-integral residual|: {fi:.3e}")
    if traj.degenerate_time is not None:
        print(f"metric degeneration detected at t = {traj.degenerate_time:.6f}")
    return EXIT_OK


def cmd_indeterminacy(args):
    cfg = _load_config(args)
    spec, _preset = (fileio.load_geometry(cfg["geometry"]), {}) \
        if os.path.exists(cfg.get("geometry", "")) \
        else resolve_geometry(cfg["geometry"], k=cfg.get("k"), n=cfg.get("n"))
    report = kernel_scan(spec, M_max=int(cfg.get("scan_limit", 50)))
    print(report.table())
    out = cfg.get("out")
    if out:
        os.makedirs(out, exist_ok=True)
        fileio.kernel_report_to_csv(report, os.path.join(out, "kernels.csv"))
    indeterminacy_total(report)
    return EXIT_OK


def cmd_verify(args):
    cfg = _load_config(args)
    spec, data = _build_problem(cfg)
    eps = float(data.epsilon)
    failures = []

    def check(name, ok, detail=""):
        print(f"[{'PASS' if ok else 'FAIL'}] {name} {detail}".rstrip())
        if not ok:
            failures.append(name)

    vrep = validate_geometry(spec)
    check("geometry invariants", vrep.passed)
    icr = check_initial_conditions(spec, data)
    check("initial conditions", icr.passed)
    sol = solve_series(spec, data)
    worst = sol.max_consistency_residual()
    check("series consistency", worst <= 1e-8, f"(max rel residual {worst:.2e})")
    parity = max(sol.parity_residuals.values(), default=0.0)
    check("potential parity", parity <= 1e-9, f"(max odd leak {parity:.2e})")
    rx, ru = jet_residual(spec, data, sol)
    contact = max(rx.max_abs(), ru.max_abs())
    scale = max(1.0, sol.x_series().max_abs())
    check("jet contact", contact <= 1e-7 * scale, f"(residual {contact:.2e})")
    t0 = float(cfg.get("t0", 0.05))
    t_end = float(cfg.get("t_end", 5.0))
    traj = integrate(spec, data, sol, t0, t_end,
                     rtol=float(cfg.get("rtol", 1e-9)),
                     atol=float(cfg.get("atol", 1e-12)))
    fi = float(np.max(np.abs(first_integral_residual(spec, eps, traj))))
    check("first integral", fi <= 1e-6, f"(max residual {fi:.2e})")
    orb, trv = soliton_residual_along(spec, eps, traj)
    sr = float(max(np.max(orb), np.max(trv)))
    check("soliton residual", sr <= 1e-5, f"(max residual {sr:.2e})")
    if failures:
        return EXIT_CERTIFICATE
    return EXIT_OK


def _run_one(path):
    ns = argparse.Namespace(config=path, L1=None, kernel=None)
    for key in ("geometry", "epsilon", "u2", "u0", "order", "t0", "t_end",
                "rtol", "atol", "out", "n", "k", "exact"):
        setattr(ns, key, None)
    return path, cmd_verify(ns)


def cmd_sweep(args):
    jobs = args.jobs or 1
    codes = []
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            for path, code in ex.map(_run_one, args.configs):
                print(f"{path}: exit {code}")
                codes.append(code)
    else:
        for path in args.configs:
            _, code = _run_one(path)
            print(f"{path}: exit {code}")
            codes.append(code)
    return max(codes) if codes else EXIT_OK


def _add_common(p, with_data=True):
    p.add_argument("--geometry", help="builtin name (e.g. bryant-sphere(3)) or file path")
    p.add_argument("--config", help="JSON config file with RunConfig fields")
    p.add_argument("--n", type=int, help="size parameter for sphere/stiefel families")
    p.add_argument("--k", type=int, help="size parameter for gaussian-flat/abelian")
    p.add_argument("--out", help="output directory")
    if with_data:
        p.add_argument("--epsilon", type=float)
        p.add_argument("--u2", type=float)
        p.add_argument("--u0", type=float)
        p.add_argument("--order", type=int)
        p.add_argument("--exact", action="store_true", default=None,
                       help="exact rational coefficient mode")
        p.add_argument("--L1", nargs="*", metavar="LABEL=VALUE",
                       help="shape-operator values on minus summands")
        p.add_argument("--kernel", nargs="*", metavar="M:C1,C2",
                       help="kernel injection coefficients per order")
        p.add_argument("--t0", type=float)
        p.add_argument("--t-end", dest="t_end", type=float)
        p.add_argument("--rtol", type=float)
        p.add_argument("--atol", type=float)


def main(argv=None):
    ap = argparse.ArgumentParser(
        prog="orbisol",
        description="Cohomogeneity-one gradient Ricci solitons near a singular "
                    "orbit: series jets, continuation, certificates, "
                    "indeterminacy reports.",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("series", help="solve the singular-point series recursion")
    _add_common(p)
    p.set_defaults(func=cmd_series)

    p = sub.add_parser("integrate", help="continue the jet with the adaptive integrator")
    p.add_argument("--emit-plot-data", action="store_true")
    _add_common(p)
    p.set_defaults(func=cmd_integrate)

    p = sub.add_parser("indeterminacy", help="kernel scan and indeterminacy totals")
    _add_common(p, with_data=False)
    p.add_argument("--scan-limit", type=int, default=None)
    p.set_defaults(func=cmd_indeterminacy)

    p = sub.add_parser("verify", help="run all certificates and report pass/fail")
    _add_common(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("sweep", help="verify several configs, optionally in parallel")
    p.add_argument("configs", nargs="+")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_sweep)

    args = ap.parse_args(argv)
    try:
        code = args.func(args)
    except _VALIDATION_ERRORS as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        code = EXIT_VALIDATION
    except _CERTIFICATE_ERRORS as exc:
        print(f"certificate failure: {exc}", file=sys.stderr)
        code = EXIT_CERTIFICATE
    except _NUMERICAL_ERRORS as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        code = EXIT_NUMERICAL
    except OrbisolError as exc:
        print(f"error: {exc}", file=sys.stderr)
        code = EXIT_NUMERICAL
    return code


if __name__ == "__main__":
    sys.exit(main())
