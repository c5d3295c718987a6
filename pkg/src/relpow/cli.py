"""relpow command line.

Complex numbers are written "re,im" on the command line and [re, im] in JSON.
Exit codes: 0 success, 1 numeric failure (the report is still written), 2 usage error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys

import numpy as np

from . import problem as pb
from .errors import RelpowError


class UsageError(Exception):
    pass


def _complex_arg(text: str) -> complex:
    try:
        return pb.parse_complex(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _vector_arg(text: str) -> np.ndarray:
    """'1,0;0.5,-1' -> [1, 0.5-1j]."""
    try:
        return np.array([pb.parse_complex(p) for p in text.split(";") if p.strip()], dtype=complex)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _times_arg(text: str) -> list:
    """'0.5,1,2' or 'start:stop:count'."""
    try:
        if ":" in text:
            a, b, n = text.split(":")
            return [float(v) for v in np.linspace(float(a), float(b), int(n))]
        return [float(v) for v in text.split(",")]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="relpow", description="Powers and semigroups of linear relations.")
    p.add_argument("--config", help="JSON file overriding the numeric defaults")
    p.add_argument("--seed", type=int, help="seed for all sampling")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--instance", required=True, help="instance JSON file")
        sp.add_argument("--out", help="output file (stdout when omitted)")

    sp = sub.add_parser("resolve", help="(lambda - A)^{-1} C")
    common(sp)
    sp.add_argument("--lambda", dest="lam", type=_complex_arg, required=True)

    sp = sub.add_parser("power", help="(-A)^{-b}_{C1}")
    common(sp)
    sp.add_argument("--b", type=_complex_arg, required=True)
    sp.add_argument("--route", choices=["contour", "balakrishnan", "moment"], default="contour")
    sp.add_argument("--n-moment", type=int)
    sp.add_argument("--tol", type=float)

    sp = sub.add_parser("evolve", help="trajectory of an incomplete problem as CSV")
    common(sp)
    sp.add_argument("--problem", choices=["fp", "p2"], default="fp")
    sp.add_argument("--beta", type=float, default=1.0)
    sp.add_argument("--theta", type=float, default=0.0)
    sp.add_argument("--gamma", type=float)
    sp.add_argument("--x", type=_vector_arg, help="initial vector as 're,im;re,im;...'")
    sp.add_argument("--times", type=_times_arg, default=[0.5, 1.0, 1.5, 2.0])
    sp.add_argument("--tol", type=float)

    sp = sub.add_parser("verify", help="run identity residual suites")
    common(sp)
    sp.add_argument("--id", dest="ids", default="all", help="identity name, comma list, or 'all'")
    sp.add_argument("--tol", type=float)
    sp.add_argument("--samples", type=int)
    sp.add_argument("--perturb", type=float, default=0.0, help="negative control: perturb the claimed side")
    sp.add_argument("--timing", action="store_true", help="record runtimes (reports stop being reproducible)")

    sp = sub.add_parser("certify", help="sampled resolvent bound over the region")
    common(sp)
    sp.add_argument("--bound", type=float)
    return p


def _load_config(path):
    if not path:
        return None
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None


def _load_instance(args):
    cfg = _load_config(args.config)
    try:
        spec = pb.ProblemSpec.load(args.instance, cfg)
    except OSError as exc:
        raise UsageError(f"cannot read instance: {exc}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"instance is not valid JSON: {exc}") from None
    except RelpowError as exc:
        raise UsageError(f"invalid instance: {exc}") from None
    if args.seed is not None:
        spec.defaults["seed"] = args.seed
    return spec


def _emit(text: str, out: str | None):
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _dump(blob) -> str:
    return json.dumps(blob, indent=2, sort_keys=True) + "\n"


def cmd_resolve(args, spec):
    from .resolvent import c_resolvent
    R = c_resolvent(spec.A, spec.C, args.lam)
    _emit(json.dumps(pb.encode_matrix(R)) + "\n", args.out)
    return 0


def cmd_power(args, spec):
    from . import contour as ct
    from . import powers as pw
    tol = args.tol or spec.defaults["tol_quadrature"]
    M = pw.neg_power(spec.A, spec.C1, pw.PowerSpec(args.b, args.route, args.n_moment), tol,
                     ct.contour_for(spec.region) if args.route == "contour" else None)
    _emit(json.dumps(pb.encode_matrix(M)) + "\n", args.out)
    return 0


def cmd_evolve(args, spec):
    from . import semigroup as sg
    tol = args.tol or spec.defaults["tol_quadrature"]
    x = np.ones(spec.n, dtype=complex) if args.x is None else args.x
    if x.size != spec.n:
        raise UsageError(f"--x has {x.size} entries, the instance has n={spec.n}")
    if spec.region.mode != "HS":
        raise UsageError("evolve needs a sector region (mode HS)")
    if args.problem == "fp":
        gamma = args.gamma if args.gamma is not None else spec.defaults["gamma"]
        prob = sg.FPBeta(args.beta, args.theta, gamma)
    else:
        prob = sg.P2()
    traj = sg.solve_incomplete(spec.A, spec.C1, prob, x, args.times, tol, spec.region.theta)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    head = ["t"]
    for i in range(spec.n):
        head += [f"x{i}_re", f"x{i}_im"]
    w.writerow(head)
    for row in traj.as_rows():
        w.writerow([repr(float(v)) for v in row])
    _emit(buf.getvalue(), args.out)
    return 0


def cmd_verify(args, spec):
    from . import verify as vf
    ids = "all" if args.ids == "all" else [s.strip() for s in args.ids.split(",") if s.strip()]
    try:
        threads = max(1, int(os.environ.get("RELPOW_THREADS", "1")))
    except ValueError:
        raise UsageError("RELPOW_THREADS must be an integer") from None
    try:
        reports = vf.run_suite(ids, spec, args.tol, args.samples, threads=threads, perturb=args.perturb)
    except vf.UnknownIdentity as exc:
        raise UsageError(str(exc)) from None
    _emit(_dump(vf.suite_json(reports, args.timing)), args.out)
    for r in reports:
        print(f"{'PASS' if r.passed else 'FAIL'} {r.identity_id} max={r.max_residual:.3e} tol={r.tol:.1e}",
              file=sys.stderr)
    return 0 if all(r.passed for r in reports) else 1


def cmd_certify(args, spec):
    from .resolvent import Grid, region_certify
    bound = args.bound or spec.defaults["certify_bound"]
    cert = region_certify(spec.A, spec.C, spec.region, Grid(**spec.defaults["grid"]), bound)
    _emit(_dump(cert.to_json()), args.out)
    return 0 if cert.passed else 1


COMMANDS = {"resolve": cmd_resolve, "power": cmd_power, "evolve": cmd_evolve,
            "verify": cmd_verify, "certify": cmd_certify}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)          # exits with 2 on usage errors
    try:
        spec = _load_instance(args)
        return COMMANDS[args.command](args, spec)
    except UsageError as exc:
        print(f"relpow: error: {exc}", file=sys.stderr)
        return 2
    except RelpowError as exc:
        report = {"error": type(exc).__name__, "message": str(exc)}
        if args.out:
            _emit(_dump(report), args.out)
        print(f"relpow: numeric failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
