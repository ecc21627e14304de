"""Command line entry point.

Exit codes: 0 success, 1 mathematical failure (axiom violated, singular
Lagrangian, aborted integration), 2 usage or parse error.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from ..algebroid import Section, validate
from ..calculus import KForm
from ..errors import (AffalgError, AlgebroidError, EvaluationError, IntegrationAborted, ParseError,
                      SingularLagrangian)
from ..lagrangian import Lagrangian, cartan_one_form, cartan_two_form, derive_sode
from ..poisson import PoissonTensor
from ..prolong import complete_lift, prolong, vertical_lift
from ..symkernel import parse, sampling, simplify, to_text
from .specfile import SpecError, load

OK, FAILURE, USAGE = 0, 1, 2


class UsageError(AffalgError):
    pass


def _emit(args, payload: dict, lines):
    if args.json:
        sys.stdout.write(json.dumps(payload, sort_keys=True, indent=2, default=_json_default) + "\n")
    else:
        for line in lines:
            print(line)


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    return str(o)


def _form_lines(w: KForm, label):
    A = w.algebroid
    out = []
    for idx, v in w.items():
        out.append(f"{label}[{','.join(A.frame[i] for i in idx)}] = {to_text(v)}")
    return out or [f"{label} = 0"]


def _form_dict(w: KForm):
    A = w.algebroid
    return {",".join(A.frame[i] for i in idx): to_text(v) for idx, v in w.items()}


# -- verbs ----------------------------------------------------------------------

def cmd_validate(args):
    spec = load(args.file)
    A = spec.algebroid()
    report = validate(A, exact_function=spec.bound_exact(), debug=args.debug)
    lines = []
    for r in report.results:
        d = r.to_dict()
        lines.append(f"{r.name:16s} {d['result']:8s} ({r.checked} identities)")
        for f in r.failures[:3]:
            w = ", ".join(f"{k}={v:.6g}" for k, v in (f["witness"] or {}).items())
            lines.append(f"    {f['identity']}: value {f['value']!r} at {{{w}}}")
    lines.append("all axioms pass" if report.passed else "axiom check FAILED")
    _emit(args, report.to_dict(), lines)
    return OK if report.passed else FAILURE


def _lagrangian(spec):
    if spec.lagrangian is None:
        raise UsageError(f"{spec.source}: spec has no 'lagrangian' entry")
    return Lagrangian(spec.algebroid(), spec.bound_lagrangian())


def cmd_derive(args):
    spec = load(args.file)
    lag = _lagrangian(spec)
    sode = derive_sode(lag)
    A = lag.algebroid
    xdot = sode.base_field(None if sode.explicit else _placeholders(A))[: len(A.chart)]
    payload = {"lagrangian": to_text(lag.L), "xdot": {x: to_text(e) for x, e in zip(A.chart.names, xdot)}}
    lines = [f"xdot_{x} = {to_text(e)}" for x, e in zip(A.chart.names, xdot)]
    if sode.explicit:
        payload["forces"] = {f"F_{a + 1}": to_text(f) for a, f in enumerate(sode.forces)}
        lines += [f"F_{a + 1} = {to_text(f)}" for a, f in enumerate(sode.forces)]
    else:
        payload["implicit"] = {
            "hessian": [[to_text(g) for g in row] for row in sode.hessian],
            "rhs": [to_text(r) for r in sode.rhs],
        }
        lines.append("forces solve g F = rhs with")
        for a, (row, r) in enumerate(zip(sode.hessian, sode.rhs)):
            lines.append(f"  [{', '.join(to_text(g) for g in row)}] . F = {to_text(r)}")
    _emit(args, payload, lines)
    return OK


def _placeholders(A):
    from ..lagrangian import force_placeholders

    return force_placeholders(A.dim)


def cmd_lift(args):
    spec = load(args.file)
    A = spec.algebroid()
    parts = [p.strip() for p in args.section.split(",")]
    if len(parts) != A.rank:
        raise UsageError(f"section needs {A.rank} comma-separated components ({', '.join(A.frame)})")
    try:
        coeffs = tuple(simplify(parse(p, A.chart.names)) for p in parts)
    except ParseError as exc:
        raise UsageError(f"section: {exc}") from None
    zeta = Section(A, coeffs)
    P = prolong(A)
    zc, zv = complete_lift(P, zeta), vertical_lift(P, zeta)

    def comps(s):
        return {P.frame[i]: to_text(c) for i, c in enumerate(s.coeffs) if not c.is_zero_literal}

    payload = {"section": {A.frame[i]: to_text(c) for i, c in enumerate(coeffs)},
               "complete": comps(zc), "vertical": comps(zv)}
    _emit(args, payload, [f"complete: {zc}", f"vertical: {zv}"])
    return OK


def cmd_poisson(args):
    spec = load(args.file)
    A = spec.algebroid()
    P = PoissonTensor(A)
    if args.F is not None:
        if args.G is None:
            raise UsageError("poisson needs two expressions (F and G) or none")
        try:
            F, G = parse(args.F, P.chart.names), parse(args.G, P.chart.names)
        except ParseError as exc:
            raise UsageError(str(exc)) from None
        b = simplify(P.bracket(F, G))
        _emit(args, {"F": to_text(F), "G": to_text(G), "bracket": to_text(b)}, [f"{{F, G}} = {to_text(b)}"])
        return OK
    names = P.mu + A.chart.names
    table = {}
    for i, a in enumerate(names):
        for b in names[i + 1:]:
            v = P[(a, b)]
            if not v.is_zero_literal:
                table[f"{a},{b}"] = to_text(v)
    lines = [f"{{{k.replace(',', ', ')}}} = {v}" for k, v in table.items()] or ["all brackets vanish"]
    _emit(args, {"coordinates": list(names), "brackets": table}, lines)
    return OK


def cmd_integrate(args):
    from ..dynamics import integrate

    spec = load(args.file)
    blk = spec.integrate or {}
    t0 = args.t0 if args.t0 is not None else float(blk.get("t0", 0))
    t1 = args.t1 if args.t1 is not None else blk.get("t1")
    h = args.h if args.h is not None else blk.get("h")
    if t1 is None or h is None:
        raise UsageError("t1 and h are required (integrate block or --t1/--h)")
    t1, h = float(t1), float(h)
    if not h > 0:
        raise UsageError("--h must be positive")
    if not t1 > t0:
        raise UsageError("t1 must exceed t0")
    if "initial" not in blk:
        raise UsageError("spec has no integrate.initial state")
    lag = _lagrangian(spec)
    sode = derive_sode(lag)
    state0 = {k: float(v) for k, v in blk["initial"].items()}
    monitors = spec.bound_monitors()
    try:
        traj = integrate(sode, state0, t0, t1, h, monitors=monitors or None)
    except IntegrationAborted as exc:
        if args.out and exc.trajectory is not None:
            _write(exc.trajectory, args.out, spec, t0, t1, h)
        print(f"integration aborted: {exc}", file=sys.stderr)
        return FAILURE
    if args.out:
        _write(traj, args.out, spec, t0, t1, h)
    end = traj.endpoint()
    drift = {}
    for name, col in traj.monitors.items():
        ref = col[0]
        drift[name] = float(np.max(np.abs(col - ref)) / (abs(ref) if ref else 1.0))
    payload = {"fixture": spec.name, "t0": t0, "t1": t1, "h": h, "nodes": traj.nodes,
               "endpoint": {k: float(v) for k, v in end.items()},
               "max_adm_residual": float(traj.residual.max()), "monitor_relative_drift": drift}
    lines = [f"{traj.nodes} nodes, t = {t0:g} .. {traj.t[-1]:.6g}, h = {h:g}",
             "endpoint: " + ", ".join(f"{k} = {v:.10g}" for k, v in end.items()),
             f"max admissibility residual: {traj.residual.max():.3g}"]
    lines += [f"{name}: relative drift {v:.3g}" for name, v in drift.items()]
    _emit(args, payload, lines)
    return OK


def _write(traj, out, spec, t0, t1, h):
    from ..symkernel import sampling_config

    cfg = sampling_config()
    if Path(out).suffix.lower() == ".json":
        traj.to_json(out, {"fixture": spec.name, "t0": t0, "t1": t1, "tol": cfg.tol, "samples": cfg.samples})
    else:
        traj.to_csv(out)


def cmd_export_forms(args):
    spec = load(args.file)
    lag = _lagrangian(spec)
    theta, omega = cartan_one_form(lag), cartan_two_form(lag)
    payload = {"Theta_L": _form_dict(theta), "Omega_L": _form_dict(omega)}
    _emit(args, payload, _form_lines(theta, "Theta_L") + _form_lines(omega, "Omega_L"))
    return OK


# -- parser -----------------------------------------------------------------------

def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("--seed", type=int, default=None, help="seed for sampled zero tests")
    common.add_argument("--tol", type=float, default=None, help="absolute zero-test tolerance")
    common.add_argument("--out", default=None, help="output path (trajectory .csv or .json)")

    p = argparse.ArgumentParser(prog="affalg", description="Affine Lie algebroid toolkit.")
    sub = p.add_subparsers(dest="verb", required=True)

    s = sub.add_parser("validate", parents=[common], help="check the algebroid axioms")
    s.add_argument("file")
    s.add_argument("--debug", action="store_true", help="also run the direct triple-bracket Jacobi check")
    s.set_defaults(run=cmd_validate)

    s = sub.add_parser("derive", parents=[common], help="print the Lagrangian pseudo-SODE")
    s.add_argument("file")
    s.set_defaults(run=cmd_derive)

    s = sub.add_parser("lift", parents=[common], help="complete and vertical lift of a section")
    s.add_argument("file")
    s.add_argument("section", help="comma-separated components on e_0, e_<fiber>...")
    s.set_defaults(run=cmd_lift)

    s = sub.add_parser("poisson", parents=[common], help="bracket table or bracket of two functions")
    s.add_argument("file")
    s.add_argument("F", nargs="?")
    s.add_argument("G", nargs="?")
    s.set_defaults(run=cmd_poisson)

    s = sub.add_parser("integrate", parents=[common], help="integrate the Lagrangian dynamics")
    s.add_argument("file")
    s.add_argument("--t0", type=float, default=None)
    s.add_argument("--t1", type=float, default=None)
    s.add_argument("--h", type=float, default=None)
    s.set_defaults(run=cmd_integrate)

    s = sub.add_parser("export-forms", parents=[common], help="print Cartan forms")
    s.add_argument("file")
    s.set_defaults(run=cmd_export_forms)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.tol is not None:
        if not args.tol > 0:
            print("error: --tol must be positive", file=sys.stderr)
            return USAGE
        overrides["tol"] = args.tol
    try:
        with sampling(**overrides):
            return args.run(args)
    except (SpecError, UsageError, ParseError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE
    except SingularLagrangian as exc:
        print(f"error: {exc}", file=sys.stderr)
        return FAILURE
    except (AlgebroidError, EvaluationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return FAILURE


if __name__ == "__main__":
    sys.exit(main())
