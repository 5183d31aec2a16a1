"""Command-line entry point.

Exit status: 0 on success or a passing report, 1 on validation failure or a
failing report, 2 on usage errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction

import numpy as np

from . import presets, reports
from .divisor import ToricDivisor, cartier_data, extend_to_completion, parse_divisor
from .errors import ToricError
from .fan import Cone, Fan, load_fan, parse_fan
from .flow import PhasePoint, flow_closed_form, flow_rk4
from .nearby import FRONT_SCHEDULE, FrontExperiment, front_convergence, picard_action_check, torus_action_check
from .sheaf import (convolve_stalk, load_complex, singular_support, stalk, twisted_polytope_sheaf)
from .smoothing import (DEFAULT_SCHEDULE, QuadratureConfig, grad_smoothed_support, smoothed_support,
                        verify_gradient_limit, verify_limsup_containment, verify_uniform_bound)
from .suites import PRESETS, run_preset

DEFAULT_SEED = 20240611


class UsageError(Exception):
    pass


# -- argument helpers ----------------------------------------------------------------

def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.replace(" ", "").split(",") if v]
    except ValueError:
        raise UsageError(f"expected comma-separated numbers, got {text!r}") from None


def _rationals(text: str) -> list[Fraction]:
    try:
        return [Fraction(v) for v in text.replace(" ", "").split(",") if v]
    except ValueError:
        raise UsageError(f"expected comma-separated rationals, got {text!r}") from None


def _fan(arg: str) -> Fan:
    if os.path.exists(arg):
        return load_fan(arg)
    if arg.lower() in presets.FANS:
        return presets.fan_by_name(arg)
    raise UsageError(f"{arg!r} is neither a fan file nor a preset ({', '.join(sorted(presets.FANS))})")


def _divisor(arg: str) -> ToricDivisor:
    if os.path.exists(arg):
        with open(arg) as fh:
            return parse_divisor(json.load(fh))
    try:
        return ToricDivisor(tuple(int(v) for v in arg.split(",")))
    except ValueError:
        raise UsageError(f"{arg!r} is neither a divisor file nor a coefficient list") from None


def _cone(fan: Fan, arg: str) -> Cone:
    parts = [p for p in arg.replace(" ", "").split(",") if p != ""]
    if arg.startswith("#"):
        return sorted(fan.all_cones, key=lambda c: (c.dim, c.rays))[int(arg[1:])]
    return fan.cone([int(p) for p in parts])


def _quad(args) -> QuadratureConfig:
    return QuadratureConfig(method=getattr(args, "quadrature", "monte_carlo"),
                            sample_count=args.samples, seed=args.seed, tolerance=args.tol)


def _config(args) -> dict:
    skip = {"func", "handler"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _emit(args, report: dict, table=None) -> int:
    body = reports.wrap(report, _config(args))
    if getattr(args, "format", "json") == "csv" and table is not None:
        text = reports.csv_table(table[0], table[1]) if isinstance(table, tuple) else reports.csv_table(table)
    else:
        doc = body if getattr(args, "no_envelope", False) else reports.envelope(body)
        text = reports.dumps(doc) + "\n"
    if getattr(args, "out", None):
        with open(args.out, "w") as fh:
            fh.write(text)
    sys.stdout.write(text)
    return 0 if report.get("pass", True) else 1


# -- handlers --------------------------------------------------------------------------

def cmd_fan_validate(args) -> int:
    if not os.path.exists(args.file) and args.file.lower() in presets.FANS:
        fan = presets.fan_by_name(args.file)
        rep = fan.validation_report()
        rep.update({"experiment": "fan_validate", "pass": True})
        return _emit(args, rep)
    try:
        with open(args.file) as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        return _emit(args, {"experiment": "fan_validate", "valid": False, "error": str(exc), "pass": False})
    try:
        fan = parse_fan(doc)
    except ToricError as exc:
        return _emit(args, {"experiment": "fan_validate", "valid": False,
                            "error": f"{type(exc).__name__}: {exc}", "pass": False})
    rep = fan.validation_report()
    rep.update({"experiment": "fan_validate", "pass": True})
    return _emit(args, rep)


def cmd_divisor_cartier(args) -> int:
    fan, d = _fan(args.fan), _divisor(args.divisor)
    cd = cartier_data(fan, d)
    return _emit(args, {"experiment": "cartier_data", "divisor": list(d.coeffs), "cones": cd.table(),
                        "is_cartier": cd.is_cartier, "provenance": "exact", "pass": True})


def _new_coeffs(text):
    if not text:
        return {}
    if text.strip().startswith("{"):
        return {int(k): int(v) for k, v in json.loads(text).items()}
    out = {}
    for part in text.split(","):
        k, v = part.split(":")
        out[int(k)] = int(v)
    return out


def cmd_divisor_extend(args) -> int:
    fan, d, comp = _fan(args.fan), _divisor(args.divisor), _fan(args.completion)
    try:
        new = _new_coeffs(args.new_coeffs)
    except ValueError:
        raise UsageError("--new-coeffs expects 'ray:coeff,...' or a JSON object") from None
    comp, ext = extend_to_completion(fan, d, comp, new)
    cd = cartier_data(comp, ext)
    return _emit(args, {"experiment": "extend_to_completion", "extended": list(ext.coeffs),
                        "completion": comp.to_dict(), "cones": cd.table(), "provenance": "exact",
                        "pass": True})


def cmd_smooth_eval(args) -> int:
    fan, d = _fan(args.fan), _divisor(args.divisor)
    cd = cartier_data(fan, d)
    q = _quad(args)
    xi = _floats(args.xi)
    if args.op == "eval":
        ev = grad_smoothed_support(fan, cd, args.eps, xi, q, with_fd=False)
        r = float(np.linalg.norm(xi))
        rep = {"experiment": "smooth_eval", "eps": args.eps, "xi": xi, "phi_eps": r * ev.f_eps,
               "stderr": r * ev.stderr_f, "provenance": {"phi_eps": "monte_carlo"}, "pass": True}
    else:
        ev = grad_smoothed_support(fan, cd, args.eps, xi, q, with_fd=True)
        rep = {"experiment": "smooth_grad", "eps": args.eps, "xi": xi, "f_eps": ev.f_eps,
               "df_eps": ev.df_eps, "g_eps": ev.g_eps, "dphi_eps": ev.dphi_eps, "fd_dphi": ev.fd_dphi,
               "weights": ev.weights, "stderr_dphi": ev.stderr_dphi, "stderr_g": ev.stderr_g,
               "provenance": {k: "monte_carlo" for k in ("f_eps", "df_eps", "g_eps", "dphi_eps",
                                                         "fd_dphi", "weights")},
               "pass": True}
    return _emit(args, rep)


def cmd_smooth_verify(args) -> int:
    fan, d = _fan(args.fan), _divisor(args.divisor)
    cd = cartier_data(fan, d)
    q = _quad(args)
    sched = _floats(args.schedule) if args.schedule else list(DEFAULT_SCHEDULE)
    if args.kind in ("limit", "limsup") and not args.cone:
        raise UsageError(f"smooth verify {args.kind} needs --cone")
    if args.kind == "limit":
        rep = verify_gradient_limit(fan, cd, _cone(fan, args.cone), sched, q)
    elif args.kind == "limsup":
        rep = verify_limsup_containment(fan, cd, _cone(fan, args.cone), sched, args.points, q, args.seed)
    else:
        rep = verify_uniform_bound(fan, cd, args.eps, args.points, q, args.seed)
    return _emit(args, rep, table=rep["rows"])


def cmd_flow_run(args) -> int:
    fan, d = _fan(args.fan), _divisor(args.divisor)
    cd = cartier_data(fan, d)
    q = _quad(args)
    p = PhasePoint(tuple(_floats(args.x)), tuple(_floats(args.xi)), torus=args.torus)
    if args.method == "rk4":
        res = flow_rk4(fan, cd, args.eps, args.t, p, args.steps, q, record=True)
        traj = res.trajectory
    else:
        res = flow_closed_form(fan, cd, args.eps, args.t, p, q)
        traj = ((0.0, *p.base, *p.covector), (args.t, *res.endpoint.base, *res.endpoint.covector))
    n = fan.dim
    cols = ["s"] + [f"x{i + 1}" for i in range(n)] + [f"xi{i + 1}" for i in range(n)]
    rows = [dict(zip(cols, r)) for r in traj]
    rep = {"experiment": "flow", "method": res.method, "steps": res.steps, "eps": res.eps, "t": res.t,
           "start": {"x": p.base, "xi": p.covector},
           "endpoint": {"x": res.endpoint.base, "xi": res.endpoint.covector},
           "covector_drift": res.covector_drift, "trajectory": rows,
           "provenance": {"endpoint": "monte_carlo"}, "pass": True}
    return _emit(args, rep, table=(rows, cols))


def cmd_sheaf_build(args) -> int:
    fan, d = _fan(args.fan), _divisor(args.divisor)
    cx = twisted_polytope_sheaf(fan, cartier_data(fan, d))
    text = cx.to_json() + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    sys.stdout.write(text)
    return 0


def cmd_sheaf_stalk(args) -> int:
    cx = load_complex(args.complex)
    rep = stalk(cx, _rationals(args.x)).to_dict()
    rep.update({"experiment": "stalk", "provenance": "exact", "pass": True})
    return _emit(args, rep)


def cmd_sheaf_convolve(args) -> int:
    fan = _fan(args.fan)
    f = twisted_polytope_sheaf(fan, cartier_data(fan, _divisor(args.d1)))
    g = twisted_polytope_sheaf(fan, cartier_data(fan, _divisor(args.d2)))
    rep = convolve_stalk(f, g, _rationals(args.x), args.method).to_dict()
    rep.update({"experiment": "convolve_stalk", "provenance": "exact", "pass": True})
    return _emit(args, rep)


def cmd_sheaf_ss(args) -> int:
    fan, d = _fan(args.fan), _divisor(args.divisor)
    cd = cartier_data(fan, d)
    c = _cone(fan, args.cone)
    comps = singular_support(fan, c, cd.chi[c])
    return _emit(args, {"experiment": "singular_support", "cone": list(c.rays),
                        "components": [s.to_dict() for s in comps], "provenance": "exact", "pass": True})


def cmd_verify(args) -> int:
    fan = _fan(args.fan)
    d1 = _divisor(args.d1)
    if args.kind == "front":
        cd = cartier_data(fan, d1)
        q = _quad(args)
        sched = _floats(args.schedule) if args.schedule else list(FRONT_SCHEDULE)
        cones = [_cone(fan, args.cone)] if args.cone else list(fan.maximal_cones)
        subs = [front_convergence(FrontExperiment(fan, cd, c, sched, args.points_per_stratum, args.seed, q))
                for c in cones]
        rows = [dict(r, cone=",".join(map(str, s["params"]["cone"]))) for s in subs for r in s["rows"]]
        rep = {"experiment": "front_convergence", "reports": subs, "pass": all(s["pass"] for s in subs),
               "rows": rows}
        return _emit(args, rep, table=(rows, ("cone", "eps", "quantity", "bound", "pass")))
    if not args.d2:
        raise UsageError(f"verify {args.kind} needs --d2")
    d2 = _divisor(args.d2)
    points = args.points if args.points is not None else (50 if args.kind == "picard" else 20)
    if args.kind == "picard":
        rep = picard_action_check(fan, d1, d2, points, args.seed)
    else:
        rep = torus_action_check(fan, d1, d2, points, args.seed, args.radius)
    return _emit(args, rep)


def cmd_suite_run(args) -> int:
    rep = run_preset(args.preset, _quad(args), args.seed)
    return _emit(args, rep)


# -- parser -----------------------------------------------------------------------------------

def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="random seed")
    p.add_argument("--samples", type=int, default=argparse.SUPPRESS, help="Monte Carlo sample count")
    p.add_argument("--tol", type=float, default=argparse.SUPPRESS, help="numerical tolerance")
    p.add_argument("--out", default=argparse.SUPPRESS, help="also write the output to this file")
    p.add_argument("--format", choices=("json", "csv"), default=argparse.SUPPRESS)
    p.add_argument("--no-envelope", action="store_true", default=argparse.SUPPRESS,
                   help="omit the timestamp envelope")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    top = argparse.ArgumentParser(prog="toric-ccc", description=__doc__.splitlines()[0])
    top.add_argument("--seed", type=int, default=DEFAULT_SEED)
    top.add_argument("--samples", type=int, default=100_000)
    top.add_argument("--tol", type=float, default=1e-3)
    top.add_argument("--out", default=None)
    top.add_argument("--format", choices=("json", "csv"), default="json")
    top.add_argument("--no-envelope", action="store_true")
    sub = top.add_subparsers(dest="command", required=True)

    def leaf(parent, name, func, **kw):
        p = parent.add_parser(name, parents=[common], **kw)
        p.set_defaults(func=func)
        return p

    # fan
    fan = sub.add_parser("fan", help="fan utilities").add_subparsers(dest="fan_cmd", required=True)
    p = leaf(fan, "validate", cmd_fan_validate, help="validate a fan document")
    p.add_argument("file")

    # divisor
    div = sub.add_parser("divisor", help="Cartier data and extensions").add_subparsers(dest="div_cmd", required=True)
    p = leaf(div, "cartier", cmd_divisor_cartier, help="print the chi table")
    p.add_argument("fan")
    p.add_argument("divisor")
    p = leaf(div, "extend", cmd_divisor_extend, help="extend a divisor to a completion")
    p.add_argument("fan")
    p.add_argument("divisor")
    p.add_argument("completion")
    p.add_argument("--new-coeffs", default="", help="'ray:coeff,...' indexed by completion rays")

    # smooth
    sm = sub.add_parser("smooth", help="smoothed support functions").add_subparsers(dest="sm_cmd", required=True)
    for op in ("eval", "grad"):
        p = leaf(sm, op, cmd_smooth_eval, help=f"{op} of phi_eps at one covector")
        p.set_defaults(op=op)
        p.add_argument("--fan", required=True)
        p.add_argument("--divisor", required=True)
        p.add_argument("--eps", type=float, required=True)
        p.add_argument("--xi", required=True)
        p.add_argument("--quadrature", choices=("monte_carlo", "product_grid"), default="monte_carlo")
    p = leaf(sm, "verify", cmd_smooth_verify, help="limit, limsup and uniform-bound reports")
    p.add_argument("kind", choices=("limit", "limsup", "bound"))
    p.add_argument("--fan", required=True)
    p.add_argument("--divisor", required=True)
    p.add_argument("--cone", help="ray indices, e.g. '0,1'")
    p.add_argument("--eps", type=float, default=0.1)
    p.add_argument("--schedule")
    p.add_argument("--points", type=int, default=100)
    p.add_argument("--quadrature", choices=("monte_carlo", "product_grid"), default="monte_carlo")

    # flow
    fl = sub.add_parser("flow", help="Hamiltonian flows").add_subparsers(dest="fl_cmd", required=True)
    p = leaf(fl, "run", cmd_flow_run, help="flow one phase point")
    p.add_argument("--fan", required=True)
    p.add_argument("--divisor", required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--x", required=True)
    p.add_argument("--xi", required=True)
    p.add_argument("--method", choices=("rk4", "closed"), default="closed")
    p.add_argument("--steps", type=int, default=64)
    p.add_argument("--torus", action="store_true")

    # sheaf
    sh = sub.add_parser("sheaf", help="shard complexes").add_subparsers(dest="sh_cmd", required=True)
    p = leaf(sh, "build", cmd_sheaf_build, help="write the complex P(D)")
    p.add_argument("--fan", required=True)
    p.add_argument("--divisor", required=True)
    p = leaf(sh, "stalk", cmd_sheaf_stalk, help="stalk cohomology of a complex file")
    p.add_argument("--complex", required=True)
    p.add_argument("--x", required=True)
    p = leaf(sh, "convolve", cmd_sheaf_convolve, help="convolution stalk of P(d1) and P(d2)")
    p.add_argument("--fan", required=True)
    p.add_argument("--d1", required=True)
    p.add_argument("--d2", required=True)
    p.add_argument("--x", required=True)
    p.add_argument("--method", choices=("lp", "minkowski"), default="lp")
    p = leaf(sh, "ss", cmd_sheaf_ss, help="singular support components of one shard")
    p.add_argument("--fan", required=True)
    p.add_argument("--divisor", required=True)
    p.add_argument("--cone", required=True, help="'#k' for the k-th cone, or ray indices '0,1'")

    # verify
    ve = sub.add_parser("verify", help="limit and Picard-action checks").add_subparsers(dest="ve_cmd", required=True)
    for kind in ("front", "picard", "torus"):
        p = leaf(ve, kind, cmd_verify, help=f"{kind} verification")
        p.set_defaults(kind=kind)
        p.add_argument("--fan", required=True)
        p.add_argument("--d1", required=True)
        p.add_argument("--d2")
        p.add_argument("--schedule")
        p.add_argument("--points", type=int)
        p.add_argument("--points-per-stratum", type=int, default=20)
        p.add_argument("--cone")
        p.add_argument("--radius", type=int, default=8)

    # suite
    su = sub.add_parser("suite", help="acceptance batteries").add_subparsers(dest="su_cmd", required=True)
    p = leaf(su, "run", cmd_suite_run, help="run a preset battery")
    p.add_argument("--preset", required=True, choices=sorted(PRESETS))
    return top


def dispatch(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)  # exits with status 2 on usage errors
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ToricError as exc:
        print(f"validation failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
