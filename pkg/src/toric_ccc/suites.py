"""Verification batteries, grouped the way the presets and the acceptance run use them.

Every suite returns ``{"suite", "checks": [...], "pass", "seconds"}`` where
each check carries its own ``pass`` flag and the numbers it was decided on.
"""

from __future__ import annotations

import math
import time
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import exact, presets
from .divisor import (ToricDivisor, cartier_data, check_cartier_conditions, check_continuity,
                      check_hull_property, extend_to_completion, SupportFunction)
from .fan import Fan, parse_fan
from .flow import PhasePoint, flow_closed_form, flow_rk4
from .nearby import (FRONT_SCHEDULE, FrontExperiment, front_convergence, picard_action_check,
                     torus_action_check, wall_avoiding_points, _convolution_box)
from .sheaf import _plan, convolve_stalk, stalk, twisted_polytope_sheaf
from .smoothing import (QuadratureConfig, R_constant, _evaluate, _relint_point, _unit,
                        grad_smoothed_support, hull_distance, region_weights_with_error,
                        stabilization_threshold, verify_uniform_bound)


def _suite(name: str, checks: list, start: float) -> dict:
    return {"suite": name, "checks": checks, "pass": all(c["pass"] for c in checks),
            "seconds": round(time.perf_counter() - start, 3)}


def _label(fan: Fan, d: ToricDivisor) -> str:
    return f"{fan.name} D={list(d.coeffs)}"


# -- exact -----------------------------------------------------------------------------------

def exact_suite(cases: Sequence[tuple[Fan, ToricDivisor]]) -> dict:
    t0 = time.perf_counter()
    checks = []
    for fan, d in cases:
        doc = fan.to_dict()
        again = parse_fan(doc)
        rep = again.validation_report()
        checks.append({"name": f"fan valid {fan.name}", "pass": bool(rep["valid"] and again.is_complete),
                       "cones": len(again.all_cones)})
        cd = cartier_data(fan, d)
        probs = check_cartier_conditions(cd)
        checks.append({"name": f"cartier conditions {_label(fan, d)}", "pass": not probs,
                       "problems": probs})
        hull = check_hull_property(cd)
        checks.append({"name": f"hull membership {_label(fan, d)}", "pass": hull["pass"],
                       "failures": hull["failures"]})
        cx = twisted_polytope_sheaf(fan, cd)
        checks.append({"name": f"d^2 = 0 {_label(fan, d)}", "pass": cx.d_squared_is_zero(),
                       "terms": len(cx.terms)})
        cont = check_continuity(SupportFunction(fan, cd), samples=10, seed=0)
        checks.append({"name": f"continuity {_label(fan, d)}", "pass": cont["pass"],
                       "violations": len(cont["violations"])})
    return _suite("exact", checks, t0)


# -- smoothing -----------------------------------------------------------------------------

def _random_units(n: int, count: int, seed: int) -> list[np.ndarray]:
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        v = rng.standard_normal(n)
        out.append(v / np.linalg.norm(v))
    return out


def smoothing_suite(fan: Fan, d: ToricDivisor, q: QuadratureConfig = QuadratureConfig(),
                    n_weights: int = 100, n_bound: int = 1000, n_fd: int = 50,
                    bound_eps: Sequence[float] = (0.1, 0.05), seed: int = 0) -> dict:
    t0 = time.perf_counter()
    cd = cartier_data(fan, d)
    checks = []
    # (a) weights form a partition of unity
    worst = 0.0
    for xh in _random_units(fan.dim, n_weights, seed):
        w, _ = region_weights_with_error(fan, cd, 0.1, xh, q)
        worst = max(worst, abs(sum(w.values()) - 1.0))
    checks.append({"name": "weight partition", "pass": worst <= 1e-3, "max_deviation": worst,
                   "points": n_weights, "provenance": "monte_carlo"})
    # (b) symmetry across a facet shared by two maximal cones
    if fan.dim >= 2:
        worst = 0.0
        for tau in fan.cones(fan.dim - 1):
            around = fan.maximal_containing(tau)
            if len(around) != 2:
                continue
            xh = _relint_point(fan, tau)
            w, _ = region_weights_with_error(fan, cd, 0.1, xh, q)
            worst = max(worst, max(abs(w[s] - 0.5) for s in around))
        checks.append({"name": "facet symmetry", "pass": worst <= 1e-2, "max_deviation": worst,
                       "provenance": "monte_carlo"})
    # (c) exact stabilization deep inside maximal cones
    ok, worst = True, 0.0
    for s in fan.maximal_cones:
        xh = _relint_point(fan, s)
        thr = stabilization_threshold(fan, s, xh)
        chi = np.array(cd.chi_float(s))
        for eps in (0.5 * thr, 0.25 * thr):
            ev = grad_smoothed_support(fan, cd, eps, xh, q, with_fd=False)
            err = float(np.linalg.norm(ev.dphi_eps - chi))
            worst = max(worst, err)
            ok &= err <= 3 * ev.sigma_mc
    checks.append({"name": "interior stabilization", "pass": bool(ok), "max_error": worst,
                   "provenance": "monte_carlo"})
    # (d) uniform bound
    for eps in bound_eps:
        rep = verify_uniform_bound(fan, cd, eps, n_bound, q, seed)
        row = rep["rows"][0]
        checks.append({"name": f"uniform bound eps={eps}", "pass": rep["pass"],
                       "max_slack": row["max_slack"], "bound": row["bound"], "failures": row["failures"],
                       "points": n_bound, "provenance": "monte_carlo"})
    # (e) analytic gradient against finite differences
    worst = 0.0
    for xh in _random_units(fan.dim, n_fd, seed + 1):
        xi = 1.7 * xh
        ev = grad_smoothed_support(fan, cd, 0.1, xi, q, with_fd=True)
        scale = max(float(np.linalg.norm(ev.dphi_eps)), 1e-12)
        rel = float(np.linalg.norm(ev.fd_dphi - ev.dphi_eps)) / scale
        if np.linalg.norm(ev.dphi_eps) == 0 and np.linalg.norm(ev.fd_dphi) == 0:
            rel = 0.0
        worst = max(worst, rel)
    checks.append({"name": "finite-difference gradient", "pass": worst <= 1e-2,
                   "max_relative_error": worst, "points": n_fd, "provenance": "monte_carlo"})
    return _suite(f"smoothing {_label(fan, d)}", checks, t0)


# -- flow -------------------------------------------------------------------------------------

def flow_suite(fan: Fan, d: ToricDivisor, q: QuadratureConfig = QuadratureConfig(),
               points: int = 20, steps: int = 64, eps: float = 0.1, seed: int = 0) -> dict:
    t0 = time.perf_counter()
    cd = cartier_data(fan, d)
    rng = np.random.default_rng(seed)
    worst_rk, worst_group, worst_scale, worst_torus = 0.0, 0.0, 0.0, 0.0
    ok_rk = ok_group = ok_scale = ok_torus = True
    for _ in range(points):
        x = rng.uniform(-2, 2, fan.dim)
        xi = rng.standard_normal(fan.dim)
        t = float(rng.uniform(0.2, 2.0))
        p = PhasePoint(tuple(x), tuple(xi))
        se = grad_smoothed_support(fan, cd, eps, xi, q, with_fd=False).sigma_mc
        tol = 1e-4 + 3 * se * abs(t)
        closed = flow_closed_form(fan, cd, eps, t, p, q)
        rk = flow_rk4(fan, cd, eps, t, p, steps, q)
        dist = float(np.linalg.norm(closed.endpoint.x - rk.endpoint.x))
        worst_rk = max(worst_rk, dist)
        ok_rk &= dist <= tol and rk.covector_drift == 0.0
        # group law, closed form and rk4
        s = 0.5 * t
        half = flow_closed_form(fan, cd, eps, s, p, q)
        twice = flow_closed_form(fan, cd, eps, t - s, half.endpoint, q)
        g1 = float(np.linalg.norm(twice.endpoint.x - closed.endpoint.x))
        half_rk = flow_rk4(fan, cd, eps, s, p, steps, q)
        twice_rk = flow_rk4(fan, cd, eps, t - s, half_rk.endpoint, steps, q)
        g2 = float(np.linalg.norm(twice_rk.endpoint.x - rk.endpoint.x))
        worst_group = max(worst_group, g1, g2)
        ok_group &= g1 <= 1e-12 and g2 <= tol
        # xi -> c xi
        c = float(rng.uniform(0.3, 3.0))
        scaled = flow_closed_form(fan, cd, eps, t, PhasePoint(tuple(x), tuple(c * xi)), q)
        ds = float(np.linalg.norm(scaled.endpoint.x - closed.endpoint.x))
        worst_scale = max(worst_scale, ds)
        ok_scale &= ds <= tol
        # torus reduction agrees with the plane flow mod Z^n
        tor = flow_closed_form(fan, cd, eps, t, PhasePoint(tuple(x), tuple(xi), torus=True), q)
        diff = tor.endpoint.x - closed.endpoint.x
        dt = float(np.linalg.norm(diff - np.round(diff)))
        worst_torus = max(worst_torus, dt)
        ok_torus &= dt <= 1e-9
    checks = [
        {"name": "closed form vs rk4", "pass": bool(ok_rk), "max_distance": worst_rk, "steps": steps,
         "points": points, "provenance": "monte_carlo"},
        {"name": "group law", "pass": bool(ok_group), "max_distance": worst_group},
        {"name": "covector scaling", "pass": bool(ok_scale), "max_distance": worst_scale},
        {"name": "torus reduction", "pass": bool(ok_torus), "max_distance": worst_torus},
    ]
    return _suite(f"flow {_label(fan, d)}", checks, t0)


# -- sheaves ------------------------------------------------------------------------------------

def p1_o2_stalk_golden() -> dict:
    """dims {-1: 1} on the open interval between the two chi's, 0 elsewhere."""
    fan = presets.p1()
    cd = cartier_data(fan, presets.o_p1(2))
    cx = twisted_polytope_sheaf(fan, cd)
    lo = min(cd.chi[s][0] for s in fan.maximal_cones)
    hi = max(cd.chi[s][0] for s in fan.maximal_cones)
    pts = [Fraction(k, 7) for k in range(-21, 22)] + [lo, hi, Fraction(0)]
    bad = []
    for x in pts:
        expect = {-1: 1} if lo < x < hi else {}
        got = stalk(cx, [x]).dims
        if got != expect:
            bad.append(str(x))
    return {"name": "P1 O(2) stalk golden", "pass": not bad and (lo, hi) == (-1, 1),
            "interval": [str(lo), str(hi)], "mismatches": bad}


def sheaf_suite(cases: Sequence[tuple[Fan, ToricDivisor]], points: int = 50, seed: int = 0,
                golden: bool = True) -> dict:
    t0 = time.perf_counter()
    checks = [p1_o2_stalk_golden()] if golden else []
    for fan, d in cases:
        P0 = twisted_polytope_sheaf(fan, cartier_data(fan, ToricDivisor.zero(fan)))
        F = twisted_polytope_sheaf(fan, cartier_data(fan, d))
        box = _convolution_box(P0, F, 1)
        xs = wall_avoiding_points([P0, F], [_plan(P0, F), _plan(F, P0)], points, seed, box)
        unit_bad, comm_bad = [], []
        for x in xs:
            a = convolve_stalk(P0, F, x).dims
            if a != stalk(F, x).dims:
                unit_bad.append([str(v) for v in x])
            if convolve_stalk(F, P0, x).dims != a:
                comm_bad.append([str(v) for v in x])
        checks.append({"name": f"unit law {_label(fan, d)}", "pass": not unit_bad,
                       "points": len(xs), "mismatches": unit_bad})
        # commutativity for a nontrivial pair as well
        G = twisted_polytope_sheaf(fan, cartier_data(fan, d + d))
        box2 = _convolution_box(F, G, 1)
        ys = wall_avoiding_points([F, G], [_plan(F, G), _plan(G, F)], points, seed + 1, box2)
        for y in ys:
            if convolve_stalk(F, G, y).dims != convolve_stalk(G, F, y).dims:
                comm_bad.append([str(v) for v in y])
        checks.append({"name": f"commutativity {_label(fan, d)}", "pass": not comm_bad,
                       "points": len(xs) + len(ys), "mismatches": comm_bad})
    return _suite("sheaf", checks, t0)


def picard_suite(cases: Sequence[tuple[Fan, ToricDivisor, ToricDivisor]], points: int = 50,
                 seed: int = 0) -> dict:
    t0 = time.perf_counter()
    checks = []
    for fan, d1, d2 in cases:
        rep = picard_action_check(fan, d1, d2, points, seed)
        checks.append({"name": f"picard {fan.name} {list(d1.coeffs)}*{list(d2.coeffs)}",
                       "pass": rep["pass"], "passed": rep["passed"], "points": points})
    return _suite("picard", checks, t0)


def torus_suite(cases: Sequence[tuple[Fan, ToricDivisor, ToricDivisor]], points: int = 20,
                seed: int = 0, radius: int = 8) -> dict:
    t0 = time.perf_counter()
    checks = []
    for fan, d1, d2 in cases:
        rep = torus_action_check(fan, d1, d2, points, seed, radius)
        checks.append({"name": f"torus {fan.name} {list(d1.coeffs)}*{list(d2.coeffs)}",
                       "pass": rep["pass"], "passed": rep["passed"], "points": points,
                       "radius": radius})
    return _suite("torus", checks, t0)


def front_suite(cases: Sequence[tuple[Fan, ToricDivisor]], schedule: Sequence[float] = FRONT_SCHEDULE,
                q: QuadratureConfig = QuadratureConfig(), samples_per_stratum: int = 20,
                seed: int = 0) -> dict:
    t0 = time.perf_counter()
    checks = []
    for fan, d in cases:
        cd = cartier_data(fan, d)
        for s in fan.maximal_cones:
            rep = front_convergence(FrontExperiment(fan, cd, s, schedule, samples_per_stratum, seed, q))
            checks.append({"name": f"front {_label(fan, d)} cone {list(s.rays)}", "pass": rep["pass"],
                           "distances": [r["quantity"] for r in rep["rows"]], "rate": rep["rate"],
                           "C_first_rung": rep["C_first_rung"], "monotone": rep["monotone"],
                           "final_rung_ok": rep["final_rung_ok"], "rate_heuristic": True})
    return _suite("front", checks, t0)


# -- noncomplete ----------------------------------------------------------------------------------

def noncomplete_cases():
    """(fan, divisor, completion, new coefficients) for A1 -> P1 and A2 -> P2."""
    return [(presets.a1(), ToricDivisor((1,)), presets.p1(), {1: 0}),
            (presets.a2(), ToricDivisor((1, 1)), presets.p2(), {2: 3})]


def noncomplete_suite(points_sheaf: int = 50, points_picard: int = 50, points_torus: int = 20,
                      seed: int = 0) -> dict:
    t0 = time.perf_counter()
    checks = []
    extended = []
    for fan, d, comp, new in noncomplete_cases():
        try:
            comp_fan, ext = extend_to_completion(fan, d, comp, new)
            sf = SupportFunction.of(fan, d)
            sf_ext = SupportFunction.of(comp_fan, ext)
            agree = all(sf(g) == sf_ext(g) for c in fan.all_cones for g in fan.generators(c))
            checks.append({"name": f"extension {fan.name}->{comp.name}", "pass": agree,
                           "extended": list(ext.coeffs)})
            extended.append((comp_fan, ext))
        except Exception as exc:  # recorded as a failed check
            checks.append({"name": f"extension {fan.name}->{comp.name}", "pass": False, "error": repr(exc)})
    if extended:
        sub = [sheaf_suite(extended, points_sheaf, seed, golden=False),
               picard_suite([(f, e, e) for f, e in extended], points_picard, seed),
               torus_suite([(f, e, e) for f, e in extended], points_torus, seed)]
        for s in sub:
            checks.append({"name": f"extended data: {s['suite']}", "pass": s["pass"],
                           "checks": s["checks"]})
    return _suite("noncomplete", checks, t0)


# -- presets -----------------------------------------------------------------------------------------

def _p1_pairs():
    return [(presets.p1(), presets.o_p1(a), presets.o_p1(b)) for a in (1, 2, 3) for b in (1, 2, 3)]


def preset_p1_o2(q: QuadratureConfig, seed: int = 0) -> list[dict]:
    fan, d = presets.p1(), presets.o_p1(2)
    return [exact_suite([(fan, d)]), smoothing_suite(fan, d, q, seed=seed), flow_suite(fan, d, q, seed=seed),
            sheaf_suite([(fan, d)], seed=seed), picard_suite(_p1_pairs(), seed=seed),
            torus_suite(_p1_pairs(), seed=seed), front_suite([(fan, d)], q=q, seed=seed)]


def preset_p2_ample(q: QuadratureConfig, seed: int = 0) -> list[dict]:
    fan = presets.p2()
    ones = ToricDivisor((1, 1, 1))
    pairs = [(fan, presets.o_p2(1), presets.o_p2(1)), (fan, presets.o_p2(1), presets.o_p2(2))]
    return [exact_suite([(fan, presets.o_p2(1)), (fan, ones)]), smoothing_suite(fan, ones, q, seed=seed),
            flow_suite(fan, ones, q, seed=seed), sheaf_suite([(fan, ones)], seed=seed),
            picard_suite(pairs, seed=seed), torus_suite(pairs, seed=seed),
            front_suite([(fan, ones)], q=q, seed=seed)]


def preset_hirzebruch(q: QuadratureConfig, seed: int = 0) -> list[dict]:
    fan = presets.hirzebruch(1)
    d1, d2 = ToricDivisor((0, 0, 1, 1)), ToricDivisor((0, 0, 1, 2))
    pairs = [(fan, d1, d1), (fan, d1, d2)]
    return [exact_suite([(fan, d1), (fan, d2)]), smoothing_suite(fan, d1, q, seed=seed),
            flow_suite(fan, d1, q, seed=seed), sheaf_suite([(fan, d1)], seed=seed, golden=False),
            picard_suite(pairs, seed=seed), torus_suite(pairs, seed=seed),
            front_suite([(fan, d1)], q=q, seed=seed)]


def preset_noncomplete_a2(q: QuadratureConfig, seed: int = 0) -> list[dict]:
    return [noncomplete_suite(seed=seed)]


PRESETS = {"p1-o2": preset_p1_o2, "p2-ample": preset_p2_ample,
           "hirzebruch": preset_hirzebruch, "noncomplete-a2": preset_noncomplete_a2}


def run_preset(name: str, q: QuadratureConfig = QuadratureConfig(), seed: int = 0) -> dict:
    suites = PRESETS[name](q, seed)
    return {"experiment": "suite", "preset": name, "suites": suites,
            "pass": all(s["pass"] for s in suites)}
