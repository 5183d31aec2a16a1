"""Torus-invariant divisors, Cartier data and piecewise-linear support functions."""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Optional, Sequence

from . import exact
from .errors import (NotACompletion, NotCartier, NotCartierAfterExtension,
                     OutsideSupport, ToricError)
from .fan import Cone, Fan, ray_index_map
from .lp import OPTIMAL, linprog, strictly_feasible


@dataclass(frozen=True)
class ToricDivisor:
    """D = sum_rho a_rho D_rho, coefficients listed in the fan's ray order."""

    coeffs: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(int(a) for a in self.coeffs))

    def __add__(self, other: "ToricDivisor") -> "ToricDivisor":
        if len(self.coeffs) != len(other.coeffs):
            raise ValueError("divisors live on different fans")
        return ToricDivisor(tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    def __neg__(self):
        return ToricDivisor(tuple(-a for a in self.coeffs))

    @classmethod
    def zero(cls, fan: Fan) -> "ToricDivisor":
        return cls((0,) * len(fan.rays))

    def to_dict(self) -> dict:
        return {"coeffs": list(self.coeffs)}


def parse_divisor(document) -> ToricDivisor:
    if isinstance(document, (str, bytes)):
        document = json.loads(document)
    if isinstance(document, Mapping):
        document = document["coeffs"]
    return ToricDivisor(tuple(document))


def load_divisor(path) -> ToricDivisor:
    with open(path) as fh:
        return parse_divisor(json.load(fh))


@dataclass(frozen=True)
class CartierData:
    """Per-cone linear functionals chi_sigma with <chi_sigma|u_rho> = -a_rho.

    ``chi`` holds exact rational points for every cone of the fan. For
    non-maximal cones the value is the convex combination of neighbouring
    maximal chi's with the mollifier limit weights stored in ``weights``.
    """

    fan: Fan
    divisor: ToricDivisor
    chi: Mapping[Cone, tuple]
    weights: Mapping[Cone, Mapping[Cone, Fraction]] = field(default_factory=dict)

    @property
    def integral(self) -> dict[Cone, bool]:
        return {c: all(x.denominator == 1 for x in v) for c, v in self.chi.items()}

    @property
    def is_cartier(self) -> bool:
        """Integral on every maximal cone (rather than only Q/R-Cartier)."""
        ints = self.integral
        return all(ints[s] for s in self.fan.maximal_cones)

    def maximal_chis(self) -> list[tuple]:
        return [self.chi[s] for s in self.fan.maximal_cones]

    def chi_float(self, c: Cone):
        return [float(x) for x in self.chi[c]]

    def table(self) -> list[dict]:
        rows = []
        ints = self.integral
        for c in self.fan.all_cones:
            rows.append({"cone": list(c.rays), "dim": c.dim,
                         "chi": [str(x) for x in self.chi[c]], "integral": ints[c]})
        return rows


def _solve_cone(fan: Fan, c: Cone, coeffs: Sequence[int], unique: bool):
    gens = fan.generators(c)
    rhs = [-coeffs[i] for i in c.rays]
    if unique:
        return exact.solve(gens, rhs, fan.dim)
    return exact.solve_min_norm(gens, rhs, fan.dim)


def cartier_data(fan: Fan, d: ToricDivisor) -> CartierData:
    """Solve <chi_sigma|u_rho> = -a_rho on every maximal cone, then fill in faces.

    Maximal n-dimensional cones have a unique solution (NotCartier if the
    system of a non-simplicial cone is inconsistent). A non-maximal cone tau
    gets chi_tau = sum lambda_sigma chi_sigma over the maximal cones around
    it, with the mollifier limit weights lambda. Faces lying on no
    n-dimensional cone get the least-norm solution of their own system.
    """
    from .smoothing import limit_weights

    if len(d.coeffs) != len(fan.rays):
        raise ValueError(f"divisor has {len(d.coeffs)} coefficients, fan has {len(fan.rays)} rays")
    chi: dict[Cone, tuple] = {}
    for s in fan.maximal_cones:
        sol = _solve_cone(fan, s, d.coeffs, unique=(s.dim == fan.dim))
        if sol is None:
            raise NotCartier(f"no chi solves the Cartier system on cone {list(s.rays)}")
        chi[s] = sol
    weights: dict[Cone, dict[Cone, Fraction]] = {}
    for c in fan.all_cones:
        if c in chi:
            continue
        around = fan.maximal_containing(c)
        if around:
            lam = limit_weights(fan, c)
            weights[c] = lam
            chi[c] = tuple(sum((lam[s] * chi[s][i] for s in around), Fraction(0))
                           for i in range(fan.dim))
        else:
            sol = _solve_cone(fan, c, d.coeffs, unique=False)
            if sol is None:
                raise NotCartier(f"no chi solves the Cartier system on cone {list(c.rays)}")
            chi[c] = sol
    return CartierData(fan, d, chi, weights)


@dataclass(frozen=True)
class SupportFunction:
    fan: Fan
    cd: CartierData

    @classmethod
    def of(cls, fan: Fan, d: ToricDivisor) -> "SupportFunction":
        return cls(fan, cartier_data(fan, d))

    def __call__(self, xi) -> Fraction:
        return support_eval(self, xi)


def support_eval(sf: SupportFunction, xi) -> Fraction:
    """phi_D(xi) = <chi_sigma|xi> for the cone sigma containing xi."""
    xi = exact.rational_point(xi)
    c = sf.fan.locate(xi)
    if c is None:
        raise OutsideSupport(f"{[str(x) for x in xi]} is not in the support of the fan")
    value = exact.dot(sf.cd.chi[c], xi)
    for s in sf.fan.cofaces(c):
        if exact.dot(sf.cd.chi[s], xi) != value:
            raise ToricError(f"Cartier data disagree at {xi} between {c} and {s}")
    return value


def check_continuity(sf: SupportFunction, samples: int = 20, seed: int = 0) -> dict:
    """Compare both sides' linear functionals at random points of shared faces."""
    rng = random.Random(seed)
    fan, chi = sf.fan, sf.cd.chi
    violations = []
    checked = 0
    maxl = fan.maximal_cones
    for i, s1 in enumerate(maxl):
        for s2 in maxl[i + 1:]:
            common = tuple(sorted(set(s1.rays) & set(s2.rays)))
            if not common:
                continue
            gens = [fan.rays[r] for r in common]
            for _ in range(samples):
                coef = [Fraction(rng.randint(1, 997), rng.randint(1, 97)) for _ in gens]
                xi = tuple(sum((c * g[k] for c, g in zip(coef, gens)), Fraction(0))
                           for k in range(fan.dim))
                v1, v2 = exact.dot(chi[s1], xi), exact.dot(chi[s2], xi)
                checked += 1
                if v1 != v2:
                    violations.append({"cones": [list(s1.rays), list(s2.rays)],
                                       "xi": [str(x) for x in xi],
                                       "values": [str(v1), str(v2)]})
    return {"checked": checked, "violations": violations, "pass": not violations}


def check_cartier_conditions(cd: CartierData) -> list[str]:
    """Exact check of <chi_sigma|u_rho> = -a_rho and chi_sigma - chi_tau in tau^perp."""
    fan = cd.fan
    problems = []
    for c in fan.all_cones:
        for r in c.rays:
            if exact.dot(cd.chi[c], fan.rays[r]) != -cd.divisor.coeffs[r]:
                problems.append(f"<chi_{list(c.rays)}|u_{r}> != -a_{r}")
        for f in fan.faces(c):
            diff = [a - b for a, b in zip(cd.chi[c], cd.chi[f])]
            if any(exact.dot(diff, fan.rays[r]) != 0 for r in f.rays):
                problems.append(f"chi_{list(c.rays)} - chi_{list(f.rays)} not in face perp")
    return problems


def hull_contains(points: Sequence[Sequence], target: Sequence) -> bool:
    """Exact LP: is target a convex combination of points?"""
    k = len(points)
    if k == 0:
        return False
    n = len(target)
    A_eq = [[points[j][i] for j in range(k)] for i in range(n)] + [[1] * k]
    b_eq = list(target) + [1]
    res = linprog([0] * k, A_eq=A_eq, b_eq=b_eq)
    return res.status == OPTIMAL


def check_hull_property(cd: CartierData) -> dict:
    """chi_tau in Conv{chi_sigma : sigma in Sigma(n, tau)} for every cone tau."""
    fan = cd.fan
    failures = []
    for c in fan.all_cones:
        around = fan.maximal_containing(c)
        if not around:
            continue
        if not hull_contains([cd.chi[s] for s in around], cd.chi[c]):
            failures.append(list(c.rays))
    return {"checked": len(fan.all_cones), "failures": failures, "pass": not failures}


def _refines(fan: Fan, completion: Fan) -> Optional[str]:
    """None if every cone of ``fan`` is a union of cones of ``completion``."""
    for s in fan.maximal_cones:
        if s.dim != fan.dim:
            return f"cone {list(s.rays)} is not full-dimensional"
        normals = fan.facet_normals(s)
        for c in completion.maximal_cones:
            cn = completion.facet_normals(c)
            # Int(c) meets Int(s) => every generator of c must lie in s
            if strictly_feasible(list(normals) + list(cn), [0] * (len(normals) + len(cn)), fan.dim):
                if not all(fan.contains(s, g) for g in completion.generators(c)):
                    return f"completion cone {list(c.rays)} straddles the boundary of {list(s.rays)}"
    return None


def extend_to_completion(fan: Fan, d: ToricDivisor, completion: Fan,
                         new_coeffs: Optional[Mapping[int, int]] = None):
    """Extend D from ``fan`` to a complete fan containing a refinement of it.

    Rays of the completion that lie in |fan| are forced to -phi_D(u_rho);
    the remaining new rays take ``new_coeffs`` (indexed by completion ray,
    default 0). Returns ``(completion, extended_divisor)``.
    """
    new_coeffs = dict(new_coeffs or {})
    if completion.dim != fan.dim:
        raise NotACompletion("dimensions differ")
    if not completion.is_complete:
        raise NotACompletion("the proposed completion is not complete")
    idx = ray_index_map(fan, completion)
    if len(idx) != len(fan.rays):
        missing = [list(fan.rays[i]) for i in range(len(fan.rays)) if i not in idx]
        raise NotACompletion(f"rays {missing} are not rays of the completion")
    why = _refines(fan, completion)
    if why:
        raise NotACompletion(why)
    sf = SupportFunction.of(fan, d)
    coeffs = []
    back = {j: i for i, j in idx.items()}
    for j, r in enumerate(completion.rays):
        if j in back:
            coeffs.append(d.coeffs[back[j]])
            continue
        inside = fan.locate(r) is not None
        if inside:
            forced = -support_eval(sf, r)
            if forced.denominator != 1:
                raise NotCartierAfterExtension(f"-phi_D({list(r)}) = {forced} is not an integer")
            if j in new_coeffs and new_coeffs[j] != forced:
                raise NotCartierAfterExtension(
                    f"ray {list(r)} lies in |fan|; its coefficient must be {forced}")
            coeffs.append(int(forced))
        else:
            coeffs.append(int(new_coeffs.get(j, 0)))
    ext = ToricDivisor(tuple(coeffs))
    try:
        cd = cartier_data(completion, ext)
    except NotCartier as exc:
        raise NotCartierAfterExtension(str(exc)) from None
    if not cd.is_cartier:
        raise NotCartierAfterExtension("extended divisor is only Q-Cartier on the completion")
    # restriction to |fan| must reproduce phi_D
    for c in completion.maximal_cones:
        gens = completion.generators(c)
        if all(fan.locate(g) is not None for g in gens):
            if any(exact.dot(cd.chi[c], g) != support_eval(sf, g) for g in gens):
                raise NotCartierAfterExtension("extension does not restrict to phi_D")
    return completion, ext
