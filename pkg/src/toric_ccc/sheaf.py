"""Polyhedral constructible-sheaf calculus on M_R.

A :class:`ShardComplex` is a bounded complex whose terms are constant
sheaves extended by zero from open convex polyhedra, with a scalar
differential. Its stalk at x is the subcomplex of terms whose region
contains x; cohomology is computed by exact rank over Q.

Convolution is handled stalkwise. The fiber of the addition map over x is
{(u, v) : u + v = x}; a pair of terms (U_i, V_j) contributes
H_c(U_i cap (x - V_j)), one dimension in degree n when that open convex set
is nonempty. Equivalently x lies in the Minkowski sum U_i + V_j, which is
precomputed by Fourier-Motzkin elimination when many points are queried.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from math import floor, ceil, gcd, lcm
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from . import exact
from .errors import (FanNotComplete, SignConstructionFailed, UnboundedSupport, UnknownCone)
from .fan import Cone, Fan
from .lp import strictly_feasible

SCHEMA = "toric_ccc.shard_complex/1"


# -- open polyhedra -------------------------------------------------------------

@dataclass(frozen=True)
class OpenPolyhedron:
    """{x in R^n : <normal_i|x> > offset_i for all i}; no constraints means all of R^n."""

    constraints: tuple
    dim: int

    def __post_init__(self):
        rows = []
        for nrm, off in self.constraints:
            nrm = exact.rational_point(nrm)
            if len(nrm) != self.dim:
                raise ValueError("constraint normal has the wrong dimension")
            rows.append((nrm, exact.to_fraction(off)))
        object.__setattr__(self, "constraints", tuple(rows))

    @classmethod
    def whole(cls, n: int) -> "OpenPolyhedron":
        return cls((), n)

    def contains(self, x) -> bool:
        x = exact.rational_point(x)
        return all(exact.dot(nrm, x) > off for nrm, off in self.constraints)

    def intersect(self, other: "OpenPolyhedron") -> "OpenPolyhedron":
        return OpenPolyhedron(self.constraints + other.constraints, self.dim)

    def reflected_at(self, x) -> "OpenPolyhedron":
        """x - P = {x - v : v in P}."""
        x = exact.rational_point(x)
        return OpenPolyhedron(tuple((tuple(-a for a in nrm), off - exact.dot(nrm, x))
                                    for nrm, off in self.constraints), self.dim)

    def translated(self, m) -> "OpenPolyhedron":
        m = exact.rational_point(m)
        return OpenPolyhedron(tuple((nrm, off + exact.dot(nrm, m)) for nrm, off in self.constraints),
                              self.dim)

    def integer_rows(self):
        """Constraints rescaled to integers: A x > b with A, b integral."""
        A, b = [], []
        for nrm, off in self.constraints:
            vals = list(nrm) + [off]
            den = reduce(lcm, (v.denominator for v in vals), 1)
            A.append([int(v * den) for v in nrm])
            b.append(int(off * den))
        return A, b

    def to_dict(self) -> list:
        return [{"normal": [str(a) for a in nrm], "offset": str(off)} for nrm, off in self.constraints]


def feasible(p: OpenPolyhedron) -> bool:
    """Nonemptiness by exact LP: max delta with <n_i|x> >= c_i + delta, delta <= 1."""
    if not p.constraints:
        return True
    return strictly_feasible([c[0] for c in p.constraints], [c[1] for c in p.constraints], p.dim)


def minkowski_sum(p: OpenPolyhedron, q: OpenPolyhedron) -> Optional[OpenPolyhedron]:
    """H-representation of P + Q by Fourier-Motzkin; None if either is empty.

    Rows are <a|x> + <b|u> > c over (x, u), encoding u in P and x - u in Q.
    Elimination of u is exact because every inequality is strict.
    """
    if not feasible(p) or not feasible(q):
        return None
    n = p.dim
    rows = []
    for nrm, off in p.constraints:
        rows.append(([Fraction(0)] * n, list(nrm), off))
    for nrm, off in q.constraints:
        rows.append((list(nrm), [-a for a in nrm], off))
    for k in range(n):
        pos = [r for r in rows if r[1][k] > 0]
        neg = [r for r in rows if r[1][k] < 0]
        rest = [r for r in rows if r[1][k] == 0]
        for P, N in itertools.product(pos, neg):
            s, t = -N[1][k], P[1][k]
            rest.append(([s * a + t * b for a, b in zip(P[0], N[0])],
                         [s * a + t * b for a, b in zip(P[1], N[1])],
                         s * P[2] + t * N[2]))
        rows = _dedupe(rest, n)
    out = []
    for a, _, c in rows:
        if all(v == 0 for v in a):
            if c >= 0:
                return None  # cannot happen for nonempty inputs
            continue
        out.append((tuple(a), c))
    return OpenPolyhedron(tuple(out), n)


def _dedupe(rows, n):
    """Drop trivially true rows and keep the tightest offset per normal direction."""
    best = {}
    for a, b, c in rows:
        vals = list(a) + list(b)
        den = reduce(lcm, (v.denominator for v in vals + [c]), 1)
        ints = [int(v * den) for v in vals]
        g = reduce(gcd, (abs(v) for v in ints), 0)
        if g == 0:
            continue  # 0 > c; true since the inputs are nonempty
        key = tuple(v // g for v in ints)
        cc = c * den / g
        if key not in best or cc > best[key][3]:
            best[key] = (a, b, c, cc)
    return [v[:3] for v in best.values()]


# -- complexes --------------------------------------------------------------------

@dataclass(frozen=True)
class ShardTerm:
    region: OpenPolyhedron
    degree: int
    label: tuple = ()


@dataclass(frozen=True)
class StalkReport:
    point: tuple
    dims: Mapping[int, int]
    euler: int

    @classmethod
    def of(cls, point, dims: Mapping[int, int]) -> "StalkReport":
        dims = {int(k): int(v) for k, v in sorted(dims.items()) if v}
        return cls(tuple(exact.rational_point(point)), dims,
                   sum((-1) ** (k % 2) * v for k, v in dims.items()))

    def to_dict(self) -> dict:
        return {"point": [str(a) for a in self.point],
                "dims": {str(k): v for k, v in self.dims.items()}, "euler": self.euler}


def cohomology(degrees: Sequence[int], entries: Mapping[tuple, int], active: Iterable[int]) -> dict[int, int]:
    """Cohomology dims of the subcomplex spanned by ``active`` basis vectors.

    ``entries[(i, j)]`` is the coefficient of basis vector i in d(e_j); d
    must raise degree by one and ``active`` must be closed under d.
    """
    active = sorted(set(active))
    by_deg: dict[int, list[int]] = {}
    for i in active:
        by_deg.setdefault(degrees[i], []).append(i)
    ranks = {}
    for m, cols in by_deg.items():
        rows = by_deg.get(m + 1, [])
        if not rows:
            ranks[m] = 0
            continue
        mat = [[entries.get((i, j), 0) for j in cols] for i in rows]
        ranks[m] = exact.rank(mat) if any(any(r) for r in mat) else 0
    return {m: len(ix) - ranks.get(m, 0) - ranks.get(m - 1, 0) for m, ix in by_deg.items()}


class ShardComplex:
    """Terms (open polyhedron, degree, label) with differential entries d[(row, col)].

    d sends term ``col`` (degree m) to term ``row`` (degree m + 1); a nonzero
    entry requires region_col to be contained in region_row.
    """

    def __init__(self, dim: int, terms: Sequence[ShardTerm], differential: Mapping[tuple, int],
                 apexes: Sequence[Sequence] = (), name: str = ""):
        self.dim = dim
        self.terms = tuple(terms)
        self.differential = {(int(i), int(j)): int(v) for (i, j), v in differential.items() if v}
        self.apexes = tuple(exact.rational_point(a) for a in apexes)
        self.name = name
        self._cache: dict = {}
        for (i, j) in self.differential:
            if self.terms[i].degree != self.terms[j].degree + 1:
                raise ValueError(f"entry ({i},{j}) does not raise degree by one")

    @property
    def degrees(self) -> list[int]:
        return [t.degree for t in self.terms]

    def d_squared_is_zero(self) -> bool:
        d = self.differential
        out: dict = {}
        for (i, j), a in d.items():
            for (k, i2), b in d.items():
                if i2 == i:
                    out[(k, j)] = out.get((k, j), 0) + a * b
        return all(v == 0 for v in out.values())

    def containing(self, x) -> list[int]:
        x = exact.rational_point(x)
        return [i for i, t in enumerate(self.terms) if t.region.contains(x)]

    def dims_for(self, active: Iterable[int]) -> dict[int, int]:
        key = frozenset(active)
        hit = self._cache.get(key)
        if hit is None:
            hit = cohomology(self.degrees, self.differential, key)
            self._cache[key] = hit
        return hit

    def integer_system(self):
        """Stacked integer constraints with a per-term column range."""
        A, b, spans = [], [], []
        for t in self.terms:
            Ai, bi = t.region.integer_rows()
            spans.append((len(A), len(A) + len(Ai)))
            A += Ai
            b += bi
        return (np.array(A, dtype=np.int64).reshape(-1, self.dim),
                np.array(b, dtype=np.int64), spans)

    def to_dict(self) -> dict:
        return {"schema": SCHEMA, "name": self.name, "dim": self.dim,
                "terms": [{"label": list(t.label), "degree": t.degree,
                           "constraints": t.region.to_dict()} for t in self.terms],
                "differential": [[i, j, v] for (i, j), v in sorted(self.differential.items())],
                "apexes": [[str(a) for a in p] for p in self.apexes]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def parse_complex(document) -> ShardComplex:
    if isinstance(document, (str, bytes)):
        document = json.loads(document)
    if document.get("schema", SCHEMA) != SCHEMA:
        raise ValueError(f"unsupported complex schema {document.get('schema')!r}")
    n = int(document["dim"])
    terms = []
    for t in document["terms"]:
        cons = tuple((tuple(c["normal"]), c["offset"]) for c in t["constraints"])
        terms.append(ShardTerm(OpenPolyhedron(cons, n), int(t["degree"]), tuple(t.get("label", ()))))
    diff = {(int(i), int(j)): int(v) for i, j, v in document.get("differential", [])}
    c = ShardComplex(n, terms, diff, document.get("apexes", ()), document.get("name", ""))
    if not c.d_squared_is_zero():
        raise SignConstructionFailed("loaded complex has d^2 != 0")
    return c


def load_complex(path) -> ShardComplex:
    with open(path) as fh:
        return parse_complex(json.load(fh))


# -- twisted polytope sheaf ------------------------------------------------------------

def _orientation_basis(fan: Fan, c: Cone) -> list[tuple]:
    gens = fan.generators(c)
    return [gens[i] for i in exact.independent_subset(gens)]


def incidence(fan: Fan, sigma: Cone, tau: Cone) -> int:
    """Incidence number [sigma : tau] for a facet tau of sigma.

    Each cone is oriented by the first linearly independent subset of its
    rays in global order. The sign compares (inward ray, basis of tau) with
    the basis of sigma; for simplicial cones it is (-1)^position of the
    omitted ray.
    """
    B_s = _orientation_basis(fan, sigma)
    B_t = _orientation_basis(fan, tau)
    inward = next(fan.rays[r] for r in sigma.rays if r not in tau.rays)
    M = [exact.coordinates(B_s, v) for v in [inward] + B_t]
    d = exact.det(M)
    if d == 0:
        raise SignConstructionFailed(f"degenerate orientation for {sigma} over {tau}")
    return 1 if d > 0 else -1


def twisted_polytope_sheaf(fan: Fan, cd) -> ShardComplex:
    """P(D): terms C_{Int(sigma^vee + chi_sigma)} in degree -dim(sigma), differential sigma -> facets."""
    if not fan.is_complete:
        raise FanNotComplete("the twisted polytope sheaf is built on complete fans")
    n = fan.dim
    cones = sorted(fan.all_cones, key=lambda c: (-c.dim, c.rays))
    index = {c: i for i, c in enumerate(cones)}
    terms = []
    for c in cones:
        chi = cd.chi[c]
        cons = tuple((tuple(fan.rays[r]), exact.dot(chi, fan.rays[r])) for r in c.rays)
        terms.append(ShardTerm(OpenPolyhedron(cons, n), -c.dim, c.rays))
    diff = {}
    for s in cones:
        for t in fan.facets(s):
            diff[(index[t], index[s])] = incidence(fan, s, t)
    apexes = [cd.chi[s] for s in fan.maximal_cones]
    name = f"P(D) D={list(cd.divisor.coeffs)}"
    c = ShardComplex(n, terms, diff, apexes, name)
    if not c.d_squared_is_zero():
        raise SignConstructionFailed("d^2 != 0 for the generated complex")
    return c


def stalk(c: ShardComplex, x) -> StalkReport:
    """Cohomology of the subcomplex of terms whose region contains x."""
    x = exact.rational_point(x)
    if len(x) != c.dim:
        raise ValueError("point has the wrong dimension")
    return StalkReport.of(x, c.dims_for(c.containing(x)))


# -- convolution ------------------------------------------------------------------------

def _pair_complex(f: ShardComplex, g: ShardComplex):
    """Degrees and differential of the tensor double complex on pairs (i, j)."""
    nf, ng = len(f.terms), len(g.terms)
    n = f.dim
    degrees = [f.terms[i].degree + g.terms[j].degree + n for i in range(nf) for j in range(ng)]
    entries = {}
    for (a, i), v in f.differential.items():
        for j in range(ng):
            entries[(a * ng + j, i * ng + j)] = v
    for (b, j), v in g.differential.items():
        for i in range(nf):
            sign = -1 if f.terms[i].degree % 2 else 1
            entries[(i * ng + b, i * ng + j)] = sign * v
    return degrees, entries


class ConvolutionPlan:
    """Precomputed data for many convolution stalks of one pair (f, g)."""

    def __init__(self, f: ShardComplex, g: ShardComplex):
        if f.dim != g.dim:
            raise ValueError("complexes live in different dimensions")
        self.f, self.g = f, g
        self.n = f.dim
        self.degrees, self.entries = _pair_complex(f, g)
        self.sums = [minkowski_sum(f.terms[i].region, g.terms[j].region)
                     for i in range(len(f.terms)) for j in range(len(g.terms))]
        A, b, spans = [], [], []
        for s in self.sums:
            if s is None:
                spans.append(None)
                continue
            Ai, bi = s.integer_rows()
            spans.append((len(A), len(A) + len(Ai)))
            A += Ai
            b += bi
        self._A = np.array(A, dtype=np.int64).reshape(-1, self.n)
        self._b = np.array(b, dtype=np.int64)
        self._spans = spans
        self._cache: dict = {}

    def survivors_lp(self, x) -> list[int]:
        x = exact.rational_point(x)
        ng = len(self.g.terms)
        out = []
        for i, ti in enumerate(self.f.terms):
            for j, tj in enumerate(self.g.terms):
                if feasible(ti.region.intersect(tj.region.reflected_at(x))):
                    out.append(i * ng + j)
        return out

    def survivors(self, x) -> list[int]:
        x = exact.rational_point(x)
        return [k for k, s in enumerate(self.sums) if s is not None and s.contains(x)]

    def survivor_masks(self, points_num: np.ndarray, den: int) -> np.ndarray:
        """Boolean (K, pairs) survival table for points points_num / den (integer arrays)."""
        K = len(points_num)
        pos = (points_num @ self._A.T) > den * self._b[None, :]
        out = np.zeros((K, len(self._spans)), dtype=bool)
        for k, sp in enumerate(self._spans):
            if sp is None:
                continue
            a, b = sp
            if a == b:
                out[:, k] = True
            else:
                out[:, k] = pos[:, a:b].all(axis=1)
        return out

    def dims_for(self, active) -> dict[int, int]:
        key = frozenset(active)
        hit = self._cache.get(key)
        if hit is None:
            hit = cohomology(self.degrees, self.entries, key)
            self._cache[key] = hit
        return hit

    def stalk(self, x, method: str = "lp") -> StalkReport:
        surv = self.survivors_lp(x) if method == "lp" else self.survivors(x)
        return StalkReport.of(x, self.dims_for(surv))


_plans: dict = {}


def _plan(f: ShardComplex, g: ShardComplex) -> ConvolutionPlan:
    key = (id(f), id(g))
    hit = _plans.get(key)
    if hit is None or hit.f is not f or hit.g is not g:
        hit = ConvolutionPlan(f, g)
        _plans[key] = hit
    return hit


def convolve_stalk(f: ShardComplex, g: ShardComplex, x, method: str = "lp") -> StalkReport:
    """Stalk of the convolution f * g at x.

    ``method="lp"`` decides each pair by an exact LP on U_i cap (x - V_j);
    ``method="minkowski"`` tests x against precomputed U_i + V_j.
    """
    return _plan(f, g).stalk(x, method)


# -- singular support ---------------------------------------------------------------------

@dataclass(frozen=True)
class SSComponent:
    """chi + (tau^perp cap sigma^vee) times the codirection cone -tau."""

    face: tuple
    base_equations: tuple      # <u|x - chi> = 0
    base_inequalities: tuple   # <u|x - chi> >= 0
    chi: tuple
    base_generators: tuple     # cone generators of tau^perp cap sigma^vee
    base_lineality: tuple      # basis of sigma^perp (both signs allowed)
    codirections: tuple        # generators of -tau
    zero_section: bool = False

    def to_dict(self) -> dict:
        fr = lambda vs: [[str(a) for a in v] for v in vs]
        return {"face": list(self.face), "chi": [str(a) for a in self.chi],
                "base_equations": fr(self.base_equations),
                "base_inequalities": fr(self.base_inequalities),
                "base_generators": fr(self.base_generators), "base_lineality": fr(self.base_lineality),
                "codirections": fr(self.codirections), "zero_section": self.zero_section}


def dual_face_generators(fan: Fan, sigma: Cone, tau: Cone):
    """(cone generators, lineality basis) of the face tau^perp cap sigma^vee."""
    lin = [tuple(v) for v in fan.orthogonal_basis(sigma)]
    gens = []
    for nrm, face in fan.facet_normals_with_faces(sigma):
        if set(tau.rays) <= set(face.rays):
            gens.append(tuple(nrm))
    return gens, lin


def singular_support(fan: Fan, sigma, chi) -> list[SSComponent]:
    try:
        sigma = fan.cone(sigma.rays if isinstance(sigma, Cone) else sigma)
    except Exception as exc:
        raise UnknownCone(str(exc)) from None
    chi = exact.rational_point(chi)
    out = []
    for tau in sorted(fan.faces(sigma), key=lambda c: (-c.dim, c.rays)):
        gens, lin = dual_face_generators(fan, sigma, tau)
        out.append(SSComponent(
            face=tau.rays,
            base_equations=tuple(fan.rays[r] for r in tau.rays),
            base_inequalities=tuple(fan.rays[r] for r in sigma.rays if r not in tau.rays),
            chi=chi, base_generators=tuple(gens), base_lineality=tuple(lin),
            codirections=tuple(tuple(-a for a in fan.rays[r]) for r in tau.rays),
            zero_section=tau.is_origin))
    return out


# -- torus pushforward ------------------------------------------------------------------------

def support_box(apexes: Sequence[Sequence], n: int, radius: int) -> tuple[list[Fraction], list[Fraction]]:
    if apexes:
        lo = [min(p[k] for p in apexes) - radius for k in range(n)]
        hi = [max(p[k] for p in apexes) + radius for k in range(n)]
    else:
        lo, hi = [Fraction(-radius)] * n, [Fraction(radius)] * n
    return lo, hi


def _translates(x, lo, hi):
    """Lattice vectors m with x + m in the closed box, and a flag for the outer shell."""
    ranges = [range(ceil(l - xi), floor(h - xi) + 1) for xi, l, h in zip(x, lo, hi)]
    ms = np.array(list(itertools.product(*ranges)), dtype=np.int64).reshape(-1, len(x))
    firsts = np.array([r.start for r in ranges])
    lasts = np.array([r.stop - 1 for r in ranges])
    shell = np.any((ms == firsts) | (ms == lasts), axis=1) if len(ms) else np.zeros(0, bool)
    return ms, shell


def _common_den(x) -> int:
    return reduce(lcm, (a.denominator for a in x), 1)


def torus_stalk(f: ShardComplex, x, radius: int = 8, box=None) -> StalkReport:
    """Sum of stalks of f at the lattice translates x + m inside the apex box inflated by radius."""
    if radius < 1:
        raise ValueError("radius must be at least 1")
    x = exact.rational_point(x)
    lo, hi = box if box is not None else support_box(f.apexes, f.dim, radius)
    ms, shell = _translates(x, lo, hi)
    den = _common_den(x)
    X = np.array([int(a * den) for a in x], dtype=np.int64)
    A, b, spans = f.integer_system()
    pts = X[None, :] + den * ms
    pos = (pts @ A.T) > den * b[None, :] if len(A) else np.zeros((len(ms), 0), bool)
    inside = np.ones((len(ms), len(f.terms)), dtype=bool)
    for k, (a0, a1) in enumerate(spans):
        if a1 > a0:
            inside[:, k] = pos[:, a0:a1].all(axis=1)
    return _sum_by_mask(inside, shell, f.dims_for, x, "torus_stalk")


def _sum_by_mask(table: np.ndarray, shell: np.ndarray, dims_for, x, what: str) -> StalkReport:
    total: dict[int, int] = {}
    if len(table):
        masks, inverse, counts = np.unique(table, axis=0, return_inverse=True, return_counts=True)
        inverse = inverse.reshape(-1)
        for u, mask in enumerate(masks):
            dims = dims_for(np.nonzero(mask)[0].tolist())
            if not any(dims.values()):
                continue
            if shell[inverse == u].any():
                raise UnboundedSupport(f"{what}: nonzero stalk on the boundary of the search box")
            for k, v in dims.items():
                total[k] = total.get(k, 0) + v * int(counts[u])
    return StalkReport.of(x, total)


def torus_convolve_stalk(f: ShardComplex, g: ShardComplex, x, radius: int = 8, box=None) -> StalkReport:
    """Sum over lattice translates of convolve_stalk(f, g, x + m)."""
    x = exact.rational_point(x)
    plan = _plan(f, g)
    if box is None:
        lo_f, hi_f = support_box(f.apexes, f.dim, 0)
        lo_g, hi_g = support_box(g.apexes, g.dim, 0)
        box = ([a + b - radius for a, b in zip(lo_f, lo_g)], [a + b + radius for a, b in zip(hi_f, hi_g)])
    ms, shell = _translates(x, *box)
    den = _common_den(x)
    X = np.array([int(a * den) for a in x], dtype=np.int64)
    table = plan.survivor_masks(X[None, :] + den * ms, den)
    return _sum_by_mask(table, shell, plan.dims_for, x, "torus_convolve_stalk")
