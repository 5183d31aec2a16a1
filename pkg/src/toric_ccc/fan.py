"""Rational polyhedral fans with exact face structure.

A :class:`Fan` is built from primitive integer rays and a list of maximal
cones given by ray indices. Faces are enumerated eagerly, every cone gets an
exact H-representation (facet normals plus equations for its orthogonal
complement), and the usual validity conditions are checked with exact
rational LPs.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, reduce
from math import gcd
from typing import Iterable, Optional, Sequence

from . import exact
from .errors import (ConesNotIntersectingInFaces, DimensionMismatch, FanError,
                     InvalidCone, NonPrimitiveRay, NotStronglyConvex, UnknownCone)
from .lp import OPTIMAL, linprog, strictly_feasible


@dataclass(frozen=True, order=True)
class Cone:
    """A cone of a fan, identified by the sorted indices of its rays."""

    rays: tuple[int, ...]
    dim: int = field(compare=False)

    def __repr__(self):
        return f"Cone({list(self.rays)})"

    @property
    def is_origin(self) -> bool:
        return not self.rays


def _cone_facets(gens: Sequence[Sequence[int]], n: int):
    """Facets of cone(gens) as (normal, frozenset of generator positions on it).

    Normals are primitive integer vectors in the ambient lattice, nonnegative
    on the cone, vanishing on the facet's generators.
    """
    gens = [tuple(g) for g in gens]
    d = exact.rank(gens) if gens else 0
    if d == 0:
        return []
    if d == 1:
        # a ray: its only facet is the origin
        g = gens[0]
        return [(tuple(g), frozenset())]
    facets = {}
    for subset in itertools.combinations(range(len(gens)), d - 1):
        sub = [gens[i] for i in subset]
        if exact.rank(sub) != d - 1:
            continue
        null = exact.nullspace(sub, n)
        normal = None
        for v in null:
            vals = [exact.dot(v, g) for g in gens]
            if any(vals):
                normal = v
                break
        if normal is None:
            continue
        vals = [exact.dot(normal, g) for g in gens]
        if all(x >= 0 for x in vals):
            pass
        elif all(x <= 0 for x in vals):
            normal = tuple(-a for a in normal)
            vals = [-x for x in vals]
        else:
            continue
        on = frozenset(i for i, x in enumerate(vals) if x == 0)
        if on not in facets:
            facets[on] = normal
    return [(nrm, on) for on, nrm in facets.items()]


class Fan:
    """A fan in N_R = R^n given by primitive rays and maximal cones.

    Parameters
    ----------
    dim : ambient dimension n
    rays : primitive integer ray generators u_rho
    maximal_cones : cones as lists of 0-based ray indices
    name : optional label used in reports

    Fans are immutable; all derived data is computed once at construction.
    """

    def __init__(self, dim: int, rays: Sequence[Sequence[int]],
                 maximal_cones: Sequence[Sequence[int]], name: str = ""):
        self.dim = int(dim)
        self.name = name
        self.rays: tuple[tuple[int, ...], ...] = tuple(tuple(int(a) for a in r) for r in rays)
        self._validate_rays()
        given = []
        for c in maximal_cones:
            idx = tuple(sorted(set(int(i) for i in c)))
            if any(i < 0 or i >= len(self.rays) for i in idx):
                raise InvalidCone(f"cone {list(c)} refers to a ray index out of range")
            given.append(idx)

        self._facets: dict[tuple, list] = {}
        self._faces: dict[tuple, list[tuple]] = {}
        for idx in given:
            self._check_strongly_convex(idx)
        for idx in given:
            self._enumerate_faces(idx)
        all_keys = set()
        for idx in given:
            all_keys.update(self._faces[idx])
        for key in all_keys:
            self._ensure_facets(key)
        # maximal cones are the given cones not strictly contained in another
        maximal = [k for k in set(given)
                   if not any(k != o and set(k) < set(o) and k in self._faces[o] for o in given)]
        self._cones = {k: Cone(k, self._rank(k)) for k in all_keys}
        self.all_cones: tuple[Cone, ...] = tuple(sorted(self._cones.values(), key=lambda c: (c.dim, c.rays)))
        self.maximal_cones: tuple[Cone, ...] = tuple(sorted((self._cones[k] for k in maximal),
                                                            key=lambda c: (c.dim, c.rays)))
        self._check_intersections()
        # cached H-representations
        self._equations = {k: exact.nullspace([self.rays[i] for i in k], self.dim) for k in all_keys}

    # -- construction helpers -------------------------------------------------

    def _validate_rays(self):
        seen = set()
        for r in self.rays:
            if len(r) != self.dim:
                raise DimensionMismatch(f"ray {list(r)} has dimension {len(r)}, expected {self.dim}")
            g = reduce(gcd, (abs(a) for a in r), 0)
            if g == 0:
                raise NonPrimitiveRay("zero vector is not a ray")
            if g != 1:
                raise NonPrimitiveRay(f"ray {list(r)} is not primitive (gcd {g})")
            if r in seen:
                raise FanError(f"ray {list(r)} listed twice")
            seen.add(r)

    def _rank(self, key) -> int:
        return exact.rank([self.rays[i] for i in key]) if key else 0

    def _check_strongly_convex(self, idx):
        gens = [self.rays[i] for i in idx]
        # pointed iff some functional is strictly positive on every generator
        if gens and not strictly_feasible(gens, [0] * len(gens), self.dim):
            raise NotStronglyConvex(f"cone {list(idx)} contains a line")

    def _ensure_facets(self, key):
        if key not in self._facets:
            gens = [self.rays[i] for i in key]
            self._facets[key] = [(nrm, tuple(sorted(key[p] for p in on)))
                                 for nrm, on in _cone_facets(gens, self.dim)]
        return self._facets[key]

    def _enumerate_faces(self, idx):
        # every face is an intersection of facets
        sets = {frozenset(idx), frozenset()}
        sets.update(frozenset(on) for _, on in self._ensure_facets(idx))
        changed = True
        while changed:
            changed = False
            for a, b in itertools.combinations(list(sets), 2):
                if a & b not in sets:
                    sets.add(a & b)
                    changed = True
        faces = {tuple(sorted(s)) for s in sets}
        # a listed generator that is not itself a face is not extremal
        for i in idx:
            if (i,) not in faces:
                raise InvalidCone(f"ray {i} is not an extremal ray of cone {list(idx)}")
        self._faces[idx] = sorted(faces, key=lambda k: (self._rank(k), k))

    def _check_intersections(self):
        for s1, s2 in itertools.combinations(self.maximal_cones, 2):
            common = tuple(sorted(set(s1.rays) & set(s2.rays)))
            if common not in self._faces[s1.rays] or common not in self._faces[s2.rays]:
                raise ConesNotIntersectingInFaces(
                    f"{s1} and {s2}: shared rays {list(common)} do not span a common face")
            # separation: m >= 0 on s1, <= 0 on s2, vanishing exactly on the common face
            A, b, Aeq, beq = [], [], [], []
            for i in s1.rays:
                if i in common:
                    Aeq.append(self.rays[i])
                    beq.append(0)
                else:
                    A.append([-a for a in self.rays[i]])
                    b.append(-1)
            for i in s2.rays:
                if i not in common:
                    A.append(list(self.rays[i]))
                    b.append(-1)
            res = linprog([0] * self.dim, A, b, Aeq, beq, free=[True] * self.dim)
            if res.status != OPTIMAL:
                raise ConesNotIntersectingInFaces(f"{s1} and {s2} do not meet in a common face")

    # -- queries --------------------------------------------------------------

    def cone(self, rays: Iterable[int]) -> Cone:
        key = tuple(sorted(set(rays)))
        try:
            return self._cones[key]
        except KeyError:
            raise UnknownCone(f"no cone with rays {list(key)} in fan") from None

    def _key(self, c) -> tuple:
        key = c.rays if isinstance(c, Cone) else tuple(sorted(c))
        if key not in self._cones:
            raise UnknownCone(f"{c!r} is not a cone of this fan")
        return key

    @property
    def origin(self) -> Cone:
        return self._cones[()]

    def cones(self, k: Optional[int] = None) -> tuple[Cone, ...]:
        """All cones, or the cones of dimension k (Sigma(k))."""
        if k is None:
            return self.all_cones
        return tuple(c for c in self.all_cones if c.dim == k)

    def generators(self, c) -> list[tuple[int, ...]]:
        return [self.rays[i] for i in self._key(c)]

    def is_simplicial_cone(self, c) -> bool:
        key = self._key(c)
        return len(key) == self._cones[key].dim

    @cached_property
    def is_simplicial(self) -> bool:
        return all(self.is_simplicial_cone(c) for c in self.all_cones)

    @cached_property
    def is_smooth(self) -> bool:
        """Every cone generated by part of a lattice basis."""
        for c in self.maximal_cones:
            if not self.is_simplicial_cone(c):
                return False
            gens = self.generators(c)
            if c.dim == 0:
                continue
            # part of a Z-basis iff gcd of maximal minors is 1
            g = 0
            for rows in itertools.combinations(range(self.dim), c.dim):
                minor = exact.det([[gen[r] for gen in gens] for r in rows])
                g = gcd(g, abs(int(minor)))
            if g != 1:
                return False
        return True

    @property
    def is_full_dimensional(self) -> bool:
        return all(c.dim == self.dim for c in self.maximal_cones)

    def faces(self, c) -> list[Cone]:
        """All faces of c (including c itself and the origin)."""
        return [self._cones[k] for k in self._faces_of(self._key(c))]

    def facets(self, c) -> list[Cone]:
        """Faces of c of codimension one."""
        key = self._key(c)
        d = self._cones[key].dim
        return [f for f in self.faces(c) if f.dim == d - 1]

    def facet_normals(self, c) -> list[tuple[int, ...]]:
        """Inward facet normals m with <m|xi> >= 0 on c (within the span of c)."""
        return [nrm for nrm, _ in self._facets[self._key(c)]]

    def facet_normals_with_faces(self, c) -> list[tuple[tuple[int, ...], Cone]]:
        return [(nrm, self._cones[on]) for nrm, on in self._facets[self._key(c)]]

    def orthogonal_basis(self, c) -> list[tuple[int, ...]]:
        """Integer basis of c^perp."""
        return list(self._equations[self._key(c)])

    def maximal_containing(self, c) -> list[Cone]:
        """Sigma(n, c): maximal cones of dimension n having c as a face."""
        key = self._key(c)
        return [s for s in self.maximal_cones if s.dim == self.dim and key in self._faces[s.rays]]

    def cofaces(self, c) -> list[Cone]:
        key = self._key(c)
        return [s for s in self.all_cones if key in self._faces_of(s.rays)]

    def _faces_of(self, key):
        if key not in self._faces:
            self._enumerate_faces(key)
        return self._faces[key]

    def contains(self, c, xi: Sequence) -> bool:
        """Closed membership of xi in cone c (exact)."""
        xi = exact.rational_point(xi)
        if len(xi) != self.dim:
            raise DimensionMismatch(f"point has dimension {len(xi)}, expected {self.dim}")
        key = self._key(c)
        if any(exact.dot(e, xi) != 0 for e in self._equations[key]):
            return False
        return all(exact.dot(nrm, xi) >= 0 for nrm, _ in self._facets[key])

    def in_relative_interior(self, c, xi: Sequence) -> bool:
        xi = exact.rational_point(xi)
        key = self._key(c)
        if any(exact.dot(e, xi) != 0 for e in self._equations[key]):
            return False
        return all(exact.dot(nrm, xi) > 0 for nrm, _ in self._facets[key])

    def locate(self, xi: Sequence) -> Optional[Cone]:
        """Smallest cone containing xi (xi lies in its relative interior), or None."""
        xi = exact.rational_point(xi)
        if len(xi) != self.dim:
            raise DimensionMismatch(f"point has dimension {len(xi)}, expected {self.dim}")
        for c in self.all_cones:  # sorted by dimension
            if self.contains(c, xi):
                return c
        return None

    @cached_property
    def is_complete(self) -> bool:
        """True iff the cones cover N_R.

        For pure full-dimensional fans this is the facet-pairing criterion:
        every (n-1)-cone lies in exactly two maximal cones. A complete fan is
        necessarily pure of dimension n, so any lower-dimensional maximal
        cone rules completeness out.
        """
        if self.dim == 0:
            return True
        if not self.maximal_cones or not self.is_full_dimensional:
            return False
        for tau in self.cones(self.dim - 1):
            if len(self.maximal_containing(tau)) != 2:
                return False
        return True

    def dual_cone_constraints(self, c) -> list[tuple[int, ...]]:
        """Normals u_rho (rho in c(1)) cutting out c^vee = {x : <x|u_rho> >= 0}."""
        return self.generators(c)

    def cone_index(self, c) -> int:
        return self.all_cones.index(self._cones[self._key(c)])

    # -- serialization --------------------------------------------------------

    def to_dict(self) -> dict:
        return {"dim": self.dim, "rays": [list(r) for r in self.rays],
                "maximal_cones": [list(c.rays) for c in self.maximal_cones]}

    def __repr__(self):
        label = f" {self.name!r}" if self.name else ""
        return f"<Fan{label} dim={self.dim} rays={len(self.rays)} cones={len(self.all_cones)}>"

    def validation_report(self) -> dict:
        return {
            "valid": True,
            "dim": self.dim,
            "rays": len(self.rays),
            "cones_by_dim": {str(k): len(self.cones(k)) for k in range(self.dim + 1)},
            "complete": self.is_complete,
            "simplicial": self.is_simplicial,
            "smooth": self.is_smooth,
        }


def parse_fan(document) -> Fan:
    """Build a validated Fan from a JSON string, a path-free dict, or parsed JSON.

    Schema: ``{"dim": int, "rays": [[int, ...], ...], "maximal_cones": [[int, ...], ...]}``.
    """
    if isinstance(document, (str, bytes)):
        document = json.loads(document)
    try:
        dim = document["dim"]
        rays = document["rays"]
        cones = document.get("maximal_cones", document.get("cones"))
    except (KeyError, TypeError) as exc:
        raise FanError(f"fan document missing field: {exc}") from None
    if cones is None:
        raise FanError("fan document missing field: maximal_cones")
    return Fan(dim, rays, cones, name=document.get("name", ""))


def load_fan(path) -> Fan:
    with open(path) as fh:
        return parse_fan(json.load(fh))


def faces(fan: Fan, c) -> list[Cone]:
    return fan.faces(c)


def locate(fan: Fan, xi) -> Optional[Cone]:
    return fan.locate(xi)


def is_complete(fan: Fan) -> bool:
    return fan.is_complete


def dual_cone_constraints(fan: Fan, c) -> list[tuple[int, ...]]:
    return fan.dual_cone_constraints(c)


def ray_index_map(fan: Fan, other: Fan) -> dict[int, int]:
    """Map ray indices of ``fan`` to the index of the same vector in ``other``."""
    where = {r: i for i, r in enumerate(other.rays)}
    return {i: where[r] for i, r in enumerate(fan.rays) if r in where}

