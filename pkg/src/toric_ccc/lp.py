"""Exact rational linear programming (two-phase tableau simplex, Bland's rule).

Only meant for the handful of variables and constraints that show up in
fan and shard computations; every pivot is done with Fractions so that
feasibility answers never depend on a tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .exact import to_fraction

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"


@dataclass(frozen=True)
class LPResult:
    status: str
    value: Optional[Fraction] = None
    x: Optional[tuple] = None


def _pivot(T, r, c):
    prow = T[r]
    inv = 1 / prow[c]
    T[r] = prow = [a * inv for a in prow]
    for i, row in enumerate(T):
        if i != r:
            f = row[c]
            if f:
                T[i] = [a - f * b for a, b in zip(row, prow)]


def _run(T, basis, ncols):
    """Minimise the objective stored in the last row of T. Returns status."""
    obj = len(T) - 1
    while True:
        z = T[obj]
        enter = next((j for j in range(ncols) if z[j] < 0), None)
        if enter is None:
            return OPTIMAL
        best = None
        for i in range(obj):
            a = T[i][enter]
            if a > 0:
                ratio = T[i][-1] / a
                key = (ratio, basis[i])
                if best is None or key < best[0]:
                    best = (key, i)
        if best is None:
            return UNBOUNDED
        leave = best[1]
        _pivot(T, leave, enter)
        basis[leave] = enter


def linprog(c: Sequence, A_ub: Sequence[Sequence] = (), b_ub: Sequence = (),
            A_eq: Sequence[Sequence] = (), b_eq: Sequence = (),
            free: Sequence[bool] | None = None) -> LPResult:
    """Minimise ``c.x`` subject to ``A_ub x <= b_ub``, ``A_eq x = b_eq``.

    Variables are nonnegative unless flagged in ``free``. The returned
    value and point are exact Fractions.
    """
    nv = len(c)
    free = list(free) if free is not None else [False] * nv
    # column map: each free variable becomes x+ - x-
    cols = []
    for j in range(nv):
        cols.append((j, 1))
        if free[j]:
            cols.append((j, -1))
    nx = len(cols)

    def expand(row):
        row = [to_fraction(a) for a in row]
        return [s * row[j] for j, s in cols]

    rows, rhs, kinds = [], [], []
    for a, b in zip(A_ub, b_ub):
        rows.append(expand(a))
        rhs.append(to_fraction(b))
        kinds.append("ub")
    for a, b in zip(A_eq, b_eq):
        rows.append(expand(a))
        rhs.append(to_fraction(b))
        kinds.append("eq")
    m = len(rows)
    nslack = sum(1 for k in kinds if k == "ub")
    ncols = nx + nslack
    T = []
    basis = []
    art_rows = []
    s = 0
    for i in range(m):
        row = rows[i] + [Fraction(0)] * nslack
        if kinds[i] == "ub":
            row[nx + s] = Fraction(1)
            slack_col = nx + s
            s += 1
        else:
            slack_col = None
        b = rhs[i]
        if b < 0:
            row = [-a for a in row]
            b = -b
        if slack_col is not None and row[slack_col] == 1:
            basis.append(slack_col)
        else:
            basis.append(None)
            art_rows.append(i)
        T.append(row + [b])
    nart = len(art_rows)
    total = ncols + nart
    for i in range(m):
        T[i] = T[i][:-1] + [Fraction(0)] * nart + [T[i][-1]]
    for k, i in enumerate(art_rows):
        T[i][ncols + k] = Fraction(1)
        basis[i] = ncols + k

    if nart:
        # phase 1: minimise the sum of artificials
        z = [Fraction(0)] * (total + 1)
        for i in art_rows:
            z = [a - b for a, b in zip(z, T[i])]
        for k in range(nart):
            z[ncols + k] = Fraction(0)
        T.append(z)
        _run(T, basis, total)
        if T[-1][-1] != 0:
            return LPResult(INFEASIBLE)
        T.pop()
        # drive artificials out of the basis
        i = 0
        while i < len(T):
            if basis[i] >= ncols:
                c_in = next((j for j in range(ncols) if T[i][j] != 0), None)
                if c_in is None:
                    T.pop(i)
                    basis.pop(i)
                    continue
                _pivot(T, i, c_in)
                basis[i] = c_in
            i += 1
        T = [r[:ncols] + [r[-1]] for r in T]

    cost = expand(c) + [Fraction(0)] * nslack
    z = cost + [Fraction(0)]
    for i, bi in enumerate(basis):
        cb = cost[bi]
        if cb:
            z = [a - cb * b for a, b in zip(z, T[i])]
    T.append(z)
    status = _run(T, basis, ncols)
    if status == UNBOUNDED:
        return LPResult(UNBOUNDED)
    vals = [Fraction(0)] * ncols
    for i, bi in enumerate(basis):
        vals[bi] = T[i][-1]
    x = [Fraction(0)] * nv
    for k, (j, sgn) in enumerate(cols):
        x[j] += sgn * vals[k]
    value = -T[-1][-1]
    return LPResult(OPTIMAL, value, tuple(x))


def strictly_feasible(normals: Sequence[Sequence], offsets: Sequence, dim: int) -> bool:
    """Is {x : <normal_i|x> > offset_i for all i} nonempty?

    Solves max delta s.t. <n_i|x> >= c_i + delta, delta <= 1, and answers
    delta* > 0.
    """
    if not normals:
        return True
    A, b = [], []
    for nrm, off in zip(normals, offsets):
        A.append([-to_fraction(a) for a in nrm] + [Fraction(1)])
        b.append(-to_fraction(off))
    A.append([Fraction(0)] * dim + [Fraction(1)])
    b.append(Fraction(1))
    res = linprog([Fraction(0)] * dim + [Fraction(-1)], A, b, free=[True] * (dim + 1))
    return res.status == OPTIMAL and -res.value > 0
