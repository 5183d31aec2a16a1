"""Exact rational linear algebra on small dense matrices.

Matrices are lists of rows; entries are ints or :class:`fractions.Fraction`.
Everything here is tiny (fans and stalk complexes at desk scale), so plain
Python loops are fine and keep the arithmetic exact.
"""

from __future__ import annotations

from fractions import Fraction
from functools import reduce
from math import gcd, lcm
from typing import Iterable, Sequence

Vector = tuple  # tuple of Fraction / int


def to_fraction(x) -> Fraction:
    """Convert ints, Fractions, decimal strings or floats to an exact Fraction.

    Floats are converted exactly (binary expansion), so prefer strings for
    user input such as ``"0.25"`` or ``"7/2"``.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, str):
        return Fraction(x.strip())
    return Fraction(x)


def rational_point(coords: Iterable) -> tuple[Fraction, ...]:
    return tuple(to_fraction(c) for c in coords)


def dot(u: Sequence, v: Sequence):
    return sum((a * b for a, b in zip(u, v)), Fraction(0))


def primitive(v: Sequence) -> tuple[int, ...]:
    """Scale a nonzero rational vector to the primitive integer vector on its ray."""
    v = [to_fraction(a) for a in v]
    den = reduce(lcm, (a.denominator for a in v), 1)
    ints = [int(a * den) for a in v]
    g = reduce(gcd, (abs(a) for a in ints), 0)
    if g == 0:
        raise ValueError("zero vector has no primitive generator")
    return tuple(a // g for a in ints)


def _rref(rows: Sequence[Sequence], ncols: int):
    """Reduced row echelon form over Q. Returns (matrix, pivot_columns)."""
    m = [[to_fraction(a) for a in r] for r in rows]
    pivots = []
    r = 0
    for c in range(ncols):
        p = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if p is None:
            continue
        m[r], m[p] = m[p], m[r]
        inv = 1 / m[r][c]
        m[r] = [a * inv for a in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return m, pivots


def rank(rows: Sequence[Sequence]) -> int:
    """Rank over Q by fraction-free (Bareiss) elimination."""
    if not rows or not rows[0]:
        return 0
    # clear denominators row by row; rank is unchanged
    m = []
    for r in rows:
        fr = [to_fraction(a) for a in r]
        den = reduce(lcm, (a.denominator for a in fr), 1)
        m.append([int(a * den) for a in fr])
    nrows, ncols = len(m), len(m[0])
    rk = 0
    prev = 1
    for c in range(ncols):
        p = next((i for i in range(rk, nrows) if m[i][c] != 0), None)
        if p is None:
            continue
        m[rk], m[p] = m[p], m[rk]
        piv = m[rk][c]
        for i in range(rk + 1, nrows):
            mic = m[i][c]
            row_i, row_r = m[i], m[rk]
            m[i] = [(piv * row_i[j] - mic * row_r[j]) // prev for j in range(ncols)]
        prev = piv
        rk += 1
        if rk == nrows:
            break
    return rk


def nullspace(rows: Sequence[Sequence], ncols: int) -> list[tuple[int, ...]]:
    """Basis of {x : A x = 0} as primitive integer vectors."""
    if not rows:
        return [tuple(1 if i == j else 0 for i in range(ncols)) for j in range(ncols)]
    m, pivots = _rref(rows, ncols)
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        v = [Fraction(0)] * ncols
        v[f] = Fraction(1)
        for i, pc in enumerate(pivots):
            v[pc] = -m[i][f]
        basis.append(primitive(v))
    return basis


def solve(rows: Sequence[Sequence], rhs: Sequence, ncols: int):
    """One exact solution of A x = b (free variables set to 0), or None."""
    aug = [list(r) + [b] for r, b in zip(rows, rhs)]
    m, pivots = _rref(aug, ncols + 1)
    if ncols in pivots:
        return None
    x = [Fraction(0)] * ncols
    for i, pc in enumerate(pivots):
        x[pc] = m[i][ncols]
    return tuple(x)


def solve_min_norm(rows: Sequence[Sequence], rhs: Sequence, ncols: int):
    """The least-norm exact solution of A x = b (lies in the row space), or None."""
    if not rows:
        return tuple(Fraction(0) for _ in range(ncols))
    # x = A^T y with (A A^T) y = b
    k = len(rows)
    gram = [[dot(rows[i], rows[j]) for j in range(k)] for i in range(k)]
    y = solve(gram, rhs, k)
    if y is None:
        return None
    x = tuple(sum((y[i] * to_fraction(rows[i][c]) for i in range(k)), Fraction(0)) for c in range(ncols))
    if any(dot(r, x) != to_fraction(b) for r, b in zip(rows, rhs)):
        return None
    return x


def det(mat: Sequence[Sequence]) -> Fraction:
    n = len(mat)
    m = [[to_fraction(a) for a in r] for r in mat]
    d = Fraction(1)
    for c in range(n):
        p = next((i for i in range(c, n) if m[i][c] != 0), None)
        if p is None:
            return Fraction(0)
        if p != c:
            m[c], m[p] = m[p], m[c]
            d = -d
        d *= m[c][c]
        for i in range(c + 1, n):
            f = m[i][c] / m[c][c]
            if f:
                m[i] = [a - f * b for a, b in zip(m[i], m[c])]
    return d


def independent_subset(vectors: Sequence[Sequence]) -> list[int]:
    """Indices of a greedy (first-come) maximal linearly independent subset."""
    chosen: list[int] = []
    for i, v in enumerate(vectors):
        if rank([vectors[j] for j in chosen] + [v]) > len(chosen):
            chosen.append(i)
    return chosen


def coordinates(basis: Sequence[Sequence], v: Sequence) -> tuple[Fraction, ...]:
    """Coordinates of v in a linearly independent list ``basis`` (v must lie in its span)."""
    k = len(basis)
    n = len(v)
    rows = [[basis[j][i] for j in range(k)] for i in range(n)]
    x = solve(rows, list(v), k)
    if x is None:
        raise ValueError("vector not in span of basis")
    return x
