"""Independent reference computations used to cross-check the package.

Nothing here imports the algorithms it is compared against; each oracle
takes a different route (brute force, float optimisation, direct integration
or closed forms).
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction

import numpy as np
from scipy import integrate, optimize


def rank_gauss(rows):
    """Rank by plain Gauss-Jordan over Fractions (no fraction-free tricks)."""
    m = [[Fraction(a) for a in r] for r in rows]
    if not m:
        return 0
    rk, ncol = 0, len(m[0])
    for c in range(ncol):
        piv = next((i for i in range(rk, len(m)) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[rk], m[piv] = m[piv], m[rk]
        for i in range(len(m)):
            if i != rk and m[i][c] != 0:
                f = m[i][c] / m[rk][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[rk])]
        rk += 1
    return rk


def brute_faces(gens):
    """Faces of cone(gens) as frozensets of generator positions, by subset search.

    A subset S spans a face iff some m is >= 0 on all gens, = 0 exactly on S
    (checked by a float LP with a unit margin off S).
    """
    gens = np.array(gens, dtype=float)
    k, n = gens.shape
    faces = set()
    for size in range(0, k + 1):
        for S in itertools.combinations(range(k), size):
            off = [i for i in range(k) if i not in S]
            A_eq = gens[list(S)] if S else None
            b_eq = np.zeros(len(S)) if S else None
            A_ub = -gens[off] if off else None
            b_ub = -np.ones(len(off)) if off else None
            res = optimize.linprog(np.zeros(n), A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq,
                                   bounds=[(None, None)] * n, method="highs")
            if res.status == 0:
                faces.add(frozenset(S))
    return faces


def bump_constant_1d():
    """1 / integral of exp(-1/(1-x^2)) over (-1, 1), by direct 1-d quadrature."""
    val, _ = integrate.quad(lambda x: math.exp(-1.0 / (1.0 - x * x)), -1, 1, epsabs=1e-14, epsrel=1e-13)
    return 1.0 / val


def bump_integral_grid(n, C, m=801):
    """Midpoint-grid integral of C exp(-1/(1-|u|^2)) over [-1,1]^n."""
    h = 2.0 / m
    axis = -1 + h * (np.arange(m) + 0.5)
    grids = np.meshgrid(*([axis] * n), indexing="ij")
    r2 = sum(g * g for g in grids)
    vals = np.where(r2 < 1, np.exp(-1.0 / np.maximum(1 - r2, 1e-300)), 0.0)
    return float(C * vals.sum() * h ** n)


def float_feasible(normals, offsets, dim, margin=1e-9):
    """Strict feasibility by scipy's float LP (maximise a slack)."""
    A = np.hstack([-np.array(normals, dtype=float), np.ones((len(normals), 1))])
    b = -np.array([float(o) for o in offsets])
    c = np.zeros(dim + 1)
    c[-1] = -1
    res = optimize.linprog(c, A_ub=A, b_ub=b, bounds=[(None, None)] * dim + [(None, 1)], method="highs")
    return res.status == 0 and -res.fun > margin


def hull_distance_qp(points, p):
    """Distance to a convex hull by SLSQP over barycentric weights."""
    P = np.asarray(points, dtype=float)
    k = len(P)
    obj = lambda w: float(np.sum((w @ P - p) ** 2))
    cons = [{"type": "eq", "fun": lambda w: np.sum(w) - 1}]
    best = math.inf
    for start in [np.full(k, 1.0 / k)] + [np.eye(k)[i] for i in range(k)]:
        res = optimize.minimize(obj, start, bounds=[(0, 1)] * k, constraints=cons, method="SLSQP",
                                options={"ftol": 1e-15, "maxiter": 500})
        best = min(best, math.sqrt(max(res.fun, 0.0)))
    return best


def p1_interval(a_plus, a_minus):
    """Open interval (-a_plus, a_minus) carrying P(D) on P1 for D = a_plus D_+ + a_minus D_-."""
    return Fraction(-a_plus), Fraction(a_minus)


def p1_stalk(a_plus, a_minus, x):
    """Stalk of P(D) on P1 from the count of half-lines containing x."""
    lo, hi = p1_interval(a_plus, a_minus)
    hits = (x > lo) + (x < hi)
    return {2: {-1: 1}, 1: {}, 0: {0: 1}}[hits]


def primes_over(k):
    p = k + 1
    while any(p % d == 0 for d in range(2, int(p ** 0.5) + 1)):
        p += 1
    return p
