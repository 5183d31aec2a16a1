from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from toric_ccc import exact
from toric_ccc.lp import INFEASIBLE, OPTIMAL, UNBOUNDED, linprog, strictly_feasible

from oracles import float_feasible, rank_gauss

small = st.integers(-4, 4)
matrices = st.integers(1, 5).flatmap(
    lambda c: st.lists(st.lists(small, min_size=c, max_size=c), min_size=0, max_size=5))


@given(matrices)
def test_bareiss_rank_matches_gauss_jordan(m):
    assert exact.rank(m) == rank_gauss(m)


@given(matrices)
def test_nullspace_is_annihilated_and_complementary(m):
    if not m:
        return
    ncols = len(m[0])
    basis = exact.nullspace(m, ncols)
    assert len(basis) == ncols - exact.rank(m)
    for v in basis:
        assert all(exact.dot(r, v) == 0 for r in m)


@given(st.lists(st.lists(small, min_size=3, max_size=3), min_size=1, max_size=3),
       st.lists(small, min_size=3, max_size=3))
def test_solve_min_norm_solves_consistent_systems(rows, x0):
    rhs = [exact.dot(r, x0) for r in rows]
    x = exact.solve_min_norm(rows, rhs, 3)
    assert x is not None
    assert all(exact.dot(r, x) == b for r, b in zip(rows, rhs))
    # least norm: no larger than the planted solution
    assert sum(a * a for a in x) <= sum(Fraction(a) ** 2 for a in x0)


def test_primitive_and_fraction_parsing():
    assert exact.primitive([Fraction(2, 3), Fraction(4, 3)]) == (1, 2)
    assert exact.to_fraction("7/2") == Fraction(7, 2)
    assert exact.to_fraction("0.25") == Fraction(1, 4)
    with pytest.raises(ValueError):
        exact.primitive([0, 0])


def test_det_and_coordinates():
    assert exact.det([[1, 2], [3, 4]]) == -2
    assert exact.coordinates([(1, 0, 0), (1, 1, 0)], (3, 2, 0)) == (1, 2)


def test_lp_statuses():
    # min -x s.t. x <= 3
    r = linprog([-1], [[1]], [3])
    assert r.status == OPTIMAL and r.value == -3
    assert linprog([-1], [[-1]], [0]).status == UNBOUNDED
    assert linprog([0], [[1], [-1]], [-1, -1]).status == INFEASIBLE
    # equality with free variables
    r = linprog([1, 1], A_eq=[[1, -1]], b_eq=[2], A_ub=[[-1, 0], [0, -1]], b_ub=[0, 0])
    assert r.status == OPTIMAL and r.value == 2


def test_strict_feasibility_examples():
    assert not strictly_feasible([[1], [-1]], [0, 0], 1)
    assert strictly_feasible([], [], 2)
    assert strictly_feasible([[1, 0], [0, 1], [1, 1]], [0, 0, -1], 2)
    # touching half-planes: closed intersection is a line, open one is empty
    assert not strictly_feasible([[1, 0], [-1, 0]], [1, -1], 2)


@given(st.lists(st.tuples(small, small, st.integers(-3, 3)), min_size=1, max_size=6))
def test_exact_strict_feasibility_agrees_with_float_lp(rows):
    normals = [(a, b) for a, b, _ in rows]
    offsets = [c for _, _, c in rows]
    if any(a == 0 and b == 0 for a, b in normals):
        return
    assert strictly_feasible(normals, offsets, 2) == float_feasible(normals, offsets, 2)
