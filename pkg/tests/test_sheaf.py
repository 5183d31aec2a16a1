import json
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from toric_ccc import presets
from toric_ccc.divisor import ToricDivisor, cartier_data
from toric_ccc.errors import FanNotComplete, UnboundedSupport, UnknownCone
from toric_ccc.nearby import _convolution_box, wall_avoiding_points
from toric_ccc.sheaf import (OpenPolyhedron, ShardComplex, ShardTerm, _plan, cohomology,
                             convolve_stalk, feasible, minkowski_sum, parse_complex,
                             singular_support, stalk, torus_convolve_stalk, torus_stalk,
                             twisted_polytope_sheaf)

from oracles import p1_stalk


def sheaf(fan, coeffs):
    return twisted_polytope_sheaf(fan, cartier_data(fan, ToricDivisor(coeffs)))


def test_p1_o2_golden():
    cx = sheaf(presets.p1(), (1, 1))
    assert stalk(cx, [0]).dims == {-1: 1}
    assert stalk(cx, [Fraction(99, 100)]).dims == {-1: 1}
    for x in (-1, 1, 2, Fraction(-7, 3)):
        assert stalk(cx, [x]).dims == {}


@given(st.integers(-3, 3), st.integers(-3, 3), st.fractions(-5, 5, max_denominator=13))
def test_p1_stalks_against_half_line_count(a, b, x):
    cx = sheaf(presets.p1(), (a, b))
    assert stalk(cx, [x]).dims == p1_stalk(a, b, x)


@pytest.mark.parametrize("make", [presets.p1, presets.p2, presets.p1xp1, presets.hirzebruch])
def test_d_squared_zero(make):
    fan = make()
    for d in ((1,) * len(fan.rays), (2,) + (0,) * (len(fan.rays) - 1), (-1,) * len(fan.rays)):
        assert sheaf(fan, d).d_squared_is_zero()


def test_noncomplete_fan_is_rejected():
    with pytest.raises(FanNotComplete):
        sheaf(presets.a2(), (1, 1))


def test_p2_support_is_open_polytope():
    # region where the stalk is nonzero is the open triangle <m|u_rho> > -1
    cx = sheaf(presets.p2(), (1, 1, 1))
    rng = np.random.default_rng(0)
    for _ in range(100):
        x = tuple(Fraction(int(v), 7) for v in rng.integers(-21, 22, 2))
        inside = x[0] > -1 and x[1] > -1 and x[0] + x[1] < 1
        assert stalk(cx, x).dims == ({-2: 1} if inside else {})


def test_cohomology_small_complex():
    # e0 -> e1 identity, e2 alone in degree 1
    assert cohomology([0, 1, 1], {(1, 0): 1}, [0, 1, 2]) == {0: 0, 1: 1}
    assert cohomology([0, 1], {(1, 0): 1}, [1]) == {1: 1}


def test_open_polyhedra_and_minkowski():
    P = OpenPolyhedron(((( 1,), 0), ((-1,), -1)), 1)  # (0, 1)
    Q = OpenPolyhedron((((1,), 2), ((-1,), -5)), 1)   # (2, 5)
    S = minkowski_sum(P, Q)
    assert S.contains([3]) and S.contains([Fraction(59, 10)]) and not S.contains([2]) and not S.contains([6])
    assert not feasible(OpenPolyhedron((((1,), 0), ((-1,), 0)), 1))
    assert minkowski_sum(P, OpenPolyhedron((((1,), 0), ((-1,), 0)), 1)) is None
    assert P.reflected_at([1]).contains([Fraction(1, 2)])
    assert P.translated([3]).contains([Fraction(7, 2)])


@pytest.mark.parametrize("make,coeffs", [(presets.p1, (1, 2)), (presets.p2, (1, 1, 1)),
                                         (presets.p1xp1, (0, 0, 1, 1))])
def test_lp_and_minkowski_routes_agree(make, coeffs):
    fan = make()
    F = sheaf(fan, coeffs)
    G = sheaf(fan, tuple(2 * c for c in coeffs))
    plan = _plan(F, G)
    xs = wall_avoiding_points([F, G], [plan], 15, 4, _convolution_box(F, G, 1))
    for x in xs:
        assert convolve_stalk(F, G, x, "lp").dims == convolve_stalk(F, G, x, "minkowski").dims


def test_json_roundtrip():
    cx = sheaf(presets.hirzebruch(), (0, 0, 1, 2))
    again = parse_complex(cx.to_json())
    assert again.to_dict() == cx.to_dict()
    x = (Fraction(1, 3), Fraction(1, 5))
    assert stalk(again, x).dims == stalk(cx, x).dims
    assert json.loads(cx.to_json())["schema"].startswith("toric_ccc.shard_complex")


def test_stalk_locality():
    # a two-term complex whose stalks depend only on which regions contain x
    R = OpenPolyhedron((((1, 0), 0),), 2)
    cx = ShardComplex(2, [ShardTerm(R, -1), ShardTerm(OpenPolyhedron.whole(2), 0)], {(1, 0): 1})
    assert stalk(cx, (1, 0)).dims == {}
    assert stalk(cx, (-1, 0)).dims == {0: 1}
    with pytest.raises(ValueError):
        ShardComplex(2, [ShardTerm(R, 0), ShardTerm(R, 0)], {(1, 0): 1})


def test_singular_support_counts():
    fan = presets.p2()
    comps = singular_support(fan, (0, 1), (0, 0))
    assert len(comps) == 4 and sum(c.zero_section for c in comps) == 1
    full = comps[0]
    assert full.face == (0, 1) and len(full.codirections) == 2 and not full.base_generators
    origin = [c for c in comps if c.zero_section][0]
    assert len(origin.base_generators) == 2
    with pytest.raises(UnknownCone):
        singular_support(fan, (0, 5), (0, 0))


def test_torus_goldens():
    p1 = presets.p1()
    assert torus_stalk(sheaf(p1, (1, 1)), [Fraction(1, 4)]).dims == {-1: 2}
    assert torus_stalk(sheaf(p1, (3, 3)), [Fraction(1, 2)]).dims == {-1: 6}
    P0 = sheaf(p1, (0, 0))
    assert torus_stalk(P0, [Fraction(1, 3)]).dims == {}
    assert torus_stalk(P0, [0]).dims == {0: 1}
    F = sheaf(p1, (1, 1))
    assert torus_convolve_stalk(F, F, [Fraction(1, 4)]).dims == torus_stalk(sheaf(p1, (2, 2)), [Fraction(1, 4)]).dims


def test_unbounded_support_is_reported():
    cx = ShardComplex(1, [ShardTerm(OpenPolyhedron((((1,), 0),), 1), 0)], {}, apexes=[(0,)])
    with pytest.raises(UnboundedSupport):
        torus_stalk(cx, [Fraction(1, 2)], radius=2)
