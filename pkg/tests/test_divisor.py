from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from toric_ccc import presets
from toric_ccc.divisor import (CartierData, SupportFunction, ToricDivisor, cartier_data,
                               check_cartier_conditions, check_continuity, check_hull_property,
                               extend_to_completion, parse_divisor)
from toric_ccc.errors import NotACompletion, NotCartier, NotCartierAfterExtension, OutsideSupport
from toric_ccc.fan import Fan

COMPLETE = [presets.p1, presets.p2, presets.p1xp1, presets.hirzebruch]
coeff = st.integers(-4, 4)


def test_p1_and_p2_chis():
    p1 = presets.p1()
    cd = cartier_data(p1, presets.o_p1(2))
    assert [cd.chi[s] for s in p1.maximal_cones] == [(-1,), (1,)]
    p2 = presets.p2()
    cd = cartier_data(p2, ToricDivisor((1, 1, 1)))
    chis = {s.rays: cd.chi[s] for s in p2.maximal_cones}
    assert chis == {(0, 1): (-1, -1), (1, 2): (2, -1), (0, 2): (-1, 2)}
    assert cd.is_cartier


def test_origin_chi_is_weighted_average():
    p2 = presets.p2()
    cd = cartier_data(p2, ToricDivisor((1, 1, 1)))
    lam = cd.weights[p2.origin]
    assert sum(lam.values()) == 1
    assert sorted(lam.values()) == [Fraction(1, 4), Fraction(3, 8), Fraction(3, 8)]


def test_non_cartier_on_cube_fan():
    rays = [(a, b, c) for a in (1, -1) for b in (1, -1) for c in (1, -1)]
    idx = {r: i for i, r in enumerate(rays)}
    cones = [[idx[r] for r in rays if r[k] == s] for k in range(3) for s in (1, -1)]
    fan = Fan(3, rays, cones)
    with pytest.raises(NotCartier):
        cartier_data(fan, ToricDivisor((1,) + (0,) * 7))
    cd = cartier_data(fan, ToricDivisor((1,) * 8))
    assert not check_cartier_conditions(cd)


@pytest.mark.parametrize("make", COMPLETE)
@given(st.lists(coeff, min_size=4, max_size=4), st.lists(coeff, min_size=4, max_size=4))
def test_cartier_conditions_and_additivity(make, a, b):
    fan = make()
    k = len(fan.rays)
    d1, d2 = ToricDivisor(a[:k]), ToricDivisor(b[:k])
    c1, c2, c12 = cartier_data(fan, d1), cartier_data(fan, d2), cartier_data(fan, d1 + d2)
    assert not check_cartier_conditions(c12)
    for s in fan.all_cones:
        assert c12.chi[s] == tuple(x + y for x, y in zip(c1.chi[s], c2.chi[s]))
    assert check_hull_property(c12)["pass"]
    assert check_continuity(SupportFunction(fan, c12), samples=3, seed=1)["pass"]


def test_continuity_detects_corrupted_data():
    fan = presets.p2()
    cd = cartier_data(fan, ToricDivisor((1, 1, 1)))
    chi = dict(cd.chi)
    s = fan.maximal_cones[0]
    chi[s] = (chi[s][0] + 1, chi[s][1])
    bad = CartierData(fan, cd.divisor, chi, cd.weights)
    rep = check_continuity(SupportFunction(fan, bad), samples=5)
    assert not rep["pass"] and rep["violations"]
    assert check_cartier_conditions(bad)


def test_support_function_values():
    sf = SupportFunction.of(presets.p1(), presets.o_p1(2))
    assert sf([3]) == -3 and sf([-2]) == -2 and sf([0]) == 0
    with pytest.raises(OutsideSupport):
        SupportFunction.of(presets.a1(), ToricDivisor((1,)))([-1])


def test_parse_divisor_forms():
    assert parse_divisor('{"coeffs": [1, 2]}') == ToricDivisor((1, 2))
    assert parse_divisor([3]) == ToricDivisor((3,))


def test_extension_cases():
    comp, ext = extend_to_completion(presets.a1(), ToricDivisor((1,)), presets.p1(), {1: 0})
    assert ext == ToricDivisor((1, 0))
    comp, ext = extend_to_completion(presets.a2(), ToricDivisor((1, 1)), presets.p2(), {2: 3})
    assert ext == ToricDivisor((1, 1, 3))
    sf, sfe = SupportFunction.of(presets.a2(), ToricDivisor((1, 1))), SupportFunction.of(comp, ext)
    for xi in [(1, 0), (0, 1), (2, 5), (Fraction(1, 3), 4)]:
        assert sf(xi) == sfe(xi)


def test_extension_errors():
    with pytest.raises(NotACompletion):
        extend_to_completion(presets.a2(), ToricDivisor((1, 1)), presets.a2())
    with pytest.raises(NotACompletion):
        extend_to_completion(presets.a1(), ToricDivisor((1,)), presets.p2())
    # completion whose cones straddle the first quadrant
    skew = Fan(2, [[1, 1], [-1, 1], [-1, -1], [1, -1]], [[0, 1], [1, 2], [2, 3], [0, 3]])
    with pytest.raises(NotACompletion):
        extend_to_completion(presets.a2(), ToricDivisor((1, 1)), skew)
    # a new ray inside |fan| has a forced coefficient
    sub = Fan(2, [[1, 0], [1, 1], [0, 1], [-1, -1]], [[0, 1], [1, 2], [2, 3], [0, 3]])
    comp, ext = extend_to_completion(presets.a2(), ToricDivisor((1, 1)), sub)
    assert ext.coeffs[1] == 2
    with pytest.raises(NotCartierAfterExtension):
        extend_to_completion(presets.a2(), ToricDivisor((1, 1)), sub, {1: 5})
