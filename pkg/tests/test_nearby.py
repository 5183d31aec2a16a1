from fractions import Fraction

import numpy as np
import pytest

from toric_ccc import presets
from toric_ccc.divisor import ToricDivisor, cartier_data
from toric_ccc.errors import OriginCone, ScheduleTooShort
from toric_ccc.exact import dot
from toric_ccc.nearby import (FrontExperiment, _convolution_box, _walls, front_convergence,
                              front_distance, picard_action_check, sample_conormal,
                              sample_conormal_strata, torus_action_check, wall_avoiding_points)
from toric_ccc.sheaf import _plan, twisted_polytope_sheaf
from toric_ccc.smoothing import QuadratureConfig

Q = QuadratureConfig(sample_count=20_000)


def test_conormal_samples_lie_on_strata():
    fan = presets.p2()
    sigma = fan.cone((0, 1))
    for p, tau in sample_conormal_strata(fan, sigma, 40, 1):
        assert abs(np.linalg.norm(p.xi) - 1) < 1e-12
        for r in sigma.rays:
            u = np.array(fan.rays[r], dtype=float)
            val = u @ p.x
            assert val >= -1e-12
            if r in tau.rays:
                assert abs(val) < 1e-12
        # -xi is a positive combination of the rays of tau
        gens = np.array(fan.generators(tau), dtype=float)
        coef = np.linalg.lstsq(gens.T, -p.xi, rcond=None)[0]
        assert np.allclose(gens.T @ coef, -p.xi) and np.all(coef >= 0)
    assert sample_conormal(fan, sigma, 0, 0) == []
    with pytest.raises(OriginCone):
        sample_conormal(fan, fan.origin, 5, 0)


def test_front_distance_vanishes_on_target():
    fan = presets.p1xp1()
    sigma = fan.cone((0, 1))
    assert front_distance(fan, sigma, (0, 0), np.array([0.0, 3.0])) == 0
    assert front_distance(fan, sigma, (1, 1), np.array([0.0, 0.0])) == pytest.approx(2 ** 0.5)
    assert front_distance(fan, sigma, (0, 0), np.array([2.0, 2.0])) == pytest.approx(2.0)


def test_front_schedule_validation():
    fan = presets.p1()
    cd = cartier_data(fan, presets.o_p1(2))
    with pytest.raises(ScheduleTooShort):
        front_convergence(FrontExperiment(fan, cd, fan.cone((0,)), (0.2, 0.1), 5, 0, Q))
    with pytest.raises(ValueError):
        front_convergence(FrontExperiment(fan, cd, fan.cone((0,)), (0.1, 0.2, 0.05), 5, 0, Q))


def test_front_convergence_p1():
    fan = presets.p1()
    cd = cartier_data(fan, presets.o_p1(2))
    rep = front_convergence(FrontExperiment(fan, cd, fan.cone((0,)), (0.2, 0.1, 0.05, 0.025), 10, 0, Q))
    assert rep["pass"] and rep["monotone"]
    assert rep["rate"] is None or rep["rate"] >= 0.8


def test_wall_avoiding_points_are_off_walls():
    fan = presets.p2()
    F = twisted_polytope_sheaf(fan, cartier_data(fan, ToricDivisor((1, 1, 1))))
    plan = _plan(F, F)
    walls = _walls([F], [plan])
    xs = wall_avoiding_points([F], [plan], 30, 2, _convolution_box(F, F, 1))
    assert len(set(xs)) > 1
    for x in xs:
        assert all(dot(w, x) != b for w, b in walls)
    txs = wall_avoiding_points([F], [plan], 10, 2, _convolution_box(F, F, 1), torus=True)
    for x in txs:
        assert all(0 <= a < 1 for a in x)
    assert wall_avoiding_points([F], [plan], 30, 2, _convolution_box(F, F, 1)) == xs


def test_picard_and_torus_checks():
    fan = presets.p1()
    rep = picard_action_check(fan, presets.o_p1(1), presets.o_p1(2), 20, 0)
    assert rep["pass"] and rep["passed"] == 20
    assert picard_action_check(fan, presets.o_p1(1), presets.o_p1(2), 10, 0, "minkowski")["pass"]
    rep = torus_action_check(fan, presets.o_p1(2), presets.o_p1(3), 10, 0, 8)
    assert rep["pass"] and rep["provenance"] == "exact"
