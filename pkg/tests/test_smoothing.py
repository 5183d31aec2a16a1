import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate

from toric_ccc import presets
from toric_ccc.divisor import ToricDivisor, cartier_data
from toric_ccc.errors import ZeroCovector
from toric_ccc.fan import Fan
from toric_ccc.smoothing import (Mollifier, QuadratureConfig, R_constant, density,
                                 grad_smoothed_support, hull_distance, limit_weights,
                                 region_weights, region_weights_with_error, smoothed_support,
                                 verify_gradient_limit, verify_limsup_containment,
                                 verify_uniform_bound)

from oracles import bump_constant_1d, bump_integral_grid, hull_distance_qp

MC = QuadratureConfig(sample_count=100_000)
SMALL = QuadratureConfig(sample_count=20_000)
GRID = QuadratureConfig(method="product_grid", sample_count=400 ** 2)


def test_normalization_matches_direct_quadrature():
    assert Mollifier.bump(1).normalization == pytest.approx(bump_constant_1d(), rel=1e-10)
    for n in (1, 2):
        assert bump_integral_grid(n, Mollifier.bump(n).normalization) == pytest.approx(1, abs=1e-4)


def test_density_support():
    m = Mollifier.bump(2)
    assert density(m, [1.0, 0.0]) == 0.0
    assert density(m, [[0, 0], [2, 0]]).tolist()[1] == 0.0
    assert density(m, [0, 0]) == pytest.approx(m.normalization * math.exp(-1))


def test_p1_weights_against_one_dimensional_integral():
    fan = presets.p1()
    cd = cartier_data(fan, presets.o_p1(2))
    C = bump_constant_1d()
    eta = lambda u: C * math.exp(-1 / (1 - u * u)) if abs(u) < 1 else 0.0
    for eps in (0.5, 2.0, 4.0):
        # y = 1 - eps u lies in the positive ray iff u < 1/eps
        expect = integrate.quad(eta, -1, min(1, 1 / eps))[0]
        w, se = region_weights_with_error(fan, cd, eps, [1.0], MC)
        pos = fan.cone([0])
        assert abs(w[pos] - expect) <= 4 * se[pos] + 1e-12
        g = region_weights(fan, cd, eps, [1.0], GRID)
        assert g[pos] == pytest.approx(expect, abs=1e-4)


def _phi_p2(xi):
    # the all-ones divisor is ample, so phi is the minimum of its chi's
    return min(-xi[0] - xi[1], 2 * xi[0] - xi[1], -xi[0] + 2 * xi[1])


def test_p2_smoothed_value_against_polar_integral():
    fan = presets.p2()
    cd = cartier_data(fan, ToricDivisor((1, 1, 1)))
    C = Mollifier.bump(2).normalization
    for xh, eps in [((1.0, 0.0), 0.5), ((0.6, 0.8), 1.5)]:
        xh = np.array(xh)
        f = lambda r, a: C * math.exp(-1 / (1 - r * r)) * r * _phi_p2(xh - eps * r * np.array([math.cos(a), math.sin(a)]))
        expect = integrate.dblquad(f, 0, 2 * math.pi, 0, 1, epsabs=1e-9)[0]
        ev = grad_smoothed_support(fan, cd, eps, xh, MC, with_fd=False)
        assert abs(ev.f_eps - expect) <= 4 * ev.stderr_f
        assert smoothed_support(fan, cd, eps, xh, GRID) == pytest.approx(expect, abs=2e-3)


@pytest.mark.parametrize("make", [presets.p2, presets.p1xp1, presets.hirzebruch])
def test_monte_carlo_agrees_with_grid(make):
    fan = make()
    cd = cartier_data(fan, ToricDivisor.zero(fan))
    rng = np.random.default_rng(3)
    for _ in range(5):
        v = rng.standard_normal(2)
        v /= np.linalg.norm(v)
        w, se = region_weights_with_error(fan, cd, 0.4, v, MC)
        g = region_weights(fan, cd, 0.4, v, GRID)
        for c in w:
            assert abs(w[c] - g[c]) <= 4 * se[c] + 2e-3


@given(st.floats(0.1, 10), st.floats(-math.pi, math.pi))
def test_one_homogeneity(c, angle):
    fan = presets.p2()
    cd = cartier_data(fan, ToricDivisor((1, 1, 1)))
    xi = np.array([math.cos(angle), math.sin(angle)])
    assert smoothed_support(fan, cd, 0.2, c * xi, SMALL) == pytest.approx(
        c * smoothed_support(fan, cd, 0.2, xi, SMALL), rel=1e-12, abs=1e-12)


def test_zero_divisor_and_zero_covector():
    fan = presets.p1xp1()
    cd = cartier_data(fan, ToricDivisor.zero(fan))
    ev = grad_smoothed_support(fan, cd, 0.3, [0.3, -2.0], SMALL)
    assert ev.f_eps == 0 and np.all(ev.dphi_eps == 0) and np.all(ev.fd_dphi == 0)
    with pytest.raises(ZeroCovector):
        smoothed_support(fan, cd, 0.3, [0.0, 0.0], SMALL)


def test_fixed_seed_is_reproducible():
    fan = presets.p2()
    cd = cartier_data(fan, ToricDivisor((1, 1, 1)))
    a = grad_smoothed_support(fan, cd, 0.1, [0.3, 0.4], SMALL, with_fd=False)
    b = grad_smoothed_support(fan, cd, 0.1, [0.3, 0.4], SMALL, with_fd=False)
    assert np.array_equal(a.dphi_eps, b.dphi_eps)


pts = st.lists(st.tuples(st.floats(-3, 3), st.floats(-3, 3)), min_size=1, max_size=5)


@given(pts, st.tuples(st.floats(-4, 4), st.floats(-4, 4)))
def test_hull_distance_matches_qp(points, p):
    P, p = np.array(points), np.array(p)
    assert hull_distance(P, p) == pytest.approx(hull_distance_qp(P, p), abs=1e-5)


def test_limit_weights_by_solid_angle():
    p2 = presets.p2()
    for tau in p2.cones(1):
        assert sorted(limit_weights(p2, tau).values()) == [0.5, 0.5]
    assert set(limit_weights(presets.p1xp1(), presets.p1xp1().origin).values()) == {0.25}
    f1 = presets.hirzebruch()
    lam = {s.rays: v for s, v in limit_weights(f1, f1.origin).items()}
    assert lam == {(0, 1): 0.25, (1, 2): 0.125, (2, 3): 0.375, (0, 3): 0.25}
    p3 = Fan(3, [[1, 0, 0], [0, 1, 0], [0, 0, 1], [-1, -1, -1]],
             [[0, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 3]])
    lam = {s.rays: v for s, v in limit_weights(p3, p3.origin).items()}
    assert lam[(0, 1, 2)] == pytest.approx(1 / 8, abs=1e-9)
    assert all(lam[k] == pytest.approx(7 / 24, abs=1e-9) for k in lam if k != (0, 1, 2))


def test_gradient_limit_on_maximal_cone():
    fan = presets.p2()
    cd = cartier_data(fan, ToricDivisor((1, 1, 1)))
    rep = verify_gradient_limit(fan, cd, (0, 1), (0.2, 0.1), SMALL)
    assert rep["pass"] and all(r["below_threshold"] for r in rep["rows"])


def test_limsup_and_uniform_bound_reports():
    fan = presets.p1xp1()
    cd = cartier_data(fan, ToricDivisor((0, 0, 1, 1)))
    rep = verify_limsup_containment(fan, cd, (0, 1), (0.2, 0.1, 0.05), 10, SMALL)
    assert rep["pass"] and len(rep["rows"]) == 3
    ub = verify_uniform_bound(fan, cd, 0.1, 50, SMALL)
    assert ub["pass"] and ub["params"]["R"] == R_constant(cd)
