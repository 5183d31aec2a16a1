import numpy as np
import pytest
from hypothesis import given, strategies as st

from toric_ccc import presets
from toric_ccc.divisor import ToricDivisor, cartier_data
from toric_ccc.errors import ZeroCovector
from toric_ccc.flow import PhasePoint, flow_closed_form, flow_front, flow_rk4, trajectory_csv_rows
from toric_ccc.smoothing import QuadratureConfig, grad_smoothed_support

Q = QuadratureConfig(sample_count=20_000)
FAN = presets.p2()
CD = cartier_data(FAN, ToricDivisor((1, 1, 1)))


def test_phase_point_validation():
    with pytest.raises(ZeroCovector):
        PhasePoint((0, 0), (0, 0))
    with pytest.raises(ValueError):
        PhasePoint((0,), (1, 1))
    assert PhasePoint((1.25, -0.5), (1, 0), torus=True).base == (0.25, 0.5)


def test_deep_interior_flow_translates_by_chi():
    # xi deep in the cone on rays e1, e2 with eps below the wall distance
    p = PhasePoint((0.0, 0.0), (1.0, 1.0))
    res = flow_closed_form(FAN, CD, 0.1, 2.0, p, Q)
    se = grad_smoothed_support(FAN, CD, 0.1, p.xi, Q, with_fd=False).sigma_mc
    assert np.linalg.norm(res.endpoint.x - [-2.0, -2.0]) <= 2.0 * 3 * se
    assert res.endpoint.covector == p.covector


@given(st.floats(-2, 2), st.floats(-2, 2), st.floats(-np.pi, np.pi), st.floats(0.1, 2))
def test_rk4_matches_closed_form(x0, x1, angle, t):
    p = PhasePoint((x0, x1), (np.cos(angle), np.sin(angle)))
    se = grad_smoothed_support(FAN, CD, 0.1, p.xi, Q, with_fd=False).sigma_mc
    a = flow_closed_form(FAN, CD, 0.1, t, p, Q)
    b = flow_rk4(FAN, CD, 0.1, t, p, 16, Q)
    assert np.linalg.norm(a.endpoint.x - b.endpoint.x) <= 1e-4 + 3 * se * t
    assert b.covector_drift == 0


def test_group_law_and_inverse():
    p = PhasePoint((0.3, -0.7), (0.2, -1.0))
    a = flow_closed_form(FAN, CD, 0.2, 0.6, p, Q)
    b = flow_closed_form(FAN, CD, 0.2, 0.4, a.endpoint, Q)
    c = flow_closed_form(FAN, CD, 0.2, 1.0, p, Q)
    assert np.allclose(b.endpoint.x, c.endpoint.x, atol=1e-12)
    back = flow_closed_form(FAN, CD, 0.2, -1.0, c.endpoint, Q)
    assert np.allclose(back.endpoint.x, p.x, atol=1e-12)


def test_rk4_steps_and_trajectory():
    p = PhasePoint((0.0, 0.0), (1.0, -0.3))
    with pytest.raises(ValueError):
        flow_rk4(FAN, CD, 0.1, 1.0, p, 8, Q)
    res = flow_rk4(FAN, CD, 0.1, 1.0, p, 16, Q, record=True)
    rows = trajectory_csv_rows(res)
    assert len(rows) == 17 and rows[0][0] == 0.0 and rows[-1][0] == pytest.approx(1.0)
    assert rows[-1][1:3] == pytest.approx(list(res.endpoint.x))


def test_front_and_torus():
    pts = [PhasePoint((0.1 * k, 0.0), (1.0, 1.0)) for k in range(3)]
    se = []
    front = flow_front(FAN, CD, 0.1, 1.0, pts, Q, stderr=se)
    assert len(front) == 3 and len(se) == 3
    assert np.linalg.norm(front[2] - [-0.8, -1.0]) <= 3 * se[2]
    assert np.allclose(front[1] - front[0], [0.1, 0.0])
    tor = flow_closed_form(FAN, CD, 0.1, 1.0, PhasePoint((0.2, 0.0), (1.0, 1.0), torus=True), Q)
    plane = flow_closed_form(FAN, CD, 0.1, 1.0, PhasePoint((0.2, 0.0), (1.0, 1.0)), Q)
    diff = tor.endpoint.x - plane.endpoint.x
    assert np.allclose(diff, np.round(diff)) and np.all((0 <= tor.endpoint.x) & (tor.endpoint.x < 1))
