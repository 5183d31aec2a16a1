"""Mollifier smoothing of the support function and the flow it generates.

As eps shrinks, the gradient of the smoothed support function at a point
deep inside a cone settles on that cone's chi; along a wall it averages
the chi's on both sides.
"""

import numpy as np

from toric_ccc import presets
from toric_ccc.divisor import ToricDivisor, cartier_data
from toric_ccc.flow import PhasePoint, flow_closed_form, flow_rk4
from toric_ccc.smoothing import QuadratureConfig, grad_smoothed_support

fan = presets.p2()
cd = cartier_data(fan, ToricDivisor((1, 1, 1)))
q = QuadratureConfig(sample_count=100_000)

for xi in [(1.0, 1.0), (1.0, 0.0)]:
    for eps in (0.4, 0.2, 0.1, 0.05):
        ev = grad_smoothed_support(fan, cd, eps, xi, q)
        print(f"xi={xi} eps={eps:<5} dphi={np.round(ev.dphi_eps, 4)} "
              f"fd={np.round(ev.fd_dphi, 4)} stderr={ev.sigma_mc:.1e}")

# The Hamiltonian flow only moves the base point, at constant speed dphi(xi)
p = PhasePoint((0.0, 0.0), (1.0, 0.2))
closed = flow_closed_form(fan, cd, 0.1, 1.0, p, q)
rk = flow_rk4(fan, cd, 0.1, 1.0, p, 64, q)
print("closed form:", closed.endpoint.x, " rk4:", rk.endpoint.x)
print("on the torus:", flow_closed_form(fan, cd, 0.1, 1.0, PhasePoint(p.base, p.covector, torus=True), q).endpoint.x)
