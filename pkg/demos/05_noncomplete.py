"""Divisors on affine charts, extended to a complete fan.

A2 sits inside P2 as the chart on the first two rays. A divisor on A2
extends by choosing a coefficient for the new ray, and the support
function is unchanged on the original cone.
"""

from toric_ccc import presets
from toric_ccc.divisor import SupportFunction, ToricDivisor, extend_to_completion
from toric_ccc.nearby import picard_action_check

a2, d = presets.a2(), ToricDivisor((1, 1))
p2, ext = extend_to_completion(a2, d, presets.p2(), {2: 3})
print("extended coefficients:", ext.coeffs)

phi, phi_ext = SupportFunction.of(a2, d), SupportFunction.of(p2, ext)
for xi in [(1, 0), (0, 1), (3, 5)]:
    print(xi, phi(xi), phi_ext(xi))

rep = picard_action_check(p2, ext, ext, points=20)
print("Picard action on the extension:", rep["pass"])
