"""Fans, Cartier data and the piecewise-linear support function.

Walks through P2 with the all-ones divisor: the per-cone functionals chi,
the rational chi attached to lower cones, and a continuity check.
"""

from fractions import Fraction

from toric_ccc import presets
from toric_ccc.divisor import SupportFunction, ToricDivisor, cartier_data, check_hull_property

fan = presets.p2()
print(fan.validation_report())

d = ToricDivisor((1, 1, 1))
cd = cartier_data(fan, d)
for row in cd.table():
    print(row)

# chi on a ray or at the origin is a weighted average of the neighbouring maximal chi's
print("origin weights:", {c.rays: str(w) for c, w in cd.weights[fan.origin].items()})
print("hull property:", check_hull_property(cd)["pass"])

phi = SupportFunction(fan, cd)
for xi in [(1, 0), (1, 1), (-1, 2), (Fraction(1, 3), Fraction(-5, 7))]:
    print(xi, "->", phi(xi))
