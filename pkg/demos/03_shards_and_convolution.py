"""Shard complexes and their stalkwise convolution.

The complex attached to O(D) has stalk of rank one in degree -n on the
open moment polytope. Convolving two of them matches the complex of the
sum divisor, which is the Picard action on the mirror side.
"""

from fractions import Fraction

from toric_ccc import presets
from toric_ccc.divisor import cartier_data
from toric_ccc.nearby import picard_action_check, torus_action_check
from toric_ccc.sheaf import convolve_stalk, stalk, torus_stalk, twisted_polytope_sheaf

fan = presets.p1()
P = {a: twisted_polytope_sheaf(fan, cartier_data(fan, presets.o_p1(a))) for a in (1, 2, 3)}

for k in range(-8, 9):
    x = Fraction(k, 4)
    print(f"x={str(x):>5}  O(2): {stalk(P[2], [x]).dims}  O(1)*O(2): {convolve_stalk(P[1], P[2], [x]).dims}"
          f"  O(3): {stalk(P[3], [x]).dims}")

# on the torus the stalk counts lattice points of the polytope through x
print("torus O(2) at 1/4:", torus_stalk(P[2], [Fraction(1, 4)]).dims)

p2 = presets.p2()
rep = picard_action_check(p2, presets.o_p2(1), presets.o_p2(2), points=20)
print("P2 O(1)*O(2):", rep["passed"], "of", len(rep["rows"]), "points agree")
rep = torus_action_check(p2, presets.o_p2(1), presets.o_p2(1), points=10)
print("P2 torus O(1)*O(1):", rep["passed"], "of", len(rep["rows"]))
