"""Flowed conormal fronts approach the translated cone boundary as eps -> 0.

Prints the per-rung maximum distance and the fitted power of eps for each
maximal cone of P2.
"""

from toric_ccc import presets
from toric_ccc.divisor import ToricDivisor, cartier_data
from toric_ccc.nearby import FrontExperiment, front_convergence
from toric_ccc.smoothing import QuadratureConfig

fan = presets.p2()
cd = cartier_data(fan, ToricDivisor((1, 1, 1)))
q = QuadratureConfig(sample_count=100_000)

for sigma in fan.maximal_cones:
    rep = front_convergence(FrontExperiment(fan, cd, sigma, (0.2, 0.1, 0.05, 0.025), 20, 0, q))
    dists = ", ".join(f"{r['eps']}: {r['quantity']:.4f}" for r in rep["rows"])
    print(f"cone {sigma.rays}: {dists}  rate={rep['rate']:.2f}  pass={rep['pass']}")
