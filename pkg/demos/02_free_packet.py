"""Free Gaussian packet: spreading trajectories and the Jacobian factor.

The packet drifts with unit velocity while its width grows as sqrt(1+t^2).
Trajectories fan out linearly in x0, so the inverse map compresses by
1/sqrt(1+t^2). Dropping that factor leaves a curve with the right shape
but with area sqrt(1+t^2) instead of 1.

Run:  python demos/02_free_packet.py
"""

from pathlib import Path

import numpy as np

from bohmflow import FreeGaussian, both_densities, inverse_map
from bohmflow.svg import line_chart

OUT = Path(__file__).with_name("output")
OUT.mkdir(exist_ok=True)

model = FreeGaussian()

for t in (0.5, 1.0, 3.0):
    x0, jac = inverse_map(model, 1.0, t)
    print(f"t={t}: x0(1, t) = {x0:.12f}  |dx0/dx| = {jac:.12f}  1/sqrt(1+t^2) = {1 / np.sqrt(1 + t * t):.12f}")

t = 2.0
grid = np.linspace(-8, 12, 401)
rec, raw = both_densities(model, grid, t)
print("area with Jacobian   :", rec.integral())
print("area without Jacobian:", raw.integral(), " sqrt(1+t^2) =", np.sqrt(1 + t * t))

svg = line_chart(
    [("|psi|^2", grid, model.density(grid, t)), ("with Jacobian", grid, rec.values),
     ("without Jacobian", grid, raw.values)],
    title="Free packet at t = 2", xlabel="x", ylabel="density",
)
(OUT / "free_packet.svg").write_text(svg)
print("wrote", OUT / "free_packet.svg")
