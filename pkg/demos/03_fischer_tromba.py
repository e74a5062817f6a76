"""Energy of the harmonic representative of the identity near the Bolza point.

At z = 0 the Levi form of E is twice the WP metric and the Levi form of log E
is the WP metric over 2 pi.
"""
import numpy as np

from bolzawp.pipeline import Lab, RunConfig
from bolzawp.variation import EnergySurvey

lab = Lab(RunConfig(mesh_level=4, series_radius=10.0))
chart = lab.chart
S = EnergySurvey(chart, "hyperbolic", h=lab.fd_step())
z0 = np.zeros(3)

print("E(0) =", S.energy(z0), " 4 pi =", 4 * np.pi)
for t in (0.25, 0.5, 1.0):
    z = t * chart.r_max * np.array([1, 0, 0])
    print(f"E(|z|={abs(z[0]):.3f}) - E(0) = {S.energy(z) - S.energy(z0):.3e}")

L = S.levi(z0, "E")
print("Levi(E)\n", np.round(L.matrix, 5), "\nerror bar", L.error_bar)
Llog = S.levi(z0, "logE")
print("Levi(log E) * 2 pi\n", np.round(2 * np.pi * Llog.matrix, 5))
