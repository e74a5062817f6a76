"""Maps to the flat torus: first and second variation against finite differences."""
import numpy as np

from bolzawp.pipeline import Lab, RunConfig
from bolzawp.variation import (EnergySurvey, cauchy_schwarz_check, first_variation_formula,
                               second_variation_formula)

lab = Lab(RunConfig(mesh_level=4, series_radius=10.0, target="torus"))
chart = lab.chart
S = EnergySurvey(chart, "torus", periods=lab.config.complex_periods(), h=lab.fd_step())
z0 = np.zeros(3)
u = S.center(z0)
print("E =", S.energy(z0), " residual", u.info["residual"])

formula = np.array([first_variation_formula(u, chart, a) for a in range(3)])
fd, err = S.gradient_fd(z0)
print("dE/dz formula", np.round(formula, 6))
print("dE/dz FD     ", np.round(fd, 6), " error bar", err.max())

fields = [S.derivative(z0, a) for a in range(3)]
kin, curv = second_variation_formula(u, chart, fields)
L = S.levi(z0, "E")
print("second variation rel. error", np.linalg.norm(kin + curv - L.matrix) / np.linalg.norm(L.matrix))

rng = np.random.default_rng(0)
for _ in range(5):
    xi = rng.standard_normal(3) + 1j * rng.standard_normal(3)
    lhs, rhs = cauchy_schwarz_check(u, chart, fields, xi)
    print(f"|xi dE|^2 / (E |W_xi|^2) = {lhs / rhs:.3f}")

Llog = S.levi(z0, "logE")
print("Levi(log E) eigenvalues", Llog.eigenvalues(), " error bar", Llog.error_bar)
