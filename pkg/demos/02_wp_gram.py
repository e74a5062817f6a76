"""Quadratic differentials by Poincare series and the Weil-Petersson Gram matrix."""
import numpy as np

from bolzawp import bolza_group, build_mesh, enumerate_ball
from bolzawp.quaddiff import SEED_ORDER, basis, holomorphy_residual, seed_series, wp_gram
from bolzawp.verify import sample_points

g = bolza_group()
mesh = build_mesh(g, 4)
ball = enumerate_ball(g, 10.0)
seeds = seed_series(ball, SEED_ORDER)

pts = sample_points(16, seed=0)
for k, q in zip(SEED_ORDER, seeds):
    size = np.max(np.abs(q.direct(pts)) * (1 - np.abs(pts) ** 2) ** 2)
    print(f"seed v^{k}: invariant size {size:.3e}")
# v and v^3 vanish: v -> -v is in the normalizer and flips their sign

b = basis(g, 10.0, mesh, ball=ball, seeds=seeds)
print("seeds used", b.seeds)
print("raw Gram\n", np.round(b.raw_gram, 6))
G = wp_gram(b.beltrami, mesh)
print("orthonormal Gram eigenvalues", G.eigenvalues())
print("sup |mu_a|", b.sup_norms, " chart radius", b.chart_radius(mesh))
print("d/dv residuals", [f"{holomorphy_residual(mu, pts):.1e}" for mu in b.beltrami])
