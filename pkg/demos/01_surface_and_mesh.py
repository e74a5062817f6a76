"""The Bolza surface: side pairings, the group ball and the quotient mesh."""
import numpy as np

from bolzawp import bolza_group, build_mesh, enumerate_ball
from bolzawp.fuchsian import SYSTOLE, reduce_to_domain

g = bolza_group()
print("systole", SYSTOLE)
print("g0(0) =", g.generators[0](0))
print("relation residual", g.relation_residual())

# ball sizes grow like e^R
for R in (4.0, 6.0, 8.0, 10.0):
    print(f"R={R:4.1f}  {len(enumerate_ball(g, R)):6d} elements")

# fold a point near the boundary back into the octagon
p, word = reduce_to_domain(g, 0.97 * np.exp(0.4j))
print("reduced point", p, "word", word)

# area converges like h^2 towards 4 pi
prev = None
for lev in range(2, 6):
    m = build_mesh(g, lev)
    err = abs(m.integrate(1.0) - 4 * np.pi)
    print(f"level {lev}: {m.n_triangles:6d} triangles, chi={m.euler_characteristic()}, area error {err:.2e}",
          "" if prev is None else f"ratio {prev / err:.2f}")
    prev = err
