"""The polydisk chart ``z -> mu(z) = sum z_a mu_a`` and the conformal structure
it induces on the fixed mesh."""
from dataclasses import dataclass

import numpy as np

from .errors import OutOfChart
from .mesh import conformal_weight, quadrature_rule

MU_LIMIT = 0.5


@dataclass(frozen=True)
class TeichPoint:
    z: tuple

    @classmethod
    def of(cls, z):
        return cls(tuple(complex(x) for x in np.asarray(z, dtype=complex).ravel()))

    @classmethod
    def origin(cls, m=3):
        return cls((0j,) * m)

    def array(self):
        return np.array(self.z, dtype=complex)

    def norm_inf(self):
        return float(np.max(np.abs(self.array()))) if self.z else 0.0


def conformal_tensor(mu):
    """Matrix of ``|dv + mu dvbar|^2`` in ``(dx, dy)``; ``det = (1 - |mu|^2)^2``."""
    mu = np.asarray(mu, dtype=complex)
    a = np.abs(mu) ** 2
    M = np.empty(mu.shape + (2, 2))
    M[..., 0, 0] = 1 + a + 2 * mu.real
    M[..., 1, 1] = 1 + a - 2 * mu.real
    M[..., 0, 1] = M[..., 1, 0] = 2 * mu.imag
    return M


@dataclass(eq=False)
class ConformalStructure:
    z: TeichPoint
    mu_quad: np.ndarray  # (nT, 3) at the three-point rule
    mu_bary: np.ndarray  # (nT,)
    tensors: np.ndarray  # (nT, 2, 2)
    mesh: object = None

    @property
    def weight(self):
        """``adj(M) / sqrt(det M)`` per triangle, the energy's conformal weight."""
        return conformal_weight(self.tensors)

    def sup_mu(self):
        return float(max(np.max(np.abs(self.mu_quad), initial=0.0), np.max(np.abs(self.mu_bary), initial=0.0)))


class Chart:
    """Chart around the Bolza point built from a WP-orthonormal basis on ``mesh``."""

    def __init__(self, basis, mesh, r_max=None):
        self.basis = basis
        self.mesh = mesh
        self.m = len(basis)
        self.r_max = float(basis.chart_radius(mesh) if r_max is None else r_max)
        pts, _ = mesh.quad_points("three")
        self.mu_quad = np.stack([b(pts) for b in basis.beltrami])
        self.mu_bary = np.stack([b(mesh.barycenters()) for b in basis.beltrami])

    def kodaira_spencer_direction(self, alpha):
        return self.basis.beltrami[alpha]

    def mu(self, z, v):
        z = np.asarray(z, dtype=complex)
        return sum(z[a] * self.basis.beltrami[a](v) for a in range(self.m))

    def structure_at(self, z, check=True):
        z = z if isinstance(z, TeichPoint) else TeichPoint.of(z)
        zz = z.array()
        if len(zz) != self.m:
            raise ValueError(f"expected {self.m} chart coordinates")
        if check and z.norm_inf() > self.r_max * (1 + 1e-12):
            raise OutOfChart(f"|z|_inf = {z.norm_inf():.3g} exceeds r_max = {self.r_max:.3g}")
        mq = np.tensordot(zz, self.mu_quad, axes=1)
        mb = np.tensordot(zz, self.mu_bary, axes=1)
        s = ConformalStructure(z, mq, mb, conformal_tensor(mb), self.mesh)
        if s.sup_mu() >= MU_LIMIT:
            raise OutOfChart(f"sup |mu(z)| = {s.sup_mu():.3g} reaches {MU_LIMIT}")
        return s


def structure_at(z, chart):
    return chart.structure_at(z)


def identity_structure(mesh):
    n = mesh.n_triangles
    nq = len(quadrature_rule("three")[1])
    return ConformalStructure(TeichPoint.origin(), np.zeros((n, nq), complex), np.zeros(n, complex),
                              np.broadcast_to(np.eye(2), (n, 2, 2)).copy(), mesh)
