"""Energy surveys over the chart, finite-difference Levi forms and the first and
second variation formulas evaluated at the Bolza point."""
from dataclasses import dataclass, field

import numpy as np

from .curvature import FlatTorus
from .deformation import TeichPoint
from .errors import OutOfChart
from .harmonic import (EnergyFunctional, MapField, TangentField, _vertex_map, identity_map,
                       map_derivative_fd, solve_hyperbolic, solve_torus)
from .mesh import quadrature_rule

# -- Levi forms ---------------------------------------------------------------


@dataclass(frozen=True)
class LeviForm:
    matrix: np.ndarray
    error: np.ndarray  # entrywise |L(h) - L(h/2)|
    h: float
    richardson: bool = True

    @property
    def error_bar(self):
        return float(np.max(self.error))

    def eigenvalues(self):
        return np.linalg.eigvalsh(0.5 * (self.matrix + self.matrix.conj().T))

    def hermitian_defect(self):
        return float(np.max(np.abs(self.matrix - self.matrix.conj().T)))


def _laplacian(f, z, zeta, h):
    return (f(z + h * zeta) + f(z - h * zeta) + f(z + 1j * h * zeta) + f(z - 1j * h * zeta) - 4 * f(z)) / (4 * h * h)


def levi_stencil(z, h, m):
    """All points at which :func:`levi_form` samples ``f`` (both step sizes)."""
    z = np.asarray(z, dtype=complex)
    pts = [z]
    for k in (h, h / 2):
        for zeta in _directions(m):
            for s in (1, -1, 1j, -1j):
                pts.append(z + s * k * zeta)
    return pts


def _directions(m):
    I = np.eye(m, dtype=complex)
    out = [I[a] for a in range(m)]
    for a in range(m):
        for b in range(a + 1, m):
            out += [I[a] + I[b], I[a] - I[b], I[a] + 1j * I[b], I[a] - 1j * I[b]]
    return out


def _levi_once(f, z, h, m):
    I = np.eye(m, dtype=complex)
    L = np.empty((m, m), dtype=complex)
    for a in range(m):
        L[a, a] = _laplacian(f, z, I[a], h)
        for b in range(a + 1, m):
            re = (_laplacian(f, z, I[a] + I[b], h) - _laplacian(f, z, I[a] - I[b], h)) / 4
            im = (_laplacian(f, z, I[a] + 1j * I[b], h) - _laplacian(f, z, I[a] - 1j * I[b], h)) / 4
            L[a, b] = re + 1j * im
            L[b, a] = re - 1j * im
    return L


def levi_form(f, z, h, m=None, richardson=True):
    """``d^2 f / dz_a dzbar_b`` by polarized five-point stencils at ``h`` and ``h/2``."""
    z = np.asarray(z, dtype=complex)
    m = len(z) if m is None else m
    L1 = _levi_once(f, z, h, m)
    L2 = _levi_once(f, z, h / 2, m)
    err = np.abs(L1 - L2)
    L = (4 * L2 - L1) / 3 if richardson else L2
    return LeviForm(L, err, float(h), richardson)


# -- energy surveys -----------------------------------------------------------


def _key(z):
    z = np.asarray(z, dtype=complex)
    return tuple(np.round(np.concatenate([z.real, z.imag]), 15).tolist())


@dataclass(eq=False)
class EnergySurvey:
    """Harmonic maps and energies at chart points, with memoization.

    ``target`` is ``"hyperbolic"`` (identity class) or ``"torus"`` (with
    ``periods``).  Hyperbolic solves at stencil points reuse the factorized
    Hessian of the nearest solved center (chord iterations).
    """

    chart: object
    target: str = "hyperbolic"
    periods: tuple = (1, 0, 0, 0)
    tol: float = 1e-12
    h: float = None
    start: object = None
    maps: dict = field(default_factory=dict)
    _centers: dict = field(default_factory=dict, repr=False)

    @property
    def mesh(self):
        return self.chart.mesh

    @property
    def m(self):
        return self.chart.m

    def center(self, z):
        """Solve at ``z`` with full Newton; later nearby solves use its factorization."""
        k = _key(z)
        if k not in self._centers:
            s = self.chart.structure_at(z)
            if self.target == "torus":
                mf = solve_torus(s, self.periods)
                self._centers[k] = (np.asarray(z, complex), mf, None)
            else:
                start = self._nearest_center_map(z)
                mf, lu = solve_hyperbolic(s, start, tol=self.tol)
                # factorization at the solution (one extra assembly)
                if mf.info["iterations"] > 0 or lu is None:
                    from scipy.sparse.linalg import splu
                    _, _, H = EnergyFunctional(mf, s)(mf.values, order=2)
                    lu = splu(H.tocsc())
                self._centers[k] = (np.asarray(z, complex), mf, lu)
            self.maps[k] = self._centers[k][1]
        return self._centers[k][1]

    def _nearest_center_map(self, z):
        if not self._centers:
            return identity_map(self.mesh) if self.start is None else self.start
        best = min(self._centers.values(), key=lambda c: np.max(np.abs(c[0] - z)))
        return best[1]

    def solve(self, z):
        k = _key(z)
        if k in self.maps:
            return self.maps[k]
        s = self.chart.structure_at(z)
        if self.target == "torus":
            mf = solve_torus(s, self.periods)
        else:
            if not self._centers:
                self.center(np.zeros(self.m, complex))
            z0, start, lu = min(self._centers.values(), key=lambda c: np.max(np.abs(c[0] - z)))
            mf, _ = solve_hyperbolic(s, start, tol=self.tol, method="chord", factor=lu)
        self.maps[k] = mf
        return mf

    def energy(self, z):
        mf = self.solve(z)
        if "energy" not in mf.info:
            mf.info["energy"] = EnergyFunctional(mf, self.chart.structure_at(z))(mf.values)
        return mf.info["energy"]

    def fd_step(self):
        return 1e-2 * self.chart.r_max if self.h is None else self.h

    def levi(self, z, fn="E", h=None):
        h = self.fd_step() if h is None else h
        z = np.asarray(z, dtype=complex)
        self.center(z)
        transform = {"E": lambda e: e, "logE": np.log, "invE": lambda e: 1.0 / e}[fn]
        return levi_form(lambda x: transform(self.energy(x)), z, h, self.m)

    def gradient_fd(self, z, h=None):
        """``dE/dz_a`` by central differences at ``h`` and ``h/2``, Richardson-combined.

        Returns ``(gradient, error bar)``.
        """
        h = self.fd_step() if h is None else h
        z = np.asarray(z, dtype=complex)
        I = np.eye(self.m, dtype=complex)

        def once(k):
            out = np.empty(self.m, dtype=complex)
            for a in range(self.m):
                ds = (self.energy(z + k * I[a]) - self.energy(z - k * I[a])) / (2 * k)
                dt = (self.energy(z + 1j * k * I[a]) - self.energy(z - 1j * k * I[a])) / (2 * k)
                out[a] = 0.5 * (ds - 1j * dt)
            return out

        g1, g2 = once(h), once(h / 2)
        return (4 * g2 - g1) / 3, np.abs(g1 - g2)

    def derivative(self, z, alpha, h=None):
        h = self.fd_step() if h is None else h
        self.center(z)
        return map_derivative_fd(self.solve, z, alpha, h)

    def records(self):
        """``(z, E, residual)`` for every solved point, in insertion order."""
        out = []
        for k, mf in self.maps.items():
            m = len(k) // 2
            z = np.array(k[:m]) + 1j * np.array(k[m:])
            out.append((z, self.energy(z), mf.info.get("residual", np.nan)))
        return out


# -- pointwise fields at z = 0 ---------------------------------------------------


@dataclass(eq=False)
class _Fields:
    """P1 data on the three-point quadrature: target points, ``u_v`` and weights."""

    w: np.ndarray  # (nT, nq) target point
    uv: np.ndarray  # (nT, 2) complex components of u_v
    weight: np.ndarray  # (nT, nq) sqrt(-1) dv ^ dvbar = 2 dx dy weights


def _fields(mf):
    m = mf.mesh
    y = mf.vertex_values()
    lam, wq = quadrature_rule("three")
    Y = np.stack([y.real, y.imag], axis=-1)[m.triangles]  # (nT,3,2)
    grad = np.einsum("tkd,tki->tid", m.grad_bary, Y)  # (nT, i, d)
    uv = 0.5 * (grad[..., 0] - 1j * grad[..., 1])
    w = y[m.triangles] @ lam.T
    return _Fields(w, uv, 2.0 * m.areas[:, None] * wq[None, :])


def energy_density(mf):
    """``g(u_v, conj u_v) / phi`` at the three-point quadrature nodes (base structure)."""
    from .hypgeom import density_phi
    F = _fields(mf)
    pts, _ = mf.mesh.quad_points("three")
    g = mf.target.rho(F.w)
    return g * np.sum(np.abs(F.uv) ** 2, axis=-1)[:, None] / density_phi(pts)


def constant_density_check(mf):
    """Max deviation of the energy density from its area mean, and ``4 pi * mean``.

    The mean is weighted by the hyperbolic area of the domain.
    """
    from .hypgeom import density_phi
    e = energy_density(mf)
    pts, w = mf.mesh.quad_points("three")
    dA = 2.0 * w * density_phi(pts)
    mean = float(np.sum(e * dA) / np.sum(dA))
    return float(np.max(np.abs(e - mean))), mean


def first_variation_formula(mf, chart, alpha):
    """``-int g(u_v, u_v) mu_a sqrt(-1) dv ^ dvbar`` at the base structure."""
    F = _fields(mf)
    g = mf.target.rho(F.w)
    guv = g * np.sum(F.uv * F.uv, axis=-1)[:, None]
    mu = chart.mu_quad[alpha]
    return complex(-np.sum(guv * mu * F.weight))


def _velocity_at_quad(tf):
    """Complexified velocity ``U`` and its ``d/dvbar`` at the quadrature nodes."""
    m = tf.base.mesh
    lam, _ = quadrature_rule("three")
    Uv = tf.vertex_fields()[m.triangles]  # (nT, 3, 2)
    Uq = np.einsum("qk,tki->tqi", lam, Uv)
    grad = np.einsum("tkd,tki->tid", m.grad_bary, Uv)  # (nT, i, d)
    dbar = 0.5 * (grad[..., 0] + 1j * grad[..., 1])
    return Uq, dbar


def variation_fields(mf, chart, fields):
    """``W_a = nabla_vbar U_a - mu_a u_v`` at the quadrature nodes, one per direction."""
    F = _fields(mf)
    Gam = mf.target.christoffel(F.w)  # (nT, nq, k, i, j)
    uvbar = np.conj(F.uv)
    out = []
    for a, tf in enumerate(fields):
        Uq, dbar = _velocity_at_quad(tf)
        cov = dbar[:, None, :] + np.einsum("tqkij,ti,tqj->tqk", Gam, uvbar, Uq)
        out.append(cov - chart.mu_quad[a][..., None] * F.uv[:, None, :])
    return out, F


def second_variation_formula(mf, chart, fields):
    """Kinetic and curvature parts of ``d^2 E / dz_a dzbar_b`` (each ``m x m``).

    Kinetic: ``2 int g(W_a, conj W_b)``; curvature:
    ``-2 int R(u_v, U_a, u_vbar, conj U_b)``, both against ``sqrt(-1) dv ^ dvbar``.
    """
    W, F = variation_fields(mf, chart, fields)
    rho = mf.target.rho(F.w)
    m = len(fields)
    kin = np.empty((m, m), dtype=complex)
    curv = np.zeros((m, m), dtype=complex)
    Us = [_velocity_at_quad(tf)[0] for tf in fields]
    uv = np.broadcast_to(F.uv[:, None, :], Us[0].shape)
    for a in range(m):
        for b in range(m):
            kin[a, b] = 2 * np.sum(rho * np.sum(W[a] * np.conj(W[b]), axis=-1) * F.weight)
            if not isinstance(mf.target, FlatTorus):
                R = mf.target.riemann(uv, Us[a], np.conj(uv), np.conj(Us[b]), F.w)
                curv[a, b] = -2 * np.sum(R * F.weight)
    return kin, curv


def cauchy_schwarz_check(mf, chart, fields, xi, E=None):
    """``(|sum xi_a dE/dz_a|^2, E * int g(W_xi, conj W_xi))`` at the base structure."""
    xi = np.asarray(xi, dtype=complex)
    if not np.any(xi):
        return 0.0, 0.0
    dE = np.array([first_variation_formula(mf, chart, a) for a in range(len(fields))])
    lhs = float(abs(np.sum(xi * dE)) ** 2)
    W, F = variation_fields(mf, chart, fields)
    Wxi = sum(x * w for x, w in zip(xi, W))
    rho = mf.target.rho(F.w)
    kin = float(np.real(np.sum(rho * np.sum(Wxi * np.conj(Wxi), axis=-1) * F.weight)))
    if E is None:
        E = float(np.sum(rho * np.sum(np.abs(F.uv) ** 2, axis=-1)[:, None] * F.weight))
    return lhs, E * kin


def psh_report(survey, points, eps_factor=3.0):
    """Levi forms of ``E``, ``log E`` and ``1/E`` at chart points with sign verdicts."""
    rows = []
    for z in points:
        z = np.asarray(z, dtype=complex)
        LE, LlogE, Linv = survey.levi(z, "E"), survey.levi(z, "logE"), survey.levi(z, "invE")
        E = survey.energy(z)
        ev = {k: L.eigenvalues() for k, L in (("E", LE), ("logE", LlogE), ("invE", Linv))}
        eps = {k: eps_factor * L.error_bar for k, L in (("E", LE), ("logE", LlogE), ("invE", Linv))}
        rows.append({
            "z": z,
            "energy": E,
            "min_eig_logE": float(ev["logE"].min()),
            "eps_logE": eps["logE"],
            "min_eig_E": float(ev["E"].min()),
            "eps_E": eps["E"],
            "max_eig_invE": float(ev["invE"].max()),
            "eps_invE": eps["invE"],
            "logE_ok": bool(ev["logE"].min() >= -eps["logE"]),
            "E_ok": bool(ev["E"].min() >= -eps["E"]),
            "invE_ok": bool(ev["invE"].max() <= eps["invE"]),
            "levi": {"E": LE, "logE": LlogE, "invE": Linv},
        })
    return rows
