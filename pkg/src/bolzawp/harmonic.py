"""Discrete Dirichlet energy and harmonic maps from ``(X0, mu(z))`` into a target.

Maps are P1 on the quotient mesh.  One complex unknown per degree of freedom
stores the target point ``w = u1 + i u2`` of the representative vertex; other
copies are obtained through the equivariance of the homotopy class:

* hyperbolic target, identity class: ``u(T x) = T u(x)``;
* flat torus: ``u(T x) = u(x) + c(T)`` with ``c`` additive on the abelianization.

Per triangle the energy is ``S_T * W_T``: ``S_T`` is the Dirichlet form of the
(linear) coordinate map against the conformal weight of the triangle and
``W_T`` the quadrature average of the conformal target density ``rho(u)``.
"""
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .curvature import FlatTorus, Hyperbolic
from .errors import LineSearchFailure, MaxIterationsExceeded, SolverDivergence
from .hypgeom import disk_exp, disk_log
from .mesh import quadrature_rule

BOUNDARY_GUARD = 1.0 - 1e-6


@dataclass(eq=False)
class MapField:
    mesh: object
    target: object
    values: np.ndarray
    periods: np.ndarray = None  # complex (4,) for the torus, c_k = p_k + i q_k
    info: dict = field(default_factory=dict)

    @property
    def is_torus(self):
        return isinstance(self.target, FlatTorus)

    def with_values(self, values, **info):
        return MapField(self.mesh, self.target, np.asarray(values, dtype=complex), self.periods, dict(info))

    def vertex_values(self):
        return _vertex_map(self, self.values, jets=False)[0]

    def gluing_residual(self):
        """Max defect of the equivariance law over all glued vertex copies."""
        m = self.mesh
        y = self.vertex_values()
        r = m.rep[m.dof]
        if self.is_torus:
            pred = y[r] + m.abel @ self.periods
        else:
            a, b = m.transform_a, m.transform_b
            pred = (a * y[r] + b) / (np.conj(b) * y[r] + np.conj(a))
        return float(np.max(np.abs(pred - y)))


def identity_map(mesh):
    return MapField(mesh, Hyperbolic(), mesh.vertices[mesh.rep].astype(complex))


def constant_map(mesh, periods=None, value=0j):
    p = np.zeros(4, complex) if periods is None else np.asarray(periods, dtype=complex)
    return MapField(mesh, FlatTorus(), np.full(mesh.n_dofs, value, dtype=complex), p)


def _vertex_map(mf, U, jets=True):
    """Vertex values and the first/second complex derivatives w.r.t. their dof."""
    m = mf.mesh
    x = U[m.dof]
    if mf.is_torus:
        y = x + m.abel @ mf.periods
        if not jets:
            return y, None, None
        return y, np.ones_like(x), np.zeros_like(x)
    a, b = m.transform_a, m.transform_b
    den = np.conj(b) * x + np.conj(a)
    y = (a * x + b) / den
    if not jets:
        return y, None, None
    return y, 1.0 / den ** 2, -2.0 * np.conj(b) / den ** 3


def _real(y):
    return np.stack([y.real, y.imag], axis=-1)


class _Form:
    """Per-structure precomputation: local stiffness ``B_T = |T| G A G^T``."""

    def __init__(self, mesh, structure):
        A = structure.weight
        G = mesh.grad_bary
        self.B = mesh.areas[:, None, None] * np.einsum("tid,tde,tje->tij", G, A, G)
        self.lam, self.wq = quadrature_rule("three")


def _local(form, target, Y, order):
    """Energy, and optionally gradient (nT,3,2) and Hessian (nT,3,2,3,2) in vertex coordinates."""
    B = form.B
    # B kills constants, so work with offsets from the first corner (exact zero for constant maps)
    D = Y - Y[:, :1]
    dS = np.einsum("tkl,tli->tki", B, D)
    S = 0.5 * np.einsum("tki,tki->t", D, dS)
    X = np.einsum("qk,tki->tqi", form.lam, Y)
    w = X[..., 0] + 1j * X[..., 1]
    if isinstance(target, FlatTorus):
        e = S
        if order == 0:
            return e, None, None
        grad = dS
        if order == 1:
            return e, grad, None
        I = np.eye(2)
        H = np.einsum("tkl,ij->tkilj", B, I)
        return e, grad, H
    r, dr, hr = target.rho_derivatives(w)
    W = r @ form.wq
    e = S * W
    if order == 0:
        return e, None, None
    dW = np.einsum("q,qk,tqi->tki", form.wq, form.lam, dr)
    grad = W[:, None, None] * dS + S[:, None, None] * dW
    if order == 1:
        return e, grad, None
    I = np.eye(2)
    H = (W[:, None, None, None, None] * np.einsum("tkl,ij->tkilj", B, I)
         + np.einsum("tki,tlj->tkilj", dS, dW) + np.einsum("tki,tlj->tkilj", dW, dS)
         + S[:, None, None, None, None] * np.einsum("q,qk,ql,tqij->tkilj", form.wq, form.lam, form.lam, hr))
    return e, grad, H


def _jac_real(t):
    """Real 2x2 matrix of multiplication by the complex number ``t``."""
    J = np.empty(t.shape + (2, 2))
    J[..., 0, 0] = t.real
    J[..., 0, 1] = -t.imag
    J[..., 1, 0] = t.imag
    J[..., 1, 1] = t.real
    return J


def _hess_parts(c):
    """Hessians of Re f and Im f for ``f(U + d) = f + t d + c d^2 / 2``."""
    Hr = np.empty(c.shape + (2, 2))
    Hi = np.empty(c.shape + (2, 2))
    Hr[..., 0, 0], Hr[..., 0, 1], Hr[..., 1, 0], Hr[..., 1, 1] = c.real, -c.imag, -c.imag, -c.real
    Hi[..., 0, 0], Hi[..., 0, 1], Hi[..., 1, 0], Hi[..., 1, 1] = c.imag, c.real, c.real, -c.imag
    return Hr, Hi


class EnergyFunctional:
    """``E(U)`` with gradient and Hessian in the real dof coordinates ``(Re U, Im U)``."""

    def __init__(self, mf, structure):
        self.mf = mf
        self.mesh = mf.mesh
        self.structure = structure
        self.form = _Form(self.mesh, structure)
        tri = self.mesh.triangles
        d = self.mesh.dof[tri]  # (nT, 3)
        idx = np.stack([2 * d, 2 * d + 1], axis=-1)  # (nT, 3, 2)
        self._idx = idx
        n = 6
        flat = idx.reshape(len(tri), n)
        self._rows = np.repeat(flat, n, axis=1).ravel()
        self._cols = np.tile(flat, (1, n)).ravel()
        self.n = 2 * self.mesh.n_dofs

    def __call__(self, U, order=0):
        y, t, c = _vertex_map(self.mf, U, jets=order > 0)
        tri = self.mesh.triangles
        Y = _real(y[tri])
        e, gy, Hy = _local(self.form, self.mf.target, Y, order)
        E = float(np.sum(e))
        if order == 0:
            return E
        J = _jac_real(t[tri])  # (nT,3,2,2): dy_i = J_ij dU_j
        gU = np.einsum("tkij,tki->tkj", J, gy)
        g = np.zeros(self.n)
        np.add.at(g, self._idx.ravel(), gU.ravel())
        if order == 1:
            return E, g
        HU = np.einsum("tkia,tkilj,tljb->tkalb", J, Hy, J)
        Hr, Hi = _hess_parts(c[tri])
        extra = gy[..., 0, None, None] * Hr + gy[..., 1, None, None] * Hi  # (nT,3,2,2)
        k = np.arange(3)
        HU[:, k, :, k, :] += np.moveaxis(extra, 1, 0)
        H = sp.csr_matrix((HU.ravel(), (self._rows, self._cols)), shape=(self.n, self.n))
        return E, g, H


def energy(mf, structure):
    return EnergyFunctional(mf, structure)(mf.values)


def energy_gradient(mf, structure):
    return EnergyFunctional(mf, structure)(mf.values, order=1)[1]


def _to_complex(x):
    return x[0::2] + 1j * x[1::2]


def _to_real(z):
    out = np.empty(2 * len(z))
    out[0::2] = z.real
    out[1::2] = z.imag
    return out


class _DualNorm:
    """``sqrt(g^T P^{-1} g)`` with ``P`` the flat P1 stiffness plus mass, per component."""

    _cache = {}

    def __init__(self, mesh):
        key = id(mesh)
        if key not in self._cache:
            K = mesh.P.T @ mesh.stiffness_vertex() @ mesh.P
            M = mesh.P.T @ mesh.mass_vertex() @ mesh.P
            self._cache[key] = (mesh, spla.splu((K + M).tocsc()))
        self.lu = self._cache[key][1]

    def solve(self, g):
        gc = g.reshape(-1, 2)
        return np.stack([self.lu.solve(gc[:, 0]), self.lu.solve(gc[:, 1])], axis=1).ravel()

    def __call__(self, g):
        return float(np.sqrt(max(g @ self.solve(g), 0.0)))


def harmonic_residual(mf, structure):
    """Dual norm of the discrete energy gradient (the discrete tension), divided by ``E``."""
    E, g = EnergyFunctional(mf, structure)(mf.values, order=1)
    if E == 0.0:
        return float(np.linalg.norm(g))
    return _DualNorm(mf.mesh)(g) / E


def _retract(mf, U, d):
    if mf.is_torus:
        return U + d
    return disk_exp(U, d)


def solve_hyperbolic(structure, initial, tol=1e-11, method="newton", max_iterations=200,
                     factor=None, armijo=1e-4):
    """Minimize the energy in the homotopy class of ``initial``.

    ``method`` is ``"newton"`` (default), ``"descent"`` (preconditioned gradient
    descent) or ``"chord"`` (Newton directions from the fixed factorization
    ``factor``, falling back to ``"newton"`` if it stalls).  Every accepted step
    satisfies the Armijo condition, so the energy never increases beyond
    round-off.  Stops when :func:`harmonic_residual` ``< tol``.
    """
    mf = initial
    F = EnergyFunctional(mf, structure)
    dual = _DualNorm(mf.mesh)
    U = np.asarray(mf.values, dtype=complex).copy()
    if not mf.is_torus and np.max(np.abs(U)) > BOUNDARY_GUARD:
        raise SolverDivergence("initial map touches the boundary of the disk")
    history = []
    lu = factor
    it = 0
    stalls = 0
    for it in range(max_iterations + 1):
        want_h = method == "newton"
        out = F(U, order=2 if want_h else 1)
        E, g = out[0], out[1]
        history.append(E)
        res = dual(g) / E
        if res < tol:
            break
        if it == max_iterations:
            raise MaxIterationsExceeded(f"residual {res:.3e} after {max_iterations} iterations")
        d = None
        if method == "newton":
            try:
                lu = spla.splu(out[2].tocsc())
                d = -lu.solve(g)
            except RuntimeError:
                d = None
        elif method == "chord":
            d = -lu.solve(g)
        if d is None or not np.all(np.isfinite(d)) or g @ d >= 0:
            d = -dual.solve(g)
        slope = float(g @ d)
        step = 1.0
        while True:
            Un = _retract(mf, U, step * _to_complex(d))
            if not mf.is_torus and np.max(np.abs(Un)) > BOUNDARY_GUARD:
                step *= 0.5
            else:
                En = F(Un)
                # below round-off the predicted decrease is meaningless; accept the step
                if En <= E + armijo * step * slope or abs(slope) < 1e-13 * E and En <= E * (1 + 1e-14):
                    break
                step *= 0.5
            if step < 1e-12:
                raise LineSearchFailure(f"no decrease along the search direction (residual {res:.3e})")
        U = Un
        if method == "chord" and step < 1.0:
            stalls += 1
            if stalls > 2:
                method = "newton"
    if not mf.is_torus and np.max(np.abs(U)) > BOUNDARY_GUARD:
        raise SolverDivergence("map approaches the boundary of the disk")
    return mf.with_values(U, residual=res, iterations=it, energies=history, method=method), lu


def solve_map(structure, initial, tol=1e-11, method="newton", factor=None, max_iterations=200):
    """:func:`solve_hyperbolic` returning only the map."""
    return solve_hyperbolic(structure, initial, tol, method, max_iterations, factor)[0]


def period_offsets(mesh, periods):
    return mesh.abel @ np.asarray(periods, dtype=complex)


def solve_torus(structure, periods, mesh=None, pin=0):
    """Harmonic map to ``R^2/Z^2`` with integer ``periods`` (complex, one per ``g_0..g_3``).

    The energy is quadratic: ``K U = -P^T K_v d`` for each real component, with
    ``d`` the vertex period offsets.  Dof ``pin`` is fixed at 0.
    """
    mesh = structure.mesh if mesh is None else mesh
    if mesh is None:
        raise ValueError("structure carries no mesh")
    p = np.asarray(periods, dtype=complex)
    if np.any(np.abs(p.real - np.rint(p.real)) > 0) or np.any(np.abs(p.imag - np.rint(p.imag)) > 0):
        raise ValueError("periods must be integers")
    Kv = mesh.stiffness_vertex(structure.tensors)
    K = (mesh.P.T @ Kv @ mesh.P).tocsc()
    d = period_offsets(mesh, p)
    rhs = -(mesh.P.T @ (Kv @ d))
    keep = np.ones(mesh.n_dofs, bool)
    keep[pin] = False
    Kr = K[keep][:, keep]
    U = np.zeros(mesh.n_dofs, dtype=complex)
    lu = spla.splu(Kr.tocsc())
    U[keep] = lu.solve(rhs.real[keep]) + 1j * lu.solve(rhs.imag[keep])
    if not np.all(np.isfinite(U)):
        raise SolverDivergence("torus solve produced non-finite values")
    mf = MapField(mesh, FlatTorus(), U, p)
    res = harmonic_residual(mf, structure)
    mf.info.update(residual=res, iterations=1, method="direct")
    return mf


@dataclass(eq=False)
class TangentField:
    """Real tangent fields ``d u / ds`` and ``d u / dt`` along ``u`` for ``z = s + i t``
    along one chart direction, as coordinate vectors per dof."""

    base: MapField
    ds: np.ndarray
    dt: np.ndarray
    h: float
    spread: float = np.nan  # |D(h) - D(h/2)|, the Richardson error indicator

    def vertex_fields(self):
        """Complexified ``U = (d/ds - i d/dt) u / 2`` per vertex, shape ``(nV, 2)``."""
        _, t, _ = _vertex_map(self.base, self.base.values)
        m = self.base.mesh
        s = t * self.ds[m.dof]
        q = t * self.dt[m.dof]
        return 0.5 * np.stack([s.real - 1j * q.real, s.imag - 1j * q.imag], axis=-1)


def _transport(base, other):
    if base.is_torus:
        return other.values - base.values
    return disk_log(base.values, other.values)


def central_difference(solve, z, alpha, h):
    """Plain central differences ``(ds, dt)`` at ``u(z)`` (no extrapolation)."""
    z = np.asarray(z, dtype=complex)
    base = solve(z)
    e = np.zeros(len(z), complex)
    e[alpha] = 1.0
    ds = (_transport(base, solve(z + h * e)) - _transport(base, solve(z - h * e))) / (2 * h)
    dt = (_transport(base, solve(z + 1j * h * e)) - _transport(base, solve(z - 1j * h * e))) / (2 * h)
    return ds, dt


def map_derivative_fd(solve, z, alpha, h):
    """Central complex difference of solved maps at ``z +- h e_a``, ``z +- i h e_a``.

    ``solve(z)`` returns the harmonic map at ``z``.  Differences are taken in the
    tangent space at ``u(z)`` and Richardson-combined over ``h`` and ``h/2``.
    """
    z = np.asarray(z, dtype=complex)
    base = solve(z)
    if h == 0:
        zero = np.zeros(base.mesh.n_dofs, complex)
        return TangentField(base, zero, zero, 0.0, 0.0)

    s1, t1 = central_difference(solve, z, alpha, h)
    s2, t2 = central_difference(solve, z, alpha, h / 2)
    ds = (4 * s2 - s1) / 3
    dt = (4 * t2 - t1) / 3
    num = np.linalg.norm(s1 - s2) + np.linalg.norm(t1 - t2)
    return TangentField(base, ds, dt, h, float(num))
