"""Target geometry: the hyperbolic disk and the flat torus in real coordinates.

Points of either target are stored as complex numbers ``w = u1 + i u2``.
Both metrics are conformal, ``g = rho(w) I``.  Complexified tangent vectors are
arrays ``(..., 2)`` of complex components in the real frame; the metric is
extended complex-bilinearly, so ``<X, conj X>`` is the Hermitian square norm.
"""
import numpy as np

from .errors import DegeneratePlane


def _xy(w):
    w = np.asarray(w, dtype=complex)
    return np.stack([w.real, w.imag], axis=-1)


def _dot(g, X, Y):
    return g * np.sum(np.asarray(X) * np.asarray(Y), axis=-1)


class _ConformalTarget:
    curvature_sign = 0.0
    name = ""

    def rho(self, w):
        raise NotImplementedError

    def rho_derivatives(self, w):
        """``rho``, its gradient ``(..., 2)`` and Hessian ``(..., 2, 2)`` in ``(u1, u2)``."""
        raise NotImplementedError

    def gaussian_curvature(self, w):
        raise NotImplementedError

    def metric(self, w):
        r = self.rho(w)
        return r[..., None, None] * np.eye(2)

    def inner(self, X, Y, w):
        """Complex-bilinear ``g(X, Y)`` at ``w``."""
        return _dot(self.rho(w), X, Y)

    def log_density_derivatives(self, w):
        """Gradient and Hessian of ``f = log(rho) / 2``."""
        r, d, h = self.rho_derivatives(w)
        df = 0.5 * d / r[..., None]
        hf = 0.5 * (h / r[..., None, None] - d[..., :, None] * d[..., None, :] / r[..., None, None] ** 2)
        return df, hf

    def christoffel(self, w):
        """``Gamma[..., k, i, j] = Gamma^k_{ij}`` of the conformal metric."""
        df, _ = self.log_density_derivatives(w)
        I = np.eye(2)
        return (np.einsum("ki,...j->...kij", I, df) + np.einsum("kj,...i->...kij", I, df)
                - np.einsum("ij,...k->...kij", I, df))

    def riemann(self, X, Y, Z, W, w):
        """``R(X,Y,Z,W) = K (<X,Z><Y,W> - <X,W><Y,Z>)``, complex-multilinear."""
        K = self.gaussian_curvature(w)
        ip = lambda a, b: self.inner(a, b, w)
        return K * (ip(X, Z) * ip(Y, W) - ip(X, W) * ip(Y, Z))

    def riemann_tensor(self, w):
        """Covariant components ``R_{ijkl}`` from the closed form, shape ``(..., 2,2,2,2)``."""
        g = self.metric(w)
        K = np.asarray(self.gaussian_curvature(w))
        return K[..., None, None, None, None] * (
            np.einsum("...ik,...jl->...ijkl", g, g) - np.einsum("...il,...jk->...ijkl", g, g))

    def riemann_tensor_coordinates(self, w):
        """Covariant ``R_{ijkl}`` from Christoffel symbols and their derivatives.

        Independent of :meth:`riemann_tensor`; the two must agree.
        """
        df, hf = self.log_density_derivatives(w)
        I = np.eye(2)
        G = self.christoffel(w)
        # dG[..., m, k, i, j] = d_m Gamma^k_{ij}
        dG = (np.einsum("ki,...jm->...mkij", I, hf) + np.einsum("kj,...im->...mkij", I, hf)
              - np.einsum("ij,...km->...mkij", I, hf))
        # R^l_{kij} = d_i G^l_{jk} - d_j G^l_{ik} + G^l_{im} G^m_{jk} - G^l_{jm} G^m_{ik}
        Rup = (np.einsum("...iljk->...lkij", dG) - np.einsum("...jlik->...lkij", dG)
               + np.einsum("...lim,...mjk->...lkij", G, G) - np.einsum("...ljm,...mik->...lkij", G, G))
        g = self.metric(w)
        # R_{ijkl} = <R(e_i, e_j) e_l, e_k> with R(X,Y)Z = R^m_{Z X Y} e_m
        R_lower = np.einsum("...ak,...alij->...ijkl", g, Rup)
        return R_lower

    def hermitian_sectional(self, X, Y, w, tol=1e-12):
        X = np.asarray(X, dtype=complex)
        Y = np.asarray(Y, dtype=complex)
        num = self.riemann(X, Y, np.conj(X), np.conj(Y), w)
        nx = self.inner(X, np.conj(X), w).real
        ny = self.inner(Y, np.conj(Y), w).real
        cross = self.inner(X, np.conj(Y), w)
        den = nx * ny - np.abs(cross) ** 2
        if np.any(den <= tol):
            raise DegeneratePlane("X and Y span a degenerate complex plane")
        return num / den


class Hyperbolic(_ConformalTarget):
    """Poincare disk with ``g = 4 / (1 - |w|^2)^2 I`` (curvature -1)."""

    curvature_sign = -1.0
    name = "hyperbolic"

    def rho(self, w):
        s = np.abs(np.asarray(w)) ** 2
        return 4.0 / (1.0 - s) ** 2

    def rho_derivatives(self, w):
        y = _xy(w)
        s = np.sum(y * y, axis=-1)
        q = 1.0 - s
        r = 4.0 / q ** 2
        d = 16.0 * y / q[..., None] ** 3
        h = (16.0 / q ** 3)[..., None, None] * np.eye(2) + (96.0 / q ** 4)[..., None, None] * (
            y[..., :, None] * y[..., None, :])
        return r, d, h

    def gaussian_curvature(self, w):
        return -np.ones(np.shape(w))


class FlatTorus(_ConformalTarget):
    """``R^2 / Z^2`` with the Euclidean metric."""

    curvature_sign = 0.0
    name = "torus"

    def rho(self, w):
        return np.ones(np.shape(w))

    def rho_derivatives(self, w):
        shp = np.shape(w)
        return np.ones(shp), np.zeros(shp + (2,)), np.zeros(shp + (2, 2))

    def gaussian_curvature(self, w):
        return np.zeros(np.shape(w))


def target(name):
    if name == "hyperbolic":
        return Hyperbolic()
    if name == "torus":
        return FlatTorus()
    raise ValueError(f"unknown target {name!r}")
