"""Poincare disk geometry and disk-preserving Mobius transformations.

The metric is ``2 * phi * |dv|^2`` with ``phi = 2 / (1 - |v|^2)^2``, i.e. the
curvature -1 metric ``4 |dv|^2 / (1 - |v|^2)^2``.  Tangent vectors passed to
:func:`disk_exp` / returned by :func:`disk_log` are coordinate vectors (complex
numbers); their hyperbolic length at ``p`` is ``2 |t| / (1 - |p|^2)``.
"""
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Mobius:
    """The map ``v -> (a v + b) / (conj(b) v + conj(a))`` with ``|a|^2 - |b|^2 = 1``."""

    a: complex = 1.0 + 0.0j
    b: complex = 0.0j

    @classmethod
    def identity(cls):
        return cls(1.0 + 0.0j, 0.0j)

    @classmethod
    def rotation(cls, theta):
        # v -> e^{i theta} v
        return cls(complex(np.exp(0.5j * theta)), 0.0j)

    @classmethod
    def translation(cls, length):
        """Hyperbolic translation along the real axis by ``length``."""
        return cls(complex(np.cosh(length / 2)), complex(np.sinh(length / 2)))

    def __call__(self, v):
        a, b = self.a, self.b
        return (a * v + b) / (np.conj(b) * v + np.conj(a))

    def __matmul__(self, other):
        a1, b1, a2, b2 = self.a, self.b, other.a, other.b
        return Mobius(a1 * a2 + b1 * np.conj(b2), a1 * b2 + b1 * np.conj(a2))

    def inverse(self):
        return Mobius(np.conj(self.a), -self.b)

    def derivative(self, v):
        return 1.0 / (np.conj(self.b) * v + np.conj(self.a)) ** 2

    def second_derivative(self, v):
        cb = np.conj(self.b)
        return -2.0 * cb / (cb * v + np.conj(self.a)) ** 3

    def det(self):
        return abs(self.a) ** 2 - abs(self.b) ** 2

    def translation_length(self):
        # |trace| = 2 |Re a| for the SU(1,1) matrix [[a, b], [conj b, conj a]]
        return 2.0 * np.arccosh(max(abs(self.a.real), 1.0))

    def distance_to(self, other):
        """Max-norm distance between the normalized matrices, minimized over sign."""
        plus = max(abs(self.a - other.a), abs(self.b - other.b))
        minus = max(abs(self.a + other.a), abs(self.b + other.b))
        return min(plus, minus)

    def isclose(self, other, tol=1e-10):
        return self.distance_to(other) < tol


def mobius_apply(g, v):
    return g(np.asarray(v) if np.ndim(v) else v)


def mobius_derivative(g, v):
    return g.derivative(v)


def hyperbolic_distance(p, q):
    p = np.asarray(p, dtype=complex)
    q = np.asarray(q, dtype=complex)
    r = np.abs(p - q) / np.abs(1.0 - np.conj(p) * q)
    return 2.0 * np.arctanh(np.minimum(r, 1.0))


def density_phi(v):
    """Hyperbolic density ``phi_{v vbar} = 2 / (1 - |v|^2)^2``."""
    return 2.0 / (1.0 - np.abs(v) ** 2) ** 2


def _tanhc(r):
    small = r < 1e-6
    rs = np.where(small, 1.0, r)
    return np.where(small, 1.0 - r * r / 3.0, np.tanh(rs) / rs)


def _artanhc(r):
    small = r < 1e-6
    rs = np.where(small, 0.5, r)
    return np.where(small, 1.0 + r * r / 3.0, np.arctanh(rs) / rs)


def disk_exp(p, t):
    """Point reached from ``p`` along the geodesic with coordinate velocity ``t``."""
    p = np.asarray(p, dtype=complex)
    w = np.asarray(t, dtype=complex) / (1.0 - np.abs(p) ** 2)
    e0 = _tanhc(np.abs(w)) * w
    out = (e0 + p) / (1.0 + np.conj(p) * e0)
    return out[()] if out.ndim == 0 else out


def disk_log(p, q):
    """Inverse of :func:`disk_exp`: the coordinate vector at ``p`` pointing to ``q``."""
    p = np.asarray(p, dtype=complex)
    q = np.asarray(q, dtype=complex)
    w = (q - p) / (1.0 - np.conj(p) * q)
    out = (1.0 - np.abs(p) ** 2) * _artanhc(np.abs(w)) * w
    return out[()] if out.ndim == 0 else out


def tangent_norm(p, t):
    """Hyperbolic length of the coordinate vector ``t`` at ``p``."""
    return 2.0 * np.abs(t) / (1.0 - np.abs(p) ** 2)


def geodesic_midpoint(p, q):
    return disk_exp(p, 0.5 * disk_log(p, q))
