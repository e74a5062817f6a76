"""Holomorphic quadratic differentials by Poincare series, harmonic Beltrami
differentials and the Weil-Petersson Gram matrix."""
from dataclasses import dataclass, field

import numpy as np

from .errors import RankDeficient
from .fuchsian import enumerate_ball
from .hypgeom import density_phi

# Taylor expansion is sampled on this circle and trusted inside TAYLOR_TRUST
TAYLOR_CIRCLE = 0.9
TAYLOR_TRUST = 0.88
TAYLOR_TERMS = 1024


def _series_terms(ball, coeff_list, v, chunk=1_000_000):
    """``sum_gamma gamma'(v)^2 P(gamma v)`` for every ``P`` in ``coeff_list``."""
    v = np.asarray(v, dtype=complex)
    flat = v.ravel()
    out = np.zeros((len(coeff_list), flat.size), dtype=complex)
    a, b = ball.a, ball.b
    cb, ca = np.conj(b), np.conj(a)
    step = max(1, chunk // max(len(a), 1))
    for s in range(0, flat.size, step):
        x = flat[s:s + step, None]
        w = 1.0 / (cb * x + ca)
        gv = (a * x + b) * w
        w *= w
        w *= w
        for i, c in enumerate(coeff_list):
            acc = np.full(gv.shape, c[-1])
            for ck in c[-2::-1]:
                acc = acc * gv + ck
            out[i, s:s + step] = (acc * w).sum(axis=1)
    return out.reshape((len(coeff_list),) + v.shape)


def _series_direct(ball, coeffs, v):
    return _series_terms(ball, [coeffs], v)[0]


def _taylor_samples():
    n = TAYLOR_TERMS
    return TAYLOR_CIRCLE * np.exp(2j * np.pi * np.arange(n) / n)


def _taylor_from_samples(values):
    n = TAYLOR_TERMS
    return np.fft.fft(values) / n / TAYLOR_CIRCLE ** np.arange(n)


@dataclass(eq=False)
class QuadraticDifferential:
    """``q(v) dv^2`` with ``q(gamma v) gamma'(v)^2 = q(v)``, given as the Poincare
    series of the polynomial with (ascending) coefficients ``coeffs``."""

    ball: object
    coeffs: np.ndarray
    _taylor: np.ndarray = field(default=None, repr=False)

    @property
    def radius(self):
        return self.ball.radius

    def direct(self, v):
        return _series_direct(self.ball, self.coeffs, v)

    def taylor(self):
        """Taylor coefficients at 0 of the truncated series (from samples on a circle)."""
        if self._taylor is None:
            self._taylor = _taylor_from_samples(self.direct(_taylor_samples()))
        return self._taylor

    def __call__(self, v):
        v = np.asarray(v, dtype=complex)
        inside = np.abs(v) <= TAYLOR_TRUST
        out = np.empty(v.shape, dtype=complex)
        out[inside] = np.polyval(self.taylor()[::-1], v[inside])
        if np.any(~inside):
            out[~inside] = self.direct(v[~inside])
        return out[()] if out.ndim == 0 else out

    def derivative(self, v):
        c = self.taylor()
        d = c[1:] * np.arange(1, len(c))
        return np.polyval(d[::-1], np.asarray(v, dtype=complex))

    def combine(self, weights, others):
        """``sum w_i q_i`` over ``others`` (all sharing this ball) as a new differential."""
        n = max(len(q.coeffs) for q in others)
        coeffs = np.zeros(n, dtype=complex)
        taylor = np.zeros(TAYLOR_TERMS, dtype=complex)
        for w, q in zip(weights, others):
            coeffs[:len(q.coeffs)] += w * q.coeffs
            taylor += w * q.taylor()
        return QuadraticDifferential(self.ball, coeffs, taylor)

    def scaled(self, s):
        return QuadraticDifferential(self.ball, s * self.coeffs, s * self.taylor())

    def automorphy_residual(self, points, generators):
        """Max of ``|q(g v) g'(v)^2 - q(v)| (1-|v|^2)^2`` relative to the max of the
        invariant size ``|q(v)| (1-|v|^2)^2`` on ``points``."""
        points = np.asarray(points, dtype=complex)
        w = (1.0 - np.abs(points) ** 2) ** 2
        qv = self.direct(points)
        worst = 0.0
        for g in generators:
            r = self.direct(g(points)) * g.derivative(points) ** 2 - qv
            worst = max(worst, float(np.max(np.abs(r) * w)))
        return worst / float(np.max(np.abs(qv) * w))


def _monomial(k):
    c = np.zeros(int(k) + 1, dtype=complex)
    c[-1] = 1.0
    return c


def seed_series(ball, degrees):
    """Poincare series of the monomials ``v^k``, ``k`` in ``degrees``, in one pass."""
    if ball.radius < 8:
        raise ValueError("series radius must be at least 8")
    coeffs = [_monomial(k) for k in degrees]
    vals = _series_terms(ball, coeffs, _taylor_samples())
    return [QuadraticDifferential(ball, c, _taylor_from_samples(f)) for c, f in zip(coeffs, vals)]


def poincare_series(ball, P):
    """Poincare series of the polynomial ``P`` (ascending coefficients, or an int
    ``k`` for the monomial ``v^k``)."""
    if np.isscalar(P) and float(P).is_integer():
        c = _monomial(P)
    else:
        c = np.asarray(P, dtype=complex)
    if ball.radius < 8:
        raise ValueError("series radius must be at least 8")
    return QuadraticDifferential(ball, c)


@dataclass(eq=False)
class BeltramiDifferential:
    """``mu = phi^{-1} conj(q)``, a (-1, 1) tensor on the surface."""

    q: QuadraticDifferential

    def __call__(self, v):
        v = np.asarray(v, dtype=complex)
        return 0.5 * (1.0 - np.abs(v) ** 2) ** 2 * np.conj(self.q(v))

    def lowered(self, v):
        """``phi_{v vbar} mu``: the conjugate of a holomorphic function."""
        return density_phi(v) * self(v)

    def sup_norm(self, mesh):
        pts, _ = mesh.quad_points("six")
        return float(max(np.max(np.abs(self(pts))), np.max(np.abs(self(mesh.vertices)))))

    def transformation_residual(self, points, generators):
        """Max of ``|mu(g v) conj(g')/g' - mu(v)|`` using the direct series."""
        def mu(x):
            return 0.5 * (1.0 - np.abs(x) ** 2) ** 2 * np.conj(self.q.direct(x))
        mv = mu(points)
        worst = 0.0
        for g in generators:
            d = g.derivative(points)
            worst = max(worst, float(np.max(np.abs(mu(g(points)) * np.conj(d) / d - mv))))
        return worst


def harmonic_beltrami(q):
    return BeltramiDifferential(q)


def gram_matrix(beltramis, mesh, rule="three"):
    pts, _ = mesh.quad_points(rule)
    vals = [b(pts) for b in beltramis]
    m = len(vals)
    G = np.empty((m, m), dtype=complex)
    for i in range(m):
        for j in range(m):
            G[i, j] = mesh.integrate(vals[i] * np.conj(vals[j]), "hyperbolic_area", rule)
    return 0.5 * (G + G.conj().T)


@dataclass(frozen=True)
class WPGram:
    matrix: np.ndarray
    level: int
    radius: float

    def is_hermitian(self, tol=1e-12):
        return bool(np.max(np.abs(self.matrix - self.matrix.conj().T)) < tol)

    def eigenvalues(self):
        return np.linalg.eigvalsh(self.matrix)


def wp_gram(beltramis, mesh):
    G = gram_matrix(beltramis, mesh)
    return WPGram(G, mesh.level, float(beltramis[0].q.radius))


@dataclass(eq=False)
class Basis:
    """WP-orthonormal quadratic differentials and their harmonic Beltrami duals."""

    quadratic: list
    beltrami: list
    seeds: tuple
    raw_gram: np.ndarray
    seed_gram: np.ndarray
    transform: np.ndarray
    scale: float
    sup_norms: np.ndarray
    radius: float
    level: int

    def __len__(self):
        return len(self.beltrami)

    def chart_radius(self, mesh, target_sup=0.2):
        """Largest ``r`` with ``sup |sum z_a mu_a| <= target_sup`` on ``|z|_inf <= r``."""
        pts, _ = mesh.quad_points("six")
        total = sum(np.abs(b(pts)) for b in self.beltrami)
        total_v = sum(np.abs(b(mesh.vertices)) for b in self.beltrami)
        return target_sup / float(max(total.max(), total_v.max()))


SEED_ORDER = (0, 1, 2, 3, 4)


def basis(group, radius, mesh, ball=None, seeds=None, rank_tol=1e-8):
    """Three WP-orthonormal directions from the seeds ``1, v, v^2, v^3, v^4``.

    Seeds are taken in order, skipping any whose series is (numerically) in the
    span of those already chosen.  The result is rescaled by a common factor
    only if needed to keep every ``sup |mu_a| <= 1``.
    """
    if seeds is None:
        if ball is None:
            ball = enumerate_ball(group, radius)
        seeds = seed_series(ball, SEED_ORDER)
    bels = [BeltramiDifferential(q) for q in seeds]
    S = gram_matrix(bels, mesh)
    scale_ref = float(np.max(np.real(np.diag(S))))
    chosen = []
    for k in range(len(seeds)):
        trial = chosen + [k]
        sub = S[np.ix_(trial, trial)]
        # squared residual of seed k against the span of the chosen ones
        if chosen:
            A = S[np.ix_(chosen, chosen)]
            c = S[np.ix_(chosen, [k])]
            res = float(np.real(S[k, k] - (c.conj().T @ np.linalg.solve(A, c))[0, 0]))
        else:
            res = float(np.real(sub[0, 0]))
        if res > rank_tol * scale_ref:
            chosen.append(k)
        if len(chosen) == 3:
            break
    if len(chosen) < 3:
        raise RankDeficient(f"only {len(chosen)} independent series among 5 seeds")
    Ssel = S[np.ix_(chosen, chosen)]
    L = np.linalg.cholesky(Ssel)
    C = np.linalg.inv(L)
    base = [seeds[k] for k in chosen]
    quads = [base[0].combine(C[a], base) for a in range(3)]
    sups = np.array([BeltramiDifferential(q).sup_norm(mesh) for q in quads])
    scale = min(1.0, 1.0 / float(sups.max()))
    if scale < 1.0:
        quads = [q.scaled(scale) for q in quads]
    bels_out = [BeltramiDifferential(q) for q in quads]
    return Basis(
        quadratic=quads,
        beltrami=bels_out,
        seeds=tuple(SEED_ORDER[k] for k in chosen),
        raw_gram=Ssel,
        seed_gram=S,
        transform=C * scale,
        scale=scale,
        sup_norms=sups * scale,
        radius=float(radius),
        level=mesh.level,
    )


def holomorphy_residual(beltrami, points, step=1e-3):
    """Relative size of the finite-difference ``d/dv`` of ``phi mu`` (which must vanish)
    against its ``d/dvbar``, both from the direct series.

    Central differences at ``step`` and ``step/2`` are Richardson-combined.
    """
    def F(x):
        return density_phi(x) * 0.5 * (1.0 - np.abs(x) ** 2) ** 2 * np.conj(beltrami.q.direct(x))

    def grads(h):
        fx = (F(points + h) - F(points - h)) / (2 * h)
        fy = (F(points + 1j * h) - F(points - 1j * h)) / (2 * h)
        return 0.5 * (fx - 1j * fy), 0.5 * (fx + 1j * fy)

    d1, b1 = grads(step)
    d2, b2 = grads(step / 2)
    dv = (4 * d2 - d1) / 3
    dvbar = (4 * b2 - b1) / 3
    return float(np.linalg.norm(dv) / np.linalg.norm(dvbar))


def tail_estimate(q, q_coarse, points, generators=()):
    """``max |Theta_R - Theta_{R-2}| (1-|x|^2)^2`` over ``points`` and their generator
    images, relative to ``max |Theta_R| (1-|v|^2)^2`` on ``points``."""
    points = np.asarray(points, dtype=complex)
    allp = np.concatenate([points.ravel()] + [g(points).ravel() for g in generators])
    diff = np.max(np.abs(q.direct(allp) - q_coarse.direct(allp)) * (1.0 - np.abs(allp) ** 2) ** 2)
    ref = np.max(np.abs(q.direct(points)) * (1.0 - np.abs(points) ** 2) ** 2)
    return float(diff / ref)
