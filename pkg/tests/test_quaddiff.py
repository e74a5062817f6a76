import numpy as np
import pytest

from bolzawp.errors import RankDeficient
from bolzawp.fuchsian import enumerate_ball
from bolzawp.quaddiff import (BeltramiDifferential, QuadraticDifferential, basis, gram_matrix, harmonic_beltrami,
                              holomorphy_residual, poincare_series, tail_estimate, wp_gram)
from bolzawp.verify import sample_points


@pytest.fixture(scope="module")
def pts():
    return sample_points(24, seed=5, radius=0.8)


@pytest.fixture(scope="module")
def theta1(group):
    return {R: poincare_series(enumerate_ball(group, R), 0) for R in (8.0, 10.0, 12.0)}


def test_radius_floor(group):
    with pytest.raises(ValueError):
        poincare_series(enumerate_ball(group, 4.0), 0)


def test_tail_decay(group, theta1, pts):
    t10 = tail_estimate(theta1[10.0], theta1[8.0], pts, group.generators)
    t12 = tail_estimate(theta1[12.0], theta1[10.0], pts, group.generators)
    assert t12 / t10 < 0.3


def test_automorphy_within_tail(group, theta1, pts):
    q = theta1[12.0]
    tail = tail_estimate(q, theta1[10.0], pts, group.generators)
    assert q.automorphy_residual(pts, group.generators) < 10 * tail
    # residuals shrink with the radius
    r = [theta1[R].automorphy_residual(pts, group.generators) for R in (8.0, 10.0, 12.0)]
    assert r[2] < 2 * r[1] and r[1] < 2 * r[0]


def test_rotation_fixed_point(theta1):
    q = theta1[10.0]
    assert q(0) == q(np.exp(1j * np.pi / 4) * 0)
    # the rotation normalizes the group, so Theta_1 is invariant as a function
    v = np.array([0.2 + 0.1j, -0.3j, 0.4])
    np.testing.assert_allclose(q.direct(np.exp(1j * np.pi / 4) * v), q.direct(v), atol=1e-9)


def test_taylor_surrogate_matches_series(seeds10, pts):
    for q in seeds10:
        scale = np.max(np.abs(q.direct(pts)))
        if scale == 0:
            continue
        assert np.max(np.abs(q(pts) - q.direct(pts))) < 1e-9 * scale


def test_seed_gram_rank(basis3):
    ev = np.linalg.eigvalsh(basis3.seed_gram)
    assert np.sum(ev > 1e-8 * ev.max()) >= 3
    assert np.linalg.cond(basis3.raw_gram) < 1e6
    assert len(basis3) == 3


def test_orthonormal_gram(basis3, meshes):
    G = wp_gram(basis3.beltrami, meshes[3])
    assert G.is_hermitian()
    np.testing.assert_allclose(G.matrix, np.eye(3), atol=1e-8)


def test_raw_seed_gram_near_diagonal(basis3):
    S = basis3.raw_gram
    d = np.sqrt(np.real(np.diag(S)))
    off = np.abs(S) / np.outer(d, d)
    np.fill_diagonal(off, 0)
    assert off.max() < 1e-2


def test_sup_norm_bounded(basis3):
    assert np.all(basis3.sup_norms <= 1.0)
    assert basis3.scale <= 1.0


def test_rank_deficient(group, meshes, balls, seeds10):
    dup = [seeds10[0]] * 5
    with pytest.raises(RankDeficient):
        basis(group, 10.0, meshes[2], ball=balls[10.0], seeds=dup)


def test_beltrami_at_origin(basis3):
    for q, mu in zip(basis3.quadratic, basis3.beltrami):
        assert mu(0) == pytest.approx(np.conj(q(0)) / 2, abs=1e-15)


def test_zero_differential(balls, pts):
    q = QuadraticDifferential(balls[10.0], np.zeros(1, complex))
    mu = harmonic_beltrami(q)
    assert np.all(mu(pts) == 0)


def test_tensor_transformation_law(group, basis3, balls, pts):
    for mu in basis3.beltrami:
        q = mu.q
        q8 = QuadraticDifferential(balls[8.0], q.coeffs)
        tail = tail_estimate(q, q8, pts, group.generators)
        scale = np.max(np.abs(mu(pts)))
        assert mu.transformation_residual(pts, group.generators) < 10 * tail * scale


def test_antiholomorphy(basis3, pts):
    for mu in basis3.beltrami:
        assert holomorphy_residual(mu, pts) < 1e-8


def test_gram_spectrum_rotation_invariant(basis3, meshes):
    t = np.pi / 4

    class Rotated:
        # pull back by v -> e^{it} v: mu(e^{it} v) conj(g')/g'
        def __init__(self, mu):
            self.mu = mu

        def __call__(self, v):
            return self.mu(np.exp(1j * t) * v) * np.exp(-2j * t)

    rotated = [Rotated(mu) for mu in basis3.beltrami]
    G = gram_matrix(basis3.beltrami, meshes[3])
    Gr = gram_matrix(rotated, meshes[3])
    np.testing.assert_allclose(np.linalg.eigvalsh(Gr), np.linalg.eigvalsh(G), atol=1e-6)


def test_combine_and_scale(seeds10, pts):
    q = seeds10[0].combine([2.0, 1j], [seeds10[0], seeds10[2]])
    np.testing.assert_allclose(q(pts), 2 * seeds10[0](pts) + 1j * seeds10[2](pts), atol=1e-12)
    np.testing.assert_allclose(q.scaled(0.5)(pts), 0.5 * q(pts), atol=1e-12)


def test_lowered_is_conjugate_holomorphic_at_origin(basis3):
    mu = basis3.beltrami[0]
    assert mu.lowered(0) == pytest.approx(np.conj(mu.q(0)))
