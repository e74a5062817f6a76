import numpy as np
import pytest

from bolzawp.deformation import MU_LIMIT, Chart, TeichPoint, conformal_tensor, identity_structure
from bolzawp.errors import OutOfChart
from bolzawp.harmonic import energy
from bolzawp.quaddiff import wp_gram


def test_origin_is_identity(chart3):
    s = chart3.structure_at(np.zeros(3))
    assert np.all(s.mu_quad == 0) and np.all(s.mu_bary == 0)
    assert np.all(s.tensors == np.eye(2))


def test_linearity(chart3, rng):
    h = 0.01
    s = chart3.structure_at([h, 0, 0])
    np.testing.assert_array_equal(s.mu_quad, h * chart3.mu_quad[0])
    z = (rng.standard_normal(3) + 1j * rng.standard_normal(3)) * 0.02
    a = chart3.structure_at(z)
    b = chart3.structure_at(0.5j * z)
    np.testing.assert_allclose(b.mu_quad, 0.5j * a.mu_quad, rtol=0, atol=1e-15)
    v = np.array([0.1, 0.3j])
    np.testing.assert_allclose(chart3.mu(z, v), sum(z[k] * chart3.basis.beltrami[k](v) for k in range(3)))


def test_tensor_determinant(rng):
    mu = 0.9 * np.sqrt(rng.random(500)) * np.exp(2j * np.pi * rng.random(500))
    M = conformal_tensor(mu)
    np.testing.assert_allclose(np.linalg.det(M), (1 - np.abs(mu) ** 2) ** 2, rtol=0, atol=1e-12)
    # |dv + mu dvbar|^2 evaluated on a vector
    X = np.array([0.3, -1.2])
    dv = X[0] + 1j * X[1]
    np.testing.assert_allclose(np.einsum("i,nij,j->n", X, M, X), np.abs(dv + mu * np.conj(dv)) ** 2)


def test_out_of_chart(chart3):
    with pytest.raises(OutOfChart):
        chart3.structure_at([1.01 * chart3.r_max, 0, 0])
    big = Chart(chart3.basis, chart3.mesh, r_max=10.0)
    with pytest.raises(OutOfChart):
        big.structure_at([2.0, 0, 0])
    assert MU_LIMIT == 0.5


def test_chart_radius_bound(chart3):
    r = chart3.r_max
    for e in np.eye(3):
        for ph in (1, 1j, -1, -1j):
            assert chart3.structure_at(r * ph * e).sup_mu() <= 0.2 + 1e-9
    assert chart3.structure_at(r * np.array([1, 1j, -1])).sup_mu() <= 0.2 + 1e-9


def test_directions_are_wp_orthonormal(chart3):
    G = wp_gram([chart3.kodaira_spencer_direction(a) for a in range(3)], chart3.mesh).matrix
    np.testing.assert_allclose(np.diag(G).real, 1.0, atol=1e-8)
    off = G - np.diag(np.diag(G))
    assert np.abs(off).max() < 1e-8


def test_energy_conformal_invariance(chart3, rng):
    from bolzawp.curvature import FlatTorus
    from bolzawp.harmonic import MapField
    mesh = chart3.mesh
    s = chart3.structure_at([0.05, 0.02j, 0])
    mf = MapField(mesh, FlatTorus(), 0.1 * rng.standard_normal(mesh.n_dofs) * (1 + 1j),
                  np.array([1, 0, 0, 0], complex))
    scaled = type(s)(s.z, s.mu_quad, s.mu_bary, s.tensors * rng.uniform(0.5, 3, (mesh.n_triangles, 1, 1)), mesh)
    assert energy(mf, scaled) == pytest.approx(energy(mf, s), rel=1e-12)


def test_identity_structure(meshes):
    s = identity_structure(meshes[2])
    assert s.z == TeichPoint.origin()
    assert s.sup_mu() == 0


def test_teich_point():
    p = TeichPoint.of([1, 2j, -3])
    assert p.norm_inf() == 3
    np.testing.assert_array_equal(p.array(), [1, 2j, -3])
