import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bolzawp.errors import BudgetExceeded
from bolzawp.fuchsian import SYSTOLE, enumerate_ball, in_domain, reduce_to_domain
from bolzawp.hypgeom import Mobius, hyperbolic_distance


def test_generators(group):
    assert len(group.generators) == 8
    for k, g in enumerate(group.generators):
        assert g.translation_length() == pytest.approx(3.057142, abs=1e-6)
        assert g.translation_length() == pytest.approx(SYSTOLE, abs=1e-12)
        assert g.inverse().isclose(group.generators[(k + 4) % 8])
    p = group.generators[0](0)
    assert abs(p.imag) < 1e-14 and p.real == pytest.approx(0.91018, abs=1e-5)


def test_relation(group):
    assert group.relation_residual() < 1e-10
    g = group.word_to_mobius(group.relation)
    assert g.isclose(Mobius.identity())


def test_octagon(group):
    dom = group.domain
    assert dom.angle_sum == pytest.approx(2 * np.pi)
    # each generator pairs opposite sides
    for k in range(4):
        g = group.generators[k]
        assert abs(g(dom.side_midpoints[k + 4]) - dom.side_midpoints[k]) < 1e-12


def test_ball_examples(group):
    assert len(enumerate_ball(group, 0.1)) == 1
    b = enumerate_ball(group, 3.06)
    assert len(b) == 9
    assert b[0].isclose(Mobius.identity())
    got = {i for g in list(b)[1:] for i, h in enumerate(group.generators) if g.isclose(h)}
    assert got == set(range(8))


def test_ball_growth(group, balls):
    for R in (6.0, 7.0, 8.0, 9.0):
        n0, n1 = len(enumerate_ball(group, R)), len(enumerate_ball(group, R + 1))
        assert np.e * 0.5 <= n1 / n0 <= np.e * 2.0


def test_ball_invariants(group, balls):
    b = balls[8.0]
    assert np.max(np.abs(np.abs(b.a) ** 2 - np.abs(b.b) ** 2 - 1)) < 1e-9
    assert np.all(b.distances() <= 8.0 + 1e-9)
    # brute force: points of the orbit are separated by at least the systole
    w = b.orbit_points()
    d = hyperbolic_distance(w[:, None], w[None, :])
    np.fill_diagonal(d, np.inf)
    assert d.min() > SYSTOLE - 1e-6
    # closed under inverse (when the inverse stays in the ball, which it does: same distance)
    inv = -b.b / b.a  # gamma^{-1}(0)
    assert np.max(np.min(np.abs(inv[:, None] - w[None, :]), axis=1)) < 1e-8


def test_ball_pairwise_distinct_matrices(group):
    b = enumerate_ball(group, 6.0)
    els = list(b)
    for i in range(len(els)):
        for j in range(i + 1, len(els)):
            assert els[i].distance_to(els[j]) > 1e-8


def test_budget(group):
    with pytest.raises(BudgetExceeded):
        enumerate_ball(group, 9.0, cap=100)


def test_reduce_examples(group):
    assert reduce_to_domain(group, 0.1 + 0.2j) == (0.1 + 0.2j, [])
    p, word = reduce_to_domain(group, group.generators[0](0.1))
    assert abs(p - 0.1) < 1e-12 and word == [0]


def _apply(group, word, p):
    for k in reversed(word):
        p = group.generators[k](p)
    return p


@settings(max_examples=100)
@given(st.floats(0, 0.999), st.floats(0, 2 * np.pi))
def test_reduce_roundtrip_and_idempotent(group, r, t):
    v = r * np.exp(1j * t)
    p, word = reduce_to_domain(group, v)
    assert in_domain(group, p, tol=1e-9)
    assert abs(_apply(group, word, p) - v) < 1e-9
    q, w2 = reduce_to_domain(group, p)
    assert q == p and w2 == []


def test_octagon_tiles(group):
    rng = np.random.default_rng(0)
    r = np.tanh(0.9 * SYSTOLE / 4) * np.sqrt(rng.random(300))
    pts = r * np.exp(2j * np.pi * rng.random(300))
    for p in pts:
        assert in_domain(group, p)
        for g in group.generators:
            q = g(p)
            # the image is strictly outside the open octagon
            assert not in_domain(group, q, tol=-1e-9)
