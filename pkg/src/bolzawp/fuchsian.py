"""The Bolza surface group: side pairings of the regular octagon, balls of
group elements and reduction of points to the fundamental octagon."""
from dataclasses import dataclass, field

import numpy as np

from .errors import BudgetExceeded, NonConvergence
from .hypgeom import Mobius, hyperbolic_distance

SQRT2 = np.sqrt(2.0)
#: cosh of half the translation length of every side pairing
COSH_HALF = 1.0 + SQRT2
#: translation length 2 arccosh(1 + sqrt 2), also the systole
SYSTOLE = 2.0 * np.arccosh(COSH_HALF)
#: hyperbolic distance from the center to a side midpoint / to a vertex
INRADIUS = SYSTOLE / 2
CIRCUMRADIUS = np.arccosh(COSH_HALF ** 2)


@dataclass(frozen=True)
class FundamentalOctagon:
    vertices: np.ndarray
    side_midpoints: np.ndarray
    interior_angle: float = np.pi / 4
    area: float = 4 * np.pi

    @property
    def angle_sum(self):
        return 8 * self.interior_angle


def octagon():
    """Regular octagon centered at 0; side ``k`` has its midpoint at angle ``k pi/4``
    and runs from vertex ``k-1`` to vertex ``k``."""
    k = np.arange(8)
    verts = np.tanh(CIRCUMRADIUS / 2) * np.exp(1j * (np.pi / 8 + k * np.pi / 4))
    mids = np.tanh(INRADIUS / 2) * np.exp(1j * k * np.pi / 4)
    return FundamentalOctagon(verts, mids)


@dataclass(frozen=True)
class SurfaceGroup:
    """Side pairings ``g_0..g_7`` with ``g_{k+4} = g_k^{-1}``.

    ``g_k`` maps side ``k+4`` onto side ``k``.  ``pairing_table[j] = (j', k)``
    means the generator ``g_k`` carries side ``j`` onto side ``j'``.
    """

    generators: tuple
    pairing_table: dict
    relation: tuple
    genus: int = 2
    domain: FundamentalOctagon = field(default_factory=octagon)

    def word_to_mobius(self, word):
        g = Mobius.identity()
        for k in word:
            g = g @ self.generators[k]
        return g

    def relation_residual(self):
        r = self.word_to_mobius(self.relation)
        return r.distance_to(Mobius.identity())


def _vertex_cycle(gens, pairing, dom):
    """Relation read off the vertex cycle of the octagon (Poincare's theorem)."""
    verts = dom.vertices
    # vertex k lies on sides k and k+1
    def other_side(vertex, side):
        s = {vertex % 8, (vertex + 1) % 8}
        s.discard(side)
        return s.pop()

    v, s = 0, 0
    word = []
    for _ in range(64):
        _, k = pairing[s]
        g = gens[k]
        image = g(verts[v])
        v = int(np.argmin(np.abs(verts - image)))
        s = other_side(v, pairing[s][0])
        word.append(k)
        if v == 0 and s == 0:
            break
    # the composite h_n o ... o h_1 is the identity
    return tuple(reversed(word))


def bolza_group():
    T = Mobius(complex(COSH_HALF), complex(np.sqrt(COSH_HALF ** 2 - 1.0)))
    gens = []
    for k in range(8):
        r = Mobius.rotation(k * np.pi / 4)
        gens.append(r @ T @ r.inverse())
    pairing = {(k + 4) % 8: (k, k) for k in range(8)}
    dom = octagon()
    relation = _vertex_cycle(gens, pairing, dom)
    return SurfaceGroup(tuple(gens), pairing, relation, 2, dom)


@dataclass(frozen=True)
class GroupBall:
    """Group elements ``gamma`` with ``d(0, gamma 0) <= radius``.

    ``a`` and ``b`` hold the matrix entries, ``abel`` the exponent sums of
    ``g_0..g_3`` (the image in the abelianization ``Z^4``).
    """

    a: np.ndarray
    b: np.ndarray
    abel: np.ndarray
    radius: float

    def __len__(self):
        return len(self.a)

    def __getitem__(self, i):
        return Mobius(complex(self.a[i]), complex(self.b[i]))

    def __iter__(self):
        for i in range(len(self)):
            yield self[i]

    def orbit_points(self):
        return self.b / np.conj(self.a)

    def distances(self):
        return 2.0 * np.arctanh(np.abs(self.b) / np.abs(self.a))


_ABEL_GEN = np.vstack([np.eye(4, dtype=np.int64), -np.eye(4, dtype=np.int64)])


def enumerate_ball(group, radius, cap=2_000_000):
    """Breadth-first closure over the generators, pruned to the ball of ``radius``.

    Deduplication is by the orbit point ``gamma(0)`` (the action is free).
    """
    if radius <= 0:
        raise ValueError("radius must be positive")
    ga = np.array([g.a for g in group.generators])
    gb = np.array([g.b for g in group.generators])
    cell = 1e-7
    seen = {(0, 0)}
    A = [np.array([1.0 + 0j])]
    B = [np.array([0j])]
    AB = [np.zeros((1, 4), dtype=np.int64)]
    fa, fb, fab = A[0], B[0], AB[0]
    total = 1
    tanh_r = np.tanh(radius / 2) + 1e-12
    while len(fa):
        na = (ga[:, None] * fa[None, :] + gb[:, None] * np.conj(fb)[None, :]).ravel()
        nb = (ga[:, None] * fb[None, :] + gb[:, None] * np.conj(fa)[None, :]).ravel()
        nab = (_ABEL_GEN[:, None, :] + fab[None, :, :]).reshape(-1, 4)
        w = nb / np.conj(na)
        keep = np.abs(w) <= tanh_r
        na, nb, nab, w = na[keep], nb[keep], nab[keep], w[keep]
        kx = np.rint(w.real / cell).astype(np.int64)
        ky = np.rint(w.imag / cell).astype(np.int64)
        sel = []
        for i in range(len(w)):
            x, y = int(kx[i]), int(ky[i])
            if any((x + dx, y + dy) in seen for dx in (-1, 0, 1) for dy in (-1, 0, 1)):
                continue
            seen.add((x, y))
            sel.append(i)
        total += len(sel)
        if total > cap:
            raise BudgetExceeded(f"ball of radius {radius} exceeds {cap} elements")
        sel = np.array(sel, dtype=np.int64)
        fa, fb, fab = na[sel], nb[sel], nab[sel]
        A.append(fa)
        B.append(fb)
        AB.append(fab)
    a = np.concatenate(A)
    b = np.concatenate(B)
    ab = np.concatenate(AB)
    # canonical order: distance, then angle of the orbit point
    d = np.round(2.0 * np.arctanh(np.abs(b) / np.abs(a)), 9)
    ang = np.round(np.angle(b / np.conj(a)), 9)
    order = np.lexsort((ang, d))
    # fix the global sign so that Re a > 0
    s = np.where(a.real < 0, -1.0, 1.0)
    return GroupBall(a[order] * s[order], b[order] * s[order], ab[order], float(radius))


def in_domain(group, v, tol=1e-12):
    d0 = hyperbolic_distance(0, v)
    return all(hyperbolic_distance(0, g(v)) >= d0 - tol for g in group.generators)


def reduce_to_domain(group, v, max_steps=500):
    """Move ``v`` into the closed octagon by greedy distance reduction.

    Returns ``(p, word)`` with ``v = g_{word[0]} o g_{word[1]} o ... (p)``.
    """
    if abs(v) >= 1:
        raise ValueError("point outside the unit disk")
    p = complex(v)
    word = []
    for _ in range(max_steps):
        d0 = hyperbolic_distance(0, p)
        ds = [hyperbolic_distance(0, g(p)) for g in group.generators]
        k = int(np.argmin(ds))
        if ds[k] >= d0 - 1e-12:
            return p, word
        p = complex(group.generators[k](p))
        word.append((k + 4) % 8)
    raise NonConvergence(f"greedy reduction stalled after {max_steps} steps")
