"""Equivariant triangulation of the fundamental octagon.

Mesh vertices include both copies of identified boundary points.  Every vertex
``v`` carries a degree of freedom index ``dof[v]`` and a group element ``T_v``
with ``vertices[v] = T_v(vertices[rep[dof[v]]])``; interior and representative
vertices carry the identity.  Triangles are straight in the disk coordinate.
"""
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import DegenerateMetric
from .fuchsian import enumerate_ball
from .hypgeom import Mobius, density_phi, geodesic_midpoint

# barycentric points and weights (weights sum to one)
_RULES = {
    "centroid": (np.array([[1 / 3, 1 / 3, 1 / 3]]), np.array([1.0])),
    "three": (
        np.array([[2 / 3, 1 / 6, 1 / 6], [1 / 6, 2 / 3, 1 / 6], [1 / 6, 1 / 6, 2 / 3]]),
        np.full(3, 1 / 3),
    ),
}


def _dunavant6():
    a, wa = 0.445948490915965, 0.223381589678011
    b, wb = 0.091576213509771, 0.109951743655322
    pts, w = [], []
    for x, wx in ((a, wa), (b, wb)):
        y = 1 - 2 * x
        for p in ((y, x, x), (x, y, x), (x, x, y)):
            pts.append(p)
            w.append(wx)
    return np.array(pts), np.array(w)


_RULES["six"] = _dunavant6()


def quadrature_rule(name):
    return _RULES[name]


@dataclass(eq=False)
class QuotientMesh:
    vertices: np.ndarray
    triangles: np.ndarray
    dof: np.ndarray
    rep: np.ndarray
    transform_a: np.ndarray
    transform_b: np.ndarray
    abel: np.ndarray
    sides: list
    level: int
    group: object = field(repr=False, default=None)

    def __post_init__(self):
        p = self.vertices[self.triangles]
        e1 = p[:, 1] - p[:, 0]
        e2 = p[:, 2] - p[:, 0]
        self.areas = 0.5 * (e1.real * e2.imag - e1.imag * e2.real)
        # gradients of the barycentric coordinates, shape (nT, 3, 2)
        x, y = p.real, p.imag
        g = np.empty((len(p), 3, 2))
        for k in range(3):
            i, j = (k + 1) % 3, (k + 2) % 3
            g[:, k, 0] = (y[:, i] - y[:, j]) / (2 * self.areas)
            g[:, k, 1] = (x[:, j] - x[:, i]) / (2 * self.areas)
        self.grad_bary = g
        self.n_dofs = len(self.rep)
        n = len(self.vertices)
        self.P = sp.csr_matrix((np.ones(n), (np.arange(n), self.dof)), shape=(n, self.n_dofs))

    # -- basic structure -------------------------------------------------
    @property
    def n_triangles(self):
        return len(self.triangles)

    def transform(self, v):
        return Mobius(complex(self.transform_a[v]), complex(self.transform_b[v]))

    @property
    def boundary_gluing(self):
        """``{vertex: (representative vertex, T)}`` for every non-representative vertex."""
        out = {}
        for v in range(len(self.vertices)):
            r = self.rep[self.dof[v]]
            if r != v:
                out[v] = (int(r), self.transform(v))
        return out

    def edges(self):
        t = self.triangles
        e = np.sort(np.vstack([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]]), axis=1)
        return np.unique(e, axis=0)

    def boundary_edges(self):
        t = self.triangles
        e = np.sort(np.vstack([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]]), axis=1)
        u, counts = np.unique(e, axis=0, return_counts=True)
        return u[counts == 1]

    def euler_characteristic(self):
        # glued boundary edges come in pairs
        n_edges = len(self.edges()) - len(self.boundary_edges()) // 2
        return self.n_dofs - n_edges + self.n_triangles

    def min_angle(self):
        p = self.vertices[self.triangles]
        out = np.inf
        for k in range(3):
            a = p[:, (k + 1) % 3] - p[:, k]
            b = p[:, (k + 2) % 3] - p[:, k]
            out = min(out, np.min(np.abs(np.angle(b / a))))
        return float(out)

    def gluing_residual(self):
        v = np.arange(len(self.vertices))
        r = self.rep[self.dof]
        a, b = self.transform_a, self.transform_b
        img = (a * self.vertices[r] + b) / (np.conj(b) * self.vertices[r] + np.conj(a))
        return float(np.max(np.abs(img - self.vertices[v])))

    # -- quadrature ------------------------------------------------------
    def quad_points(self, rule="three"):
        bary, w = _RULES[rule]
        pts = self.vertices[self.triangles] @ bary.T  # (nT, nq)
        return pts, self.areas[:, None] * w[None, :]

    def barycenters(self):
        return self.vertices[self.triangles].mean(axis=1)

    def integrate(self, density, form="hyperbolic_area", rule="three"):
        """Integrate a density over the quotient.

        ``density`` is a callable of the disk coordinate, an array of values at
        the quadrature points of ``rule``, or a scalar.  ``form`` selects the
        hyperbolic area element ``sqrt(-1) phi dv ^ dvbar`` or the coordinate
        element ``sqrt(-1) dv ^ dvbar = 2 dx dy``.
        """
        pts, w = self.quad_points(rule)
        f = density(pts) if callable(density) else np.broadcast_to(density, pts.shape)
        if form == "hyperbolic_area":
            f = f * density_phi(pts)
        elif form != "euclidean":
            raise ValueError(f"unknown form {form!r}")
        return np.sum(2.0 * w * f)

    # -- finite elements -------------------------------------------------
    def vertex_values(self, dof_values):
        return np.asarray(dof_values)[self.dof]

    def gradients(self, vertex_values):
        """Per-triangle gradient of the P1 interpolant, shape (nT, 2, ...)."""
        u = np.asarray(vertex_values)[self.triangles]  # (nT, 3, ...)
        return np.einsum("tkd,tk...->td...", self.grad_bary, u)

    def local_stiffness(self, tensors):
        """``|T| grad(l_i)^T A grad(l_j)`` with ``A = adj(M)/sqrt(det M)``."""
        A = conformal_weight(tensors)
        G = self.grad_bary
        return self.areas[:, None, None] * np.einsum("tid,tde,tje->tij", G, A, G)

    def stiffness_vertex(self, tensors=None):
        if tensors is None:
            tensors = np.broadcast_to(np.eye(2), (self.n_triangles, 2, 2))
        K = self.local_stiffness(tensors)
        t = self.triangles
        rows = np.repeat(t, 3, axis=1).ravel()
        cols = np.tile(t, (1, 3)).ravel()
        n = len(self.vertices)
        return sp.csr_matrix((K.ravel(), (rows, cols)), shape=(n, n))

    def mass_vertex(self):
        # hyperbolic-area-free coordinate mass matrix, P1 exact
        loc = np.array([[2, 1, 1], [1, 2, 1], [1, 1, 2]]) / 12.0
        M = self.areas[:, None, None] * loc[None]
        t = self.triangles
        rows = np.repeat(t, 3, axis=1).ravel()
        cols = np.tile(t, (1, 3)).ravel()
        n = len(self.vertices)
        return sp.csr_matrix((M.ravel(), (rows, cols)), shape=(n, n))

    def export_text(self):
        lines = [f"# bolza quotient mesh level {self.level}",
                 f"vertices {len(self.vertices)}"]
        for i, v in enumerate(self.vertices):
            lines.append(f"{i} {v.real:.17g} {v.imag:.17g} {self.dof[i]}")
        lines.append(f"triangles {self.n_triangles}")
        for i, t in enumerate(self.triangles):
            lines.append(f"{i} {t[0]} {t[1]} {t[2]}")
        glue = self.boundary_gluing
        lines.append(f"gluing {len(glue)}")
        for v, (r, T) in sorted(glue.items()):
            lines.append(f"{v} {r} {T.a.real:.17g} {T.a.imag:.17g} {T.b.real:.17g} {T.b.imag:.17g}")
        return "\n".join(lines) + "\n"


def conformal_weight(tensors):
    """``adj(M) / sqrt(det M)`` per triangle; invariant under ``M -> c M``."""
    M = np.asarray(tensors, dtype=float)
    det = M[..., 0, 0] * M[..., 1, 1] - M[..., 0, 1] * M[..., 1, 0]
    if np.any(det <= 1e-12):
        raise DegenerateMetric("conformal tensor with non-positive determinant")
    adj = np.empty_like(M)
    adj[..., 0, 0] = M[..., 1, 1]
    adj[..., 1, 1] = M[..., 0, 0]
    adj[..., 0, 1] = -M[..., 0, 1]
    adj[..., 1, 0] = -M[..., 1, 0]
    return adj / np.sqrt(det)[..., None, None]


def assemble_stiffness(mesh, tensors):
    """Scalar P1 stiffness on the quotient degrees of freedom."""
    K = mesh.stiffness_vertex(tensors)
    return (mesh.P.T @ K @ mesh.P).tocsr()


def integrate(mesh, density, form="hyperbolic_area", rule="three"):
    return mesh.integrate(density, form, rule)


def _initial_fan(group):
    dom = group.domain
    verts = [0j]
    sides = [frozenset()]
    for k in range(8):
        verts.append(complex(dom.vertices[k]))
        sides.append(frozenset({k, (k + 1) % 8}))
    for k in range(8):
        verts.append(complex(dom.side_midpoints[k]))
        sides.append(frozenset({k}))
    tris = []
    for k in range(8):
        m = 9 + k
        vprev, vk = 1 + (k - 1) % 8, 1 + k
        tris.append((0, vprev, m))
        tris.append((0, m, vk))
    return verts, sides, tris


def _refine(verts, sides, tris):
    mids = {}

    def mid(i, j):
        key = (min(i, j), max(i, j))
        if key not in mids:
            verts.append(complex(geodesic_midpoint(verts[key[0]], verts[key[1]])))
            sides.append(sides[i] & sides[j])
            mids[key] = len(verts) - 1
        return mids[key]

    out = []
    for a, b, c in tris:
        ab, bc, ca = mid(a, b), mid(b, c), mid(c, a)
        out += [(a, ab, ca), (ab, b, bc), (ca, bc, c), (ab, bc, ca)]
    return out


def build_mesh(group, level):
    if level < 0:
        raise ValueError("level must be non-negative")
    verts, sides, tris = _initial_fan(group)
    for _ in range(level):
        tris = _refine(verts, sides, tris)
    verts = np.array(verts)
    n = len(verts)
    gens = group.generators
    dof = -np.ones(n, dtype=np.int64)
    ta = np.ones(n, dtype=complex)
    tb = np.zeros(n, dtype=complex)
    abel = np.zeros((n, 4), dtype=np.int64)
    corner = [i for i in range(n) if len(sides[i]) == 2]
    on_side = [i for i in range(n) if len(sides[i]) == 1]

    rep = []
    for i in range(n):
        s = sides[i]
        if not s or (len(s) == 1 and next(iter(s)) < 4):
            dof[i] = len(rep)
            rep.append(i)
    # corners: all eight are identified with vertex 1 (octagon vertex 0)
    c0 = corner[0]
    dof[c0] = len(rep)
    rep.append(c0)
    ball = enumerate_ball(group, 2 * 2.45 + 0.5)
    images = (ball.a * verts[c0] + ball.b) / (np.conj(ball.b) * verts[c0] + np.conj(ball.a))
    for i in corner[1:]:
        j = int(np.argmin(np.abs(images - verts[i])))
        assert abs(images[j] - verts[i]) < 1e-10
        dof[i] = dof[c0]
        ta[i], tb[i], abel[i] = ball.a[j], ball.b[j], ball.abel[j]
    # side j in 4..7 is the image of side j-4 under g_j
    by_side = {k: [i for i in on_side if k in sides[i]] for k in range(4)}
    for i in on_side:
        j = next(iter(sides[i]))
        if j < 4:
            continue
        g = gens[j]
        partner = g.inverse()(verts[i])
        cand = by_side[j - 4]
        dist = np.abs(verts[cand] - partner)
        r = cand[int(np.argmin(dist))]
        assert dist.min() < 1e-10
        dof[i] = dof[r]
        ta[i], tb[i] = g.a, g.b
        abel[i, j - 4] = -1
    return QuotientMesh(
        vertices=verts,
        triangles=np.array(tris, dtype=np.int64),
        dof=dof,
        rep=np.array(rep, dtype=np.int64),
        transform_a=ta,
        transform_b=tb,
        abel=abel,
        sides=sides,
        level=level,
        group=group,
    )
