"""Run configuration, lazily built lab objects and the on-disk cache."""
import dataclasses
import hashlib
import io
import json
import os
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import __version__
from .deformation import Chart
from .errors import CacheCorrupt, ConfigInvalid
from .fuchsian import bolza_group, enumerate_ball
from .mesh import build_mesh
from .quaddiff import QuadraticDifferential, TAYLOR_TERMS, basis as build_basis, seed_series, SEED_ORDER

CACHE_ENV = "BOLZAWP_CACHE_DIR"


@dataclass(frozen=True)
class RunConfig:
    mesh_level: int = 5
    series_radius: float = 12.0
    chart_radius_override: float = None
    fd_step: float = None
    solver_tol: float = 1e-12
    target: str = "hyperbolic"
    periods: tuple = ((1, 0), (0, 0), (0, 0), (0, 0))
    grid: dict = field(default_factory=lambda: {"axis": 0, "n": 5, "radius": 0.5})
    cache_dir: str = None
    seed: int = 0
    thread_count: int = 1
    psh_points: int = 5
    cs_directions: int = 20

    def __post_init__(self):
        self.validate()

    def validate(self):
        def bad(msg):
            raise ConfigInvalid(msg)
        if not isinstance(self.mesh_level, int) or not 0 <= self.mesh_level <= 7:
            bad("mesh_level must be an integer in 0..7")
        if not 10 <= float(self.series_radius) <= 14:
            # the suite also uses radius R - 2, and series need R >= 8
            bad("series_radius must lie in [10, 14]")
        if self.chart_radius_override is not None and not 0 < self.chart_radius_override:
            bad("chart_radius_override must be positive")
        if self.fd_step is not None and not 0 < self.fd_step < 0.05:
            bad("fd_step must lie in (0, 0.05)")
        if not 0 < self.solver_tol < 1e-3:
            bad("solver_tol must lie in (0, 1e-3)")
        if self.target not in ("hyperbolic", "torus"):
            bad("target must be 'hyperbolic' or 'torus'")
        p = self.periods
        if len(p) != 4 or any(len(c) != 2 or any(int(x) != x for x in c) for c in p):
            bad("periods must be four integer pairs")
        g = self.grid
        if set(g) - {"axis", "n", "radius"} or not 0 <= int(g.get("axis", 0)) <= 2 or int(g.get("n", 1)) < 1:
            bad("grid needs axis in 0..2, n >= 1 and radius (a fraction of r_max)")
        if not isinstance(self.seed, int):
            bad("seed must be an integer")
        if self.thread_count < 1 or self.psh_points < 1 or self.cs_directions < 1:
            bad("thread_count, psh_points and cs_directions must be positive")

    @classmethod
    def from_dict(cls, d):
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise ConfigInvalid(f"unknown config keys: {sorted(unknown)}")
        d = dict(d)
        if "periods" in d:
            d["periods"] = tuple(tuple(c) for c in d["periods"])
        try:
            return cls(**d)
        except TypeError as exc:
            raise ConfigInvalid(str(exc)) from None

    @classmethod
    def from_file(cls, path):
        try:
            with open(path) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigInvalid(f"cannot read config {path}: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigInvalid("config file must hold a JSON object")
        return cls.from_dict(data)

    def replace(self, **kw):
        d = self.to_dict()
        d.update({k: v for k, v in kw.items() if v is not None})
        return RunConfig.from_dict(d)

    def to_dict(self):
        d = dataclasses.asdict(self)
        d["periods"] = [list(c) for c in self.periods]
        return d

    def resolved_cache_dir(self):
        return os.environ.get(CACHE_ENV) or self.cache_dir

    def digest(self):
        d = self.to_dict()
        d.pop("cache_dir")
        d.pop("thread_count")
        return hashlib.sha256(canonical_json(d).encode()).hexdigest()[:16]

    def complex_periods(self):
        return np.array([complex(a, b) for a, b in self.periods])


def canonical_json(obj):
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=True)


class Cache:
    """Digest-keyed ``.npz`` files with a JSON provenance header."""

    def __init__(self, root):
        self.root = root
        if root:
            os.makedirs(root, exist_ok=True)

    @staticmethod
    def key(kind, **meta):
        blob = canonical_json({"kind": kind, "version": __version__, **meta})
        return kind + "-" + hashlib.sha256(blob.encode()).hexdigest()[:20]

    def _path(self, key):
        return os.path.join(self.root, key + ".npz")

    def load(self, key):
        if not self.root or not os.path.exists(self._path(key)):
            return None
        try:
            with np.load(self._path(key), allow_pickle=False) as f:
                header = json.loads(str(f["header"]))
                arrays = {k: f[k] for k in f.files if k != "header"}
        except Exception as exc:
            raise CacheCorrupt(f"unreadable cache entry {key}: {exc}") from None
        if header.get("key") != key or header.get("digest") != _array_digest(arrays):
            raise CacheCorrupt(f"digest mismatch in cache entry {key}")
        return arrays

    def store(self, key, meta, **arrays):
        if not self.root:
            return
        header = {"key": key, "meta": meta, "digest": _array_digest(arrays), "version": __version__}
        buf = io.BytesIO()
        np.savez(buf, header=np.array(canonical_json(header)), **arrays)
        tmp = self._path(key) + ".tmp"
        with open(tmp, "wb") as fh:
            fh.write(buf.getvalue())
        os.replace(tmp, self._path(key))


def _array_digest(arrays):
    h = hashlib.sha256()
    for k in sorted(arrays):
        a = np.ascontiguousarray(arrays[k])
        h.update(k.encode())
        h.update(str(a.dtype).encode())
        h.update(str(a.shape).encode())
        h.update(a.tobytes())
    return h.hexdigest()


class Lab:
    """Objects shared across subcommands, built on first use."""

    def __init__(self, config):
        self.config = config
        self.cache = Cache(config.resolved_cache_dir())
        self._meshes = {}
        self._balls = {}
        self._seeds = {}
        self._bases = {}

    @cached_property
    def group(self):
        return bolza_group()

    def mesh(self, level=None):
        level = self.config.mesh_level if level is None else level
        if level not in self._meshes:
            self._meshes[level] = build_mesh(self.group, level)
        return self._meshes[level]

    def ball(self, radius=None):
        radius = float(self.config.series_radius if radius is None else radius)
        if radius not in self._balls:
            self._balls[radius] = enumerate_ball(self.group, radius)
        return self._balls[radius]

    def seeds(self, radius=None):
        """Series of the five seed monomials (Taylor data cached on disk)."""
        radius = float(self.config.series_radius if radius is None else radius)
        if radius not in self._seeds:
            ball = self.ball(radius)
            key = Cache.key("seeds", radius=radius, terms=TAYLOR_TERMS, degrees=list(SEED_ORDER))
            hit = self.cache.load(key)
            if hit is not None:
                qs = [QuadraticDifferential(ball, c, t) for c, t in zip(_monomials(), hit["taylor"])]
            else:
                qs = seed_series(ball, SEED_ORDER)
                self.cache.store(key, {"radius": radius}, taylor=np.stack([q.taylor() for q in qs]))
            self._seeds[radius] = qs
        return self._seeds[radius]

    def basis(self, level=None, radius=None):
        level = self.config.mesh_level if level is None else level
        radius = float(self.config.series_radius if radius is None else radius)
        k = (level, radius)
        if k not in self._bases:
            self._bases[k] = build_basis(self.group, radius, self.mesh(level), ball=self.ball(radius),
                                         seeds=self.seeds(radius))
        return self._bases[k]

    @cached_property
    def chart(self):
        return Chart(self.basis(), self.mesh(), self.config.chart_radius_override)

    def fd_step(self):
        return self.config.fd_step if self.config.fd_step is not None else 1e-2 * self.chart.r_max

    def provenance(self):
        b = self.basis()
        return {
            "mesh_level": self.config.mesh_level,
            "series_radius": self.config.series_radius,
            "ball_size": len(self.ball()),
            "seeds": list(b.seeds),
            "basis_scale": b.scale,
            "r_max": self.chart.r_max,
            "fd_step": self.fd_step(),
            "norm_convention": "sesquilinear |X|^2 = <X, conj X>",
        }


def _monomials():
    out = []
    for k in SEED_ORDER:
        c = np.zeros(k + 1, dtype=complex)
        c[-1] = 1.0
        out.append(c)
    return out
