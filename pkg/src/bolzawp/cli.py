"""Command-line entry point: ``bolzawp <subcommand> [options]``.

Exit codes: 0 success (or all criteria pass), 1 criterion failure,
2 configuration or runtime error.
"""
import argparse
import csv
import io
import json
import sys

import numpy as np

from .errors import BolzaError, ConfigInvalid
from .pipeline import CACHE_ENV, Cache, Lab, RunConfig
from .verify import _num

EXIT_OK, EXIT_FAIL, EXIT_ERROR = 0, 1, 2


def parse_z(text, m=3):
    """``"0.01,0.02j,0"`` -> complex array of length ``m``."""
    try:
        z = np.array([complex(p.replace(" ", "")) for p in text.split(",")])
    except ValueError:
        raise ConfigInvalid(f"cannot parse chart point {text!r}") from None
    if len(z) != m:
        raise ConfigInvalid(f"chart point needs {m} coordinates")
    return z


def _emit(text, out):
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _dump(obj):
    return json.dumps(_num(obj), sort_keys=True, indent=2) + "\n"


def cmd_surface_info(lab, args):
    from .fuchsian import CIRCUMRADIUS, SYSTOLE
    g = lab.group
    ball = lab.ball()
    return {
        "genus": g.genus,
        "generators": [[t.a, t.b] for t in g.generators],
        "relation": list(g.relation),
        "relation_residual": g.relation_residual(),
        "systole": SYSTOLE,
        "translation_lengths": [t.translation_length() for t in g.generators],
        "octagon_vertices": g.domain.vertices,
        "vertex_distance": CIRCUMRADIUS,
        "angle_sum": g.domain.angle_sum,
        "series_radius": lab.config.series_radius,
        "ball_size": len(ball),
    }, EXIT_OK


def cmd_mesh_info(lab, args):
    m = lab.mesh()
    area = m.integrate(1.0, "hyperbolic_area")
    if args.export:
        with open(args.export, "w") as fh:
            fh.write(m.export_text())
    return {
        "level": m.level,
        "vertices": len(m.vertices),
        "triangles": m.n_triangles,
        "dofs": m.n_dofs,
        "euler_characteristic": m.euler_characteristic(),
        "area": area,
        "area_relative_error": abs(area - 4 * np.pi) / (4 * np.pi),
        "min_angle": m.min_angle(),
        "gluing_residual": m.gluing_residual(),
    }, EXIT_OK


def cmd_wp_gram(lab, args):
    from .quaddiff import BeltramiDifferential, gram_matrix, holomorphy_residual, tail_estimate, wp_gram
    from .verify import sample_points
    cfg = lab.config
    b = lab.basis()
    G = wp_gram(b.beltrami, lab.mesh()).matrix
    pts = sample_points(32, cfg.seed)
    R = cfg.series_radius
    coarse = lab.seeds(R - 2)
    table = []
    for lev in sorted({max(cfg.mesh_level - 1, 0), cfg.mesh_level}):
        for r in (R - 2, R):
            bel = [BeltramiDifferential(lab.seeds(r)[k]) for k in b.seeds]
            table.append({"level": lev, "radius": r, "raw_gram": gram_matrix(bel, lab.mesh(lev))})
    return {
        "gram": G,
        "eigenvalues": np.linalg.eigvalsh(G),
        "seeds": list(b.seeds),
        "seed_gram": b.seed_gram,
        "sup_mu": b.sup_norms,
        "r_max": lab.chart.r_max,
        "holomorphy_residual": [holomorphy_residual(x, pts) for x in b.beltrami],
        "automorphy_residual": [lab.seeds()[k].automorphy_residual(pts, lab.group.generators) for k in b.seeds],
        "tail": [tail_estimate(lab.seeds()[k], coarse[k], pts, lab.group.generators) for k in b.seeds],
        "convergence": table,
        "provenance": lab.provenance(),
    }, EXIT_OK


def _solve(lab, z, target, tol):
    from .curvature import FlatTorus, Hyperbolic
    from .harmonic import MapField, identity_map, solve_hyperbolic, solve_torus
    cfg = lab.config
    s = lab.chart.structure_at(z)
    key = Cache.key("map", level=cfg.mesh_level, radius=cfg.series_radius, target=target,
                    periods=cfg.to_dict()["periods"], z=_num(z), tol=tol)
    hit = lab.cache.load(key)
    if hit is not None:
        tgt = FlatTorus() if target == "torus" else Hyperbolic()
        periods = cfg.complex_periods() if target == "torus" else None
        mf = MapField(lab.mesh(), tgt, hit["values"], periods)
        mf.info.update(iterations=int(hit["iterations"]), cached=True)
    else:
        if target == "torus":
            mf = solve_torus(s, cfg.complex_periods())
        else:
            mf = solve_hyperbolic(s, identity_map(lab.mesh()), tol=tol)[0]
        lab.cache.store(key, {"z": _num(z), "target": target, "config": cfg.digest()},
                        values=mf.values, iterations=np.array(mf.info.get("iterations", 0)))
    return mf, s, key


def cmd_harmonic_solve(lab, args):
    from .harmonic import energy, harmonic_residual
    z = parse_z(args.z, lab.chart.m)
    tol = lab.config.solver_tol
    mf, s, key = _solve(lab, z, lab.config.target, tol)
    return {
        "z": z,
        "target": lab.config.target,
        "energy": energy(mf, s),
        "residual": harmonic_residual(mf, s),
        "iterations": mf.info.get("iterations"),
        "cache_key": key,
        "provenance": lab.provenance(),
    }, EXIT_OK


def grid_points(lab):
    g = lab.config.grid
    frac = float(g.get("radius", 0.5))
    if not 0 <= frac <= 1:
        raise ConfigInvalid("grid radius is a fraction of r_max and must lie in [0, 1]")
    n = int(g.get("n", 5))
    e = np.zeros(lab.chart.m, complex)
    e[int(g.get("axis", 0))] = 1.0
    ts = np.linspace(-frac, frac, n) if n > 1 else np.array([0.0])
    return [t * lab.chart.r_max * e for t in ts]


def cmd_energy_scan(lab, args):
    from .variation import EnergySurvey
    pts = grid_points(lab)
    cfg = lab.config
    S = EnergySurvey(lab.chart, cfg.target, periods=tuple(cfg.complex_periods()), tol=cfg.solver_tol)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["# config_digest=" + cfg.digest()])
    w.writerow(["z1", "z2", "z3", "energy", "residual"])
    for z in pts:
        E = S.energy(z)
        res = S.solve(z).info.get("residual")
        w.writerow([f"{x.real + 0.0:.12g}{x.imag + 0.0:+.12g}j" for x in z] + [f"{E:.15g}", f"{res:.6g}"])
    return buf.getvalue(), EXIT_OK


def cmd_levi(lab, args):
    from .variation import EnergySurvey
    cfg = lab.config
    z = parse_z(args.z, lab.chart.m)
    S = EnergySurvey(lab.chart, cfg.target, periods=tuple(cfg.complex_periods()), tol=cfg.solver_tol,
                     h=lab.fd_step())
    L = S.levi(z, args.function)
    return {"z": z, "function": args.function, "target": cfg.target, "matrix": L.matrix, "error": L.error,
            "error_bar": L.error_bar, "h": L.h, "eigenvalues": L.eigenvalues(),
            "provenance": lab.provenance()}, EXIT_OK


def cmd_verify(lab, args):
    from .verify import run_verification
    progress = (lambda r: print(f"[{r.status.upper():4s}] {r.name}", file=sys.stderr, flush=True)) if args.verbose else None
    rep = run_verification(lab.config, progress=progress)
    return rep.to_json(), EXIT_OK if rep.passed else EXIT_FAIL


COMMANDS = {
    "surface-info": cmd_surface_info,
    "mesh-info": cmd_mesh_info,
    "wp-gram": cmd_wp_gram,
    "harmonic-solve": cmd_harmonic_solve,
    "energy-scan": cmd_energy_scan,
    "levi": cmd_levi,
    "verify": cmd_verify,
}


def build_parser():
    p = argparse.ArgumentParser(prog="bolzawp", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with RunConfig keys")
    common.add_argument("--level", dest="mesh_level", type=int)
    common.add_argument("--series-radius", type=float)
    common.add_argument("--chart-radius", dest="chart_radius_override", type=float)
    common.add_argument("--fd-step", type=float)
    common.add_argument("--tol", dest="solver_tol", type=float)
    common.add_argument("--target", choices=["hyperbolic", "torus"])
    common.add_argument("--cache-dir", help=f"cache directory (overridden by ${CACHE_ENV})")
    common.add_argument("--seed", type=int)
    common.add_argument("--threads", dest="thread_count", type=int)
    common.add_argument("--out", help="write the artifact here instead of stdout")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp_ = sub.add_parser(name, parents=[common])
        if name in ("harmonic-solve", "levi"):
            sp_.add_argument("--z", default="0,0,0", help="chart point, e.g. '0.01,0.02j,0'")
        if name == "levi":
            sp_.add_argument("--function", choices=["E", "logE", "invE"], default="E")
        if name == "mesh-info":
            sp_.add_argument("--export", help="write the mesh in text form to this file")
        if name == "verify":
            sp_.add_argument("--verbose", action="store_true", help="print criterion results to stderr")
    return p


_CONFIG_FLAGS = ("mesh_level", "series_radius", "chart_radius_override", "fd_step", "solver_tol", "target",
                 "cache_dir", "seed", "thread_count")


def resolve_config(args):
    cfg = RunConfig.from_file(args.config) if args.config else RunConfig()
    return cfg.replace(**{k: getattr(args, k, None) for k in _CONFIG_FLAGS})


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
        lab = Lab(cfg)
        result, code = COMMANDS[args.command](lab, args)
        if not isinstance(result, str):
            result = _dump({"config": cfg.to_dict(), "config_digest": cfg.digest(), **result})
        _emit(result, args.out)
        return code
    except (BolzaError, ValueError, OSError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
