"""Acceptance criteria at desk scale (mesh level 5, series radius 12).

Each check re-reads the measured numbers from the verification report and
applies the tolerances itself.  Run ``python tests/test_acceptance.py`` to get
only the one-line-per-criterion summary.
"""
import json
import shutil
import sys
import time

import numpy as np
import pytest

from bolzawp.cli import main as cli_main
from bolzawp.pipeline import RunConfig
from bolzawp.verify import run_verification

try:
    from conftest import ACCEPTANCE_LINES
except ImportError:  # run as a script
    ACCEPTANCE_LINES = []

SMALL = ["--level", "4", "--series-radius", "10", "--out"]


def _line(number, name, ok, detail):
    text = f"[{'PASS' if ok else 'FAIL'}] {number:2d} {name}: {detail}"
    ACCEPTANCE_LINES.append(text)
    print(text)
    return ok


@pytest.fixture(scope="module")
def report():
    t0 = time.perf_counter()
    rep = run_verification(RunConfig())
    data = json.loads(rep.to_json())
    data["_seconds"] = time.perf_counter() - t0
    data["_by_name"] = {r["name"]: r for r in data["criteria"]}
    return data


def _cx(a):
    a = np.asarray(a, dtype=float)
    return a[..., 0] + 1j * a[..., 1]


def check_1(report):
    r = report["_by_name"]["gauss_bonnet_area"]
    err = abs(r["details"]["area"] - 4 * np.pi) / (4 * np.pi)
    ok = err < 1e-3 and r["details"]["seconds_below_10"]
    return _line(1, "Gauss-Bonnet area", ok, f"rel err {err:.2e} < 1e-3, runtime < 10 s: {r['details']['seconds_below_10']}")


def check_2(report):
    d = report["_by_name"]["ks_harmonicity"]["details"]
    worst = max(d["R=12"])
    ok = worst < 1e-4 and all(b <= 2 * a for a, b in zip(d["R=10"], d["R=12"]))
    return _line(2, "Kodaira-Spencer harmonicity", ok, f"max residual {worst:.2e} < 1e-4, non-increasing 10->12 (2x noise)")


def check_3(report):
    m = report["_by_name"]["wp_gram"]["measured"]
    ok = (m["hermitian_defect"] < 1e-12 and m["min_eig"] > 0 and m["off_diagonal"] < 1e-2
          and m["mesh_change"] < 1e-3 and m["radius_change"] < 1e-2)
    return _line(3, "WP Gram", ok, f"off-diag {m['off_diagonal']:.1e}, mesh 4->5 {m['mesh_change']:.1e}, "
                                   f"radius 10->12 {m['radius_change']:.1e}, min eig {m['min_eig']:.3f}")


def check_4(report):
    m = report["_by_name"]["identity_critical_point"]["measured"]
    ok = m["gradient_norm_over_E"] < 1e-8 and m["fd_dE_over_E"] < 1e-4
    return _line(4, "identity critical point", ok,
                 f"|grad|/E {m['gradient_norm_over_E']:.1e} < 1e-8, |dE|/E {m['fd_dE_over_E']:.1e} < 1e-4")


def _fro(a, b):
    return float(np.linalg.norm(a - b) / np.linalg.norm(b))


def check_5(report):
    d = report["_by_name"]["fischer_tromba"]["details"]
    err = _fro(_cx(d["levi"]), _cx(d["2G"]))
    return _line(5, "Fischer-Tromba Levi(E) = 2 G", err < 0.05, f"rel Frobenius {err:.2e} < 0.05")


def check_6(report):
    G = _cx(report["_by_name"]["fischer_tromba"]["details"]["2G"]) / 2
    err = _fro(_cx(report["_by_name"]["log_energy_wp"]["details"]["levi"]), G / (2 * np.pi))
    return _line(6, "Levi(log E) = G / 2pi", err < 0.05, f"rel Frobenius {err:.2e} < 0.05")


def check_7(report):
    r = report["_by_name"]["constant_density"]
    dev, mean, E = r["measured"]["deviation"], r["details"]["mean"], r["details"]["energy"]
    err = abs(mean - E / (4 * np.pi))
    ok = dev < 1e-6 and err < 1e-3
    return _line(7, "constant energy density", ok, f"deviation {dev:.1e} < 1e-6, |mean - E/4pi| {err:.1e} < 1e-3")


def check_8(report):
    d = report["_by_name"]["first_variation"]["details"]
    rel = np.abs(_cx(d["formula"]) - _cx(d["fd"])) / np.abs(_cx(d["fd"]))
    return _line(8, "first variation (torus)", bool(rel.max() < 0.01), f"max rel err {rel.max():.2e} < 0.01")


def check_9(report):
    d = report["_by_name"]["second_variation"]["details"]
    h, t = d["hyperbolic"]["relative_error"], d["torus"]["relative_error"]
    ok = h < 0.05 and t < 0.05 and d["torus"]["curvature_term_max"] == 0.0
    return _line(9, "second variation", ok, f"hyperbolic {h:.1e}, torus {t:.1e} < 0.05; torus curvature term "
                                            f"{d['torus']['curvature_term_max']}")


def check_10(report):
    d = report["_by_name"]["plurisubharmonicity"]["details"]
    ok = True
    worst = np.inf
    for tgt in ("hyperbolic", "torus"):
        rows = d[tgt]
        ok = ok and len(rows) >= 5
        for r in rows:
            ok = ok and r["min_eig_logE"] >= -r["eps_logE"] and r["min_eig_E"] >= -r["eps_E"] \
                and r["max_eig_invE"] <= r["eps_invE"]
            worst = min(worst, r["min_eig_logE"] + r["eps_logE"])
    r0 = d["hyperbolic"][0]
    strict = max(abs(x) for x in np.ravel(r0["z"])) == 0 and r0["min_eig_logE"] > r0["eps_logE"]
    return _line(10, "plurisubharmonicity", ok and strict,
                 f"{len(d['hyperbolic'])}+{len(d['torus'])} points, min(eig log E + eps) {worst:.2e} >= 0, "
                 f"strict at z=0: {strict}")


def check_11(report):
    d = report["_by_name"]["cauchy_schwarz"]["details"]
    worst = max(d["ratios"])
    ok = d["n_directions"] >= 20 and worst <= 1 + 1e-6
    return _line(11, "Cauchy-Schwarz (torus)", ok, f"max lhs/rhs {worst:.3f} <= 1 + 1e-6 over {d['n_directions']} directions")


def check_12(report):
    r = report["_by_name"]["curvature"]
    m = r["measured"]
    ok = (r["details"]["planes"] >= 1000 and m["max_K_hyperbolic"] < 0 and m["max_abs_K_flat"] == 0
          and m["symmetry_defect"] < 1e-10 and m["bianchi_defect"] < 1e-10)
    return _line(12, "curvature", ok, f"max K_C {m['max_K_hyperbolic']:.3f} < 0 on {r['details']['planes']} planes, "
                                      f"flat 0, symmetries {m['symmetry_defect']:.0e}")


def check_13(tmp):
    # cold cache, warm cache, then cold again; the cache path is part of the config
    outs = []
    for k in range(3):
        if k == 2:
            shutil.rmtree(f"{tmp}/cache")
        out = f"{tmp}/report{k}.json"
        code = cli_main(["verify", *SMALL, out, "--cache-dir", f"{tmp}/cache"])
        outs.append((code, open(out, "rb").read()))
    same = outs[0][1] == outs[1][1] == outs[2][1]
    ok = same and all(c == 0 for c, _ in outs)
    return _line(13, "reproducibility", ok, "verify reports byte-identical (cold, warm, cold cache)" if same
                 else "verify reports differ")


@pytest.mark.parametrize("number", range(1, 13))
def test_criterion(report, number):
    assert globals()[f"check_{number}"](report)


def test_criterion_13_reproducibility(tmp_path):
    assert check_13(str(tmp_path))


def test_overall_runtime(report):
    # full verification at desk scale must finish within ten minutes
    assert report["_seconds"] < 600
    assert report["overall"] == "pass"


if __name__ == "__main__":
    import tempfile
    data = json.loads(run_verification(RunConfig()).to_json())
    data["_by_name"] = {r["name"]: r for r in data["criteria"]}
    results = [globals()[f"check_{k}"](data) for k in range(1, 13)]
    with tempfile.TemporaryDirectory() as tmp:
        results.append(check_13(tmp))
    sys.exit(0 if all(results) else 1)
