import json

import numpy as np
import pytest

from bolzawp.errors import CacheCorrupt, ConfigInvalid
from bolzawp.pipeline import CACHE_ENV, Cache, Lab, RunConfig


def test_defaults():
    cfg = RunConfig()
    assert cfg.mesh_level == 5 and cfg.series_radius == 12.0
    assert cfg.target == "hyperbolic"


@pytest.mark.parametrize("bad", [
    {"mesh_level": -1}, {"mesh_level": 2.5}, {"series_radius": 6}, {"solver_tol": 0.1},
    {"target": "sphere"}, {"periods": [[1, 0]]}, {"periods": [[0.5, 0], [0, 0], [0, 0], [0, 0]]},
    {"grid": {"axis": 5}}, {"thread_count": 0}, {"fd_step": 1.0}, {"bogus": 1},
])
def test_invalid_configs(bad):
    with pytest.raises(ConfigInvalid):
        RunConfig.from_dict(bad)


def test_roundtrip_and_digest(tmp_path):
    cfg = RunConfig(mesh_level=3, series_radius=10.0, target="torus")
    p = tmp_path / "c.json"
    p.write_text(json.dumps(cfg.to_dict()))
    back = RunConfig.from_file(str(p))
    assert back == cfg and back.digest() == cfg.digest()
    # cache location and threads do not change results, so they do not enter the digest
    assert cfg.replace(cache_dir="/x", thread_count=4).digest() == cfg.digest()
    assert cfg.replace(seed=1).digest() != cfg.digest()


def test_unreadable_config(tmp_path):
    p = tmp_path / "c.json"
    p.write_text("[1, 2]")
    with pytest.raises(ConfigInvalid):
        RunConfig.from_file(str(p))
    with pytest.raises(ConfigInvalid):
        RunConfig.from_file(str(tmp_path / "missing.json"))


def test_cache_roundtrip_and_corruption(tmp_path):
    c = Cache(str(tmp_path))
    key = Cache.key("demo", a=1)
    assert c.load(key) is None
    c.store(key, {"a": 1}, x=np.arange(5.0))
    np.testing.assert_array_equal(c.load(key)["x"], np.arange(5.0))
    path = tmp_path / (key + ".npz")
    raw = bytearray(path.read_bytes())
    raw[-40:-30] = b"\x00" * 10
    path.write_bytes(bytes(raw))
    with pytest.raises(CacheCorrupt):
        c.load(key)


def test_env_overrides_cache_dir(tmp_path, monkeypatch):
    monkeypatch.setenv(CACHE_ENV, str(tmp_path))
    assert RunConfig(cache_dir="/elsewhere").resolved_cache_dir() == str(tmp_path)


def test_lab_seed_cache_is_transparent(tmp_path):
    cfg = RunConfig(mesh_level=2, series_radius=10.0, cache_dir=str(tmp_path))
    cold = Lab(cfg).basis()
    warm = Lab(cfg).basis()
    np.testing.assert_array_equal(cold.raw_gram, warm.raw_gram)
    v = np.array([0.1 + 0.2j, -0.4])
    np.testing.assert_array_equal(cold.quadratic[0](v), warm.quadratic[0](v))
