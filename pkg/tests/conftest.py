import numpy as np
import pytest

from bolzawp.deformation import Chart
from bolzawp.fuchsian import bolza_group, enumerate_ball
from bolzawp.mesh import build_mesh
from bolzawp.quaddiff import basis, seed_series, SEED_ORDER

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def group():
    return bolza_group()


@pytest.fixture(scope="session")
def meshes(group):
    return {lev: build_mesh(group, lev) for lev in range(0, 5)}


@pytest.fixture(scope="session")
def balls(group):
    return {R: enumerate_ball(group, R) for R in (8.0, 10.0)}


@pytest.fixture(scope="session")
def seeds10(balls):
    return seed_series(balls[10.0], SEED_ORDER)


@pytest.fixture(scope="session")
def basis3(group, meshes, balls, seeds10):
    return basis(group, 10.0, meshes[3], ball=balls[10.0], seeds=seeds10)


@pytest.fixture(scope="session")
def chart3(basis3, meshes):
    return Chart(basis3, meshes[3])


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def identity_solution(chart3):
    from bolzawp.harmonic import identity_map, solve_hyperbolic
    return solve_hyperbolic(chart3.structure_at(np.zeros(3)), identity_map(chart3.mesh), tol=1e-12)
