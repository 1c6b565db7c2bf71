import numpy as np
import pytest

from risplan.environment import Building, CellConfig, Scene, SiteConfig, build_grid, generate_ris_candidates
from risplan.synthetic import demo_scene, demo_sites


def box(x0, y0, w, d, h):
    return Building(np.array([[x0, y0], [x0 + w, y0], [x0 + w, y0 + d], [x0, y0 + d]]), h)


@pytest.fixture
def scene():
    return demo_scene()


@pytest.fixture
def sites():
    return demo_sites()


@pytest.fixture
def grid(scene):
    return build_grid(scene, 5.0, 1.5)


@pytest.fixture
def candidates(scene):
    return generate_ris_candidates(scene, 3, 3, 40.0)


@pytest.fixture
def flat_scene():
    return Scene(bounds=(0.0, 0.0, 100.0, 100.0))


@pytest.fixture
def single_site():
    return [SiteConfig("S", (50.0, 50.0), 30.0, (CellConfig(frequency=3500.0),))]


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(results):
        terminalreporter.write_line(results[name])
