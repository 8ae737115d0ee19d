import numpy as np
import pytest

from bgnflow.mesh import build_initial_mesh, circle_curve, ellipse_curve


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture(params=[1, 2, 3], ids=lambda k: f"k{k}")
def degree(request):
    return request.param


@pytest.fixture
def ellipse_mesh(degree):
    return build_initial_mesh(ellipse_curve, 16, degree)


@pytest.fixture
def circle_mesh(degree):
    return build_initial_mesh(circle_curve(), 16, degree)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[number])
