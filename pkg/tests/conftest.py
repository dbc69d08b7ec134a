import numpy as np
import pytest

from tubal import _backend

ACCEPTANCE_LINES = []


@pytest.fixture
def rng():
    return np.random.default_rng(20240131)


@pytest.fixture(params=["numpy", "numba"])
def backend(request):
    if request.param == "numba" and not _backend.HAVE_NUMBA:
        pytest.skip("numba not installed")
    previous = _backend.get_backend()
    _backend.set_backend(request.param)
    yield request.param
    _backend.set_backend(previous)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
