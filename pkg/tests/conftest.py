import numpy as np
import pytest

import nuggetgp
from nuggetgp import _backend

ACCEPTANCE_LINES = []


@pytest.fixture(params=_backend.available())
def backend(request):
    """Run a test once per available kernel backend."""
    previous = _backend.get_backend()
    _backend.set_backend(request.param)
    yield request.param
    _backend.set_backend(previous)


@pytest.fixture
def rng():
    return np.random.default_rng(20100101)


def equidistant(n):
    return np.arange(n) / (n - 1)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section(f"acceptance criteria (backend: {nuggetgp.get_backend()})")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
