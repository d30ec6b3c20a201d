import warnings

import numpy as np
import pytest

from uaggregation.synthgen import Law, SynthConfig, generate

# filled by tests/test_acceptance.py, echoed after the run
ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])


@pytest.fixture
def quiet():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        yield


@pytest.fixture
def hetero_small():
    return generate(SynthConfig(n=400, d=60, omega=0.3, seed=11))


@pytest.fixture
def zero_noise():
    return generate(SynthConfig(n=1000, d=100, omega=0.3, sigma_law=Law("constant", (0,)), seed=5))


def rank_one(u, v):
    return np.outer(np.asarray(u, float), np.asarray(v, float))
