import numpy as np
import pytest

from relaycs.arrays import build_dictionary, sine_grid


def small_dicts(n_bs=4, n_ms=3, g_bs=None, g_ms=None):
    return (
        build_dictionary(n_bs, sine_grid(g_bs or n_bs)),
        build_dictionary(n_ms, sine_grid(g_ms or n_ms)),
    )


def crandn(rng, *shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def full_dicts():
    return build_dictionary(64, sine_grid(64)), build_dictionary(32, sine_grid(32))


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def acceptance_lines():
    return ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
