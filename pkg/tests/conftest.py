import numpy as np
import pytest

from fdrecycle.channel import convolution_matrices, exp_pdp, sample_taps
from fdrecycle.ofdm import OfdmGrid


@pytest.fixture
def grid():
    return OfdmGrid(64, 16)


@pytest.fixture
def small_grid():
    return OfdmGrid(8, 2)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_pair(rng, grid, l=None, decay=2.0):
    """A random multipath channel whose delay spread fills the CP."""
    l = grid.cp_len if l is None else l
    taps = sample_taps(exp_pdp(l, decay), rng)
    return convolution_matrices(taps, grid.block_len), taps


def random_pd(rng, n, floor=0.1):
    x = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return x @ x.conj().T + floor * np.eye(n)


# one line per acceptance criterion, filled by test_acceptance.py
ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])
