import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose, assert_array_equal

from fdrecycle.ofdm import (
    OfdmGrid,
    cp_insertion,
    cp_removal,
    dft_matrix,
    ofdm_modulate,
    reduced_selector,
    subcarrier_selector,
)


def test_dft_single_point():
    assert_array_equal(dft_matrix(1), [[1.0]])


def test_dft_entry_matches_formula():
    # entry (2,2) one-based is exp(-j*pi/2)/2
    assert_allclose(dft_matrix(4)[1, 1], -0.5j, atol=1e-15)


@pytest.mark.parametrize("n", [1, 2, 7, 64, 256])
def test_dft_unitary(n):
    f = dft_matrix(n)
    assert np.abs(f @ f.conj().T - np.eye(n)).max() <= 1e-12


def test_dft_matches_numpy_fft(rng):
    x = rng.standard_normal(16) + 1j * rng.standard_normal(16)
    assert_allclose(dft_matrix(16) @ x, np.fft.fft(x, norm="ortho"), atol=1e-12)


def test_dft_rejects_nonpositive():
    with pytest.raises(ValueError):
        dft_matrix(0)


def test_cp_insertion_layout():
    a = cp_insertion(OfdmGrid(4, 2))
    expected = np.zeros((6, 4))
    expected[0, 2] = expected[1, 3] = 1
    expected[2:, :] = np.eye(4)
    assert_array_equal(a, expected)
    assert np.all(a.sum(axis=1) == 1)


def test_cp_insertion_gram(grid):
    a = cp_insertion(grid)
    d = np.zeros(grid.n_subcarriers)
    d[-grid.cp_len:] = 1
    assert_array_equal(a.T @ a, np.eye(grid.n_subcarriers) + np.diag(d))
    assert a.shape == (80, 64)


def test_cp_removal_layout():
    b = cp_removal(OfdmGrid(4, 2))
    assert_array_equal(b, np.hstack([np.zeros((4, 2)), np.eye(4)]))
    assert cp_removal(OfdmGrid(64, 16)).shape == (64, 80)


def test_cp_is_transparent(grid, rng):
    u = rng.standard_normal(64) + 1j * rng.standard_normal(64)
    f = dft_matrix(64)
    x = f.conj().T @ u
    assert_allclose(cp_removal(grid) @ cp_insertion(grid) @ x, x, atol=1e-14)


def test_selector_small_case():
    g = OfdmGrid(4, 2, set_1=(0, 1))
    assert_array_equal(subcarrier_selector(g, 1), np.diag([1.0, 1, 0, 0]))


def test_selectors_partition(grid):
    d1, d2 = subcarrier_selector(grid, 1), subcarrier_selector(grid, 2)
    assert_array_equal(d1 + d2, np.eye(64))
    assert_array_equal(d1 @ d2, np.zeros((64, 64)))


def test_reduced_selector_rows():
    g = OfdmGrid(4, 2, set_1=(1, 3))
    assert_array_equal(reduced_selector(g, 1), np.eye(4)[[1, 3]])


@pytest.mark.parametrize("which", [1, 2])
def test_reduced_selector_identities(grid, which):
    dt = reduced_selector(grid, which)
    assert dt.shape == (32, 64)
    assert_array_equal(dt @ dt.T, np.eye(32))
    assert_array_equal(dt.T @ dt, subcarrier_selector(grid, which))


@settings(max_examples=30, deadline=None)
@given(st.sets(st.integers(0, 11), min_size=1, max_size=11))
def test_any_partition_gives_consistent_selectors(s1):
    g = OfdmGrid(12, 3, set_1=tuple(s1))
    for which in (1, 2):
        dt = reduced_selector(g, which)
        assert_array_equal(dt.T @ dt, subcarrier_selector(g, which))
        assert_array_equal(dt @ dt.T, np.eye(g.size(which)))


def test_default_split_is_halves(grid):
    assert grid.set_1 == tuple(range(32))
    assert grid.set_2 == tuple(range(32, 64))


@pytest.mark.parametrize("kwargs", [
    dict(n_subcarriers=4, cp_len=4),
    dict(n_subcarriers=4, cp_len=0),
    dict(n_subcarriers=4, cp_len=1, set_1=(0, 1), set_2=(1, 2, 3)),
    dict(n_subcarriers=4, cp_len=1, set_1=(0,), set_2=(1, 2)),
])
def test_invalid_grids_rejected(kwargs):
    with pytest.raises(ValueError):
        OfdmGrid(**kwargs)


def test_modulate_zero(grid):
    assert_array_equal(ofdm_modulate(np.zeros(64), grid), np.zeros(80))


def test_modulate_impulse_is_flat(grid):
    u = np.zeros(64)
    u[0] = np.sqrt(64)
    assert_allclose(np.abs(ofdm_modulate(u, grid)), 1.0, atol=1e-14)


def test_modulate_block_structure(grid, rng):
    u = np.zeros(64, dtype=complex)
    u[:32] = rng.standard_normal(32) + 1j * rng.standard_normal(32)
    x = ofdm_modulate(u, grid, which=1)
    f = dft_matrix(64)
    assert_allclose(x[16:], f.conj().T @ u, atol=1e-13)
    assert_allclose(x[:16], x[-16:], atol=0)
    assert_allclose(x, cp_insertion(grid) @ f.conj().T @ u, atol=1e-13)


def test_modulate_energy_adds_cp_replica(grid, rng):
    u = rng.standard_normal(64) + 1j * rng.standard_normal(64)
    x = ofdm_modulate(u, grid)
    assert_allclose(np.vdot(x, x).real, np.vdot(u, u).real + np.vdot(x[:16], x[:16]).real, rtol=1e-12)


def test_modulate_rejects_foreign_subcarriers(grid):
    u = np.zeros(64)
    u[40] = 1.0
    with pytest.raises(ValueError):
        ofdm_modulate(u, grid, which=1)
