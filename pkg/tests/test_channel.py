import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose, assert_array_equal

from fdrecycle.channel import (
    LinkBudget,
    convolution_matrices,
    db_to_linear,
    dbm_to_linear,
    exp_pdp,
    freq_response,
    indoor_path_loss,
    indoor_path_loss_db,
    linear_to_dbm,
    sample_taps,
)
from fdrecycle.ofdm import OfdmGrid, cp_insertion, cp_removal, dft_matrix


def test_pdp_single_tap():
    assert_allclose(exp_pdp(0, 3.0).variances, [1.0])


def test_pdp_ratio_of_first_taps():
    v = exp_pdp(16, 2.0).variances
    assert len(v) == 17
    assert_allclose(v[1] / v[0], np.exp(-2.0), rtol=1e-14)
    assert_allclose(v.sum(), 1.0, rtol=1e-14)
    assert np.all(np.diff(v) < 0)


def test_pdp_hand_computed():
    e = np.exp(-1.0)
    assert_allclose(exp_pdp(2, 1.0).variances, np.array([1, e, e * e]) / (1 + e + e * e), rtol=1e-14)


@pytest.mark.parametrize("ratio", [0.0, -1.0])
def test_pdp_rejects_nonpositive_ratio(ratio):
    with pytest.raises(ValueError):
        exp_pdp(4, ratio)


def test_taps_reproducible():
    pdp = exp_pdp(0, 1.0)
    a = sample_taps(pdp, np.random.default_rng(7)).taps
    b = sample_taps(pdp, np.random.default_rng(7)).taps
    assert_array_equal(a, b)
    assert a.shape == (1,)


def test_tap_statistics():
    pdp = exp_pdp(3, 1.0)
    rng = np.random.default_rng(0)
    h = np.array([sample_taps(pdp, rng).taps for _ in range(100_000)])
    assert_allclose(np.mean(np.abs(h[:, 0]) ** 2), pdp.variances[0], rtol=0.02)
    # circular symmetry: no pseudo-variance
    assert abs(np.mean(h[:, 0] ** 2)) < 0.02
    cross = np.mean(h[:, 0] * h[:, 1].conj()) / np.sqrt(pdp.variances[0] * pdp.variances[1])
    assert abs(cross) < 0.02


def test_flat_channel_matrices():
    p = convolution_matrices([1.0], 5)
    assert_array_equal(p.full, np.eye(5))
    assert_array_equal(p.lower, np.eye(5))
    assert_array_equal(p.upper, np.zeros((5, 5)))


def test_two_tap_layout():
    a, b = 2.0 + 1j, -0.5
    p = convolution_matrices([a, b], 3)
    assert_array_equal(p.full, [[a, 0, b], [b, a, 0], [0, b, a]])
    expected_upper = np.zeros((3, 3), dtype=complex)
    expected_upper[0, 2] = b
    assert_array_equal(p.upper, expected_upper)
    assert_array_equal(p.lower + p.upper, p.full)


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 17), st.integers(0, 2**32 - 1))
def test_full_matrix_is_circular_convolution(n_taps, seed):
    rng = np.random.default_rng(seed)
    h = rng.standard_normal(n_taps) + 1j * rng.standard_normal(n_taps)
    x = rng.standard_normal(80) + 1j * rng.standard_normal(80)
    p = convolution_matrices(h, 80)
    oracle = np.fft.ifft(np.fft.fft(h, 80) * np.fft.fft(x))
    assert np.abs(p.full @ x - oracle).max() <= 1e-10
    assert_array_equal(p.lower + p.upper, p.full)
    assert np.all(np.triu(p.lower, 1) == 0)
    assert np.all(np.tril(p.upper) == 0)


def test_column_energy_equals_tap_energy(rng):
    h = sample_taps(exp_pdp(16, 2.0), rng).taps
    p = convolution_matrices(h, 80)
    assert_allclose(np.sum(np.abs(p.full) ** 2, axis=0), np.sum(np.abs(h) ** 2), rtol=1e-12)


def test_too_many_taps_rejected():
    with pytest.raises(ValueError):
        convolution_matrices(np.ones(6), 5)
    with pytest.raises(ValueError):
        freq_response(np.ones(9), OfdmGrid(8, 2))


def test_freq_response_examples():
    assert_allclose(freq_response([1.0], OfdmGrid(8, 2)), np.ones(8))
    assert_allclose(freq_response([0.5, 0.5], OfdmGrid(2, 1)), [1.0, 0.0], atol=1e-15)


def test_freq_response_definition_and_parseval(grid, rng):
    h = sample_taps(exp_pdp(16, 2.0), rng).taps
    ht = freq_response(h, grid)
    padded = np.concatenate([h, np.zeros(64 - 17)])
    assert_allclose(ht, np.sqrt(64) * dft_matrix(64) @ padded, atol=1e-12)
    assert_allclose(np.sum(np.abs(ht) ** 2) / 64, np.sum(np.abs(h) ** 2), rtol=1e-12)


def test_ofdm_diagonalises_causal_part(grid, rng):
    h = sample_taps(exp_pdp(16, 2.0), rng).taps
    p = convolution_matrices(h, grid.block_len)
    f = dft_matrix(64)
    m = f @ cp_removal(grid) @ p.lower @ cp_insertion(grid) @ f.conj().T
    assert np.abs(m - np.diag(freq_response(h, grid))).max() <= 1e-10


def test_path_loss_values():
    assert_allclose(indoor_path_loss_db(1.8e9, 10), 20 * np.log10(1800) + 20 - 28, rtol=1e-14)
    assert_allclose(indoor_path_loss_db(1.8e9, 10), 57.1055, atol=1e-4)
    assert_allclose(indoor_path_loss_db(1.8e9, 15), 60.627, atol=1e-3)
    step = indoor_path_loss_db(1.8e9, 20) - indoor_path_loss_db(1.8e9, 10)
    assert_allclose(step, 20 * np.log10(2), rtol=1e-12)
    assert_allclose(indoor_path_loss(1.8e9, 10), 10 ** (-indoor_path_loss_db(1.8e9, 10) / 10), rtol=1e-14)
    assert_allclose(indoor_path_loss(1.8e9, 10), 1.947e-6, rtol=1e-3)


def test_path_loss_rejects_short_distance():
    with pytest.raises(ValueError):
        indoor_path_loss_db(1.8e9, 0.5)


def test_power_conversions():
    assert dbm_to_linear(30) == 1.0
    assert_allclose(dbm_to_linear(20), 0.1, rtol=1e-15)
    assert_allclose(dbm_to_linear(28), 0.630957, rtol=1e-6)
    assert isinstance(dbm_to_linear(20), float)
    assert_allclose(db_to_linear(-10), 0.1, rtol=1e-15)


@given(st.floats(-150, 60))
def test_dbm_round_trip(p):
    assert_allclose(linear_to_dbm(dbm_to_linear(p)), p, atol=1e-10)


def test_link_budget_validation():
    b = LinkBudget(((0.1, 0.2), (0.3, 0.4)), 1e-6, 0.1, 1e-3)
    assert b.sa(1, 2) == 0.2
    assert b.sa(2, 1) == 0.3
    with pytest.raises(ValueError):
        LinkBudget(((0.1, 0.2), (0.3, 1.4)), 1e-6, 0.1, 1e-3)
