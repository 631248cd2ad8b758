"""Energy recycled by the harvesting branch of the power divider."""

from dataclasses import dataclass

import numpy as np

from .channel import ConvolutionPair
from .exceptions import DimensionMismatch
from .ofdm import OfdmGrid
from .whitening import ofdm_tx_cov

__all__ = ["EnergyReport", "sn_tx_cov", "energy_forward", "energy_backward", "energy_approx"]


@dataclass(frozen=True)
class EnergyReport:
    """Per-symbol energies; ``incoming`` is what reaches the divider before the split."""

    exact: float
    approx: float
    eta_e: float
    e_tx: float
    beta: float
    incoming: float


def sn_tx_cov(grid: OfdmGrid, p_ofdm=None, precoder=None, stream_powers=None) -> np.ndarray:
    """Time-domain covariance of everything an SN transmits in one block."""
    cov = np.zeros((grid.block_len, grid.block_len), dtype=complex)
    if p_ofdm is not None:
        cov = cov + ofdm_tx_cov(p_ofdm, grid)
    if precoder is not None:
        t = precoder.gamma @ precoder.rotation
        cov = cov + (t * np.asarray(stream_powers)) @ t.conj().T
    return cov


def energy_approx(rho, beta, alpha_c, p) -> float:
    return beta * alpha_c * (1.0 - rho) * p


def _gram(h: ConvolutionPair):
    return h.gram


def _self_leak(h_m: ConvolutionPair, alpha_c, alpha_m):
    n = h_m.lower.shape[0]
    direct = np.sqrt(alpha_c) * np.eye(n) + np.sqrt(alpha_m) * h_m.lower
    return alpha_m * h_m.upper.conj().T @ h_m.upper + direct.conj().T @ direct


def _check(grid, *mats):
    n = grid.block_len
    for m in mats:
        if m.shape != (n, n):
            raise DimensionMismatch(f"expected {n}x{n}, got {m.shape}")


def _report(total, rho, beta, alpha_c, p, grid):
    incoming = float(np.real(total)) / grid.block_len
    exact = beta * (1.0 - rho) * incoming
    return EnergyReport(exact, energy_approx(rho, beta, alpha_c, p), exact / p, p, beta, incoming)


def energy_forward(h_s: ConvolutionPair, h_m_i: ConvolutionPair, tx_cov_i, tx_cov_j, rho, beta,
                   alpha_b, alpha_c, alpha_m, p, grid: OfdmGrid) -> EnergyReport:
    """Energy harvested at SN i in the forward phase.

    ``tx_cov_i``/``tx_cov_j`` are the block covariances of what SN i and the
    other SN transmit (OFDM plus signaling); see :func:`sn_tx_cov`. The
    transmitted energy per symbol is ``p``.
    """
    _check(grid, tx_cov_i, tx_cov_j, h_s.lower, h_m_i.lower)
    total = (alpha_b * np.trace(_gram(h_s) @ tx_cov_j)
             + np.trace(_self_leak(h_m_i, alpha_c, alpha_m) @ tx_cov_i))
    return _report(total, rho, beta, alpha_c, p, grid)


def energy_backward(h_ii: ConvolutionPair, h_ij: ConvolutionPair, h_s: ConvolutionPair, h_m_i: ConvolutionPair,
                    an_cov_i, an_cov_j, sig_cov_i, sig_cov_j, rho, beta, alpha_ii, alpha_ij,
                    alpha_b, alpha_c, alpha_m, p, grid: OfdmGrid) -> EnergyReport:
    """Energy harvested at SN i in the backward phase.

    Adds the two AN uplink blocks (``an_cov_*``, time domain) to the SN
    signaling terms.
    """
    _check(grid, an_cov_i, an_cov_j, sig_cov_i, sig_cov_j)
    total = (alpha_ii * np.trace(_gram(h_ii) @ an_cov_i)
             + alpha_ij * np.trace(_gram(h_ij) @ an_cov_j)
             + alpha_b * np.trace(_gram(h_s) @ sig_cov_j)
             + np.trace(_self_leak(h_m_i, alpha_c, alpha_m) @ sig_cov_i))
    return _report(total, rho, beta, alpha_c, p, grid)
