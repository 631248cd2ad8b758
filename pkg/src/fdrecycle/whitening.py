"""Residual self-interference model and noise whitening at the FD receiver.

Every equivalent-noise covariance assembled here has the form
``n0 * I + rho * M`` with ``M`` positive semidefinite, which
:class:`ScaledCovariance` exploits to whiten at many splitting ratios from
a single eigendecomposition.
"""

import enum
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .channel import ConvolutionPair
from .exceptions import NotPositiveDefinite
from .ofdm import OfdmGrid, cp_insertion, cp_removal, dft_matrix, reduced_selector

__all__ = [
    "Regime",
    "ResidualSiModel",
    "WhiteningDecomposition",
    "ScaledCovariance",
    "residual_si",
    "regime_of",
    "inv_sqrt",
    "whiten",
    "ofdm_tx_cov",
    "received_ofdm_cov",
    "forward_signaling_cov_no_si",
    "forward_signaling_cov_with_si",
    "backward_ofdm_cov_with_si",
    "backward_signaling_cov",
    "forward_interference",
    "backward_ofdm_interference",
    "backward_signaling_interference",
]

# relative slack on the regime boundaries so that rho = p_th / p computed
# elsewhere lands on the intended side
_BOUNDARY_RTOL = 1e-12


class Regime(enum.Enum):
    NO_RESIDUAL_SI = "no_residual_si"
    RESIDUAL_SI = "residual_si"
    SATURATED = "saturated"


@dataclass(frozen=True)
class ResidualSiModel:
    rho: float
    p: float
    p_th: float
    p_sat: float
    alpha_eq: float
    regime: Regime


def regime_of(rho: float, p: float, p_th: float, p_sat: float) -> Regime:
    if rho <= p_th / p * (1 + _BOUNDARY_RTOL):
        return Regime.NO_RESIDUAL_SI
    if rho <= min(1.0, p_sat / p) * (1 + _BOUNDARY_RTOL):
        return Regime.RESIDUAL_SI
    return Regime.SATURATED


def residual_si(rho: float, p: float, p_th: float, p_sat: float, n0: float) -> ResidualSiModel:
    """Equivalent SI gain left after cancellation for a given splitting ratio.

    Cancellation is perfect while the power reaching the RX chain stays
    below ``p_th`` (``rho <= p_th / p``). Above that the residual sits at
    ``n0 / p_th`` per unit of transmit power until the chain saturates at
    ``rho > p_sat / p``.
    """
    if not 0.0 <= rho <= 1.0:
        raise ValueError(f"rho must lie in [0, 1], got {rho}")
    if min(p, p_th, p_sat, n0) <= 0:
        raise ValueError("powers must be positive")
    regime = regime_of(rho, p, p_th, p_sat)
    alpha_eq = n0 / p_th if regime is Regime.RESIDUAL_SI else 0.0
    return ResidualSiModel(rho, p, p_th, p_sat, alpha_eq, regime)


@dataclass(frozen=True)
class WhiteningDecomposition:
    """Whitened effective channel ``inv_sqrt @ channel = U diag(gains) Q^H``.

    ``gains`` are the singular values in nonincreasing order; ``right_basis``
    is ``Q`` (square, one column per stream).
    """

    cov: np.ndarray
    inv_sqrt: np.ndarray
    left_basis: np.ndarray
    gains: np.ndarray
    right_basis: np.ndarray


_REFINE_TOL = 1e-10


def _refine(cov, w_inv):
    """One correction step so that ``w_inv cov w_inv^H`` is identity to working precision.

    On badly conditioned covariances the eigensolver's error on the smallest
    eigenvalues leaves a visible residual; whitening the residual, which is
    close to identity and well conditioned, removes it.
    """
    e = w_inv @ cov @ w_inv.conj().T
    if np.abs(e - np.eye(e.shape[0])).max() <= _REFINE_TOL:
        return w_inv
    w, v = np.linalg.eigh(0.5 * (e + e.conj().T))
    return (v / np.sqrt(w)) @ v.conj().T @ w_inv


def inv_sqrt(cov: np.ndarray) -> np.ndarray:
    """Inverse square root of a positive definite matrix, refined once if needed.

    The result ``W`` satisfies ``W cov W^H = I``; it is Hermitian up to the
    refinement step.
    """
    w, v = np.linalg.eigh(cov)
    floor = 1e-14 * max(w[-1], 0.0)
    if w[0] <= floor:
        raise NotPositiveDefinite(f"smallest eigenvalue {w[0]:.3e} is below the floor {floor:.3e}")
    return _refine(cov, (v / np.sqrt(w)) @ v.conj().T)


def _decompose(cov, w_inv, channel):
    u, s, vh = np.linalg.svd(w_inv @ channel, full_matrices=False)
    k = channel.shape[1]
    q = vh.conj().T
    if q.shape[1] < k:
        # more streams than receive dimensions: complete Q to a unitary
        q_full, _, _ = np.linalg.svd(np.hstack([q, np.eye(k)]))
        q = np.hstack([q, q_full[:, q.shape[1]:k]])
        s = np.concatenate([s, np.zeros(k - s.size)])
    return WhiteningDecomposition(cov, w_inv, u, s, q)


def whiten(cov: np.ndarray, channel: np.ndarray) -> WhiteningDecomposition:
    """Whiten ``cov`` and take the SVD of the whitened ``channel``."""
    cov = 0.5 * (cov + cov.conj().T)
    return _decompose(cov, inv_sqrt(cov), channel)


class ScaledCovariance:
    """The family ``n0 * I + rho * m`` for a fixed PSD ``m``.

    Whitening at any ``rho`` reuses one eigendecomposition of ``m``.
    """

    def __init__(self, n0: float, m: np.ndarray):
        self.n0 = float(n0)
        self.m = 0.5 * (m + m.conj().T)
        w, v = np.linalg.eigh(self.m)
        self._w = np.clip(w, 0.0, None)
        self._v = v

    def cov(self, rho: float) -> np.ndarray:
        return self.n0 * np.eye(self.m.shape[0]) + rho * self.m

    def whiten(self, rho: float, channel: np.ndarray) -> WhiteningDecomposition:
        d = self.n0 + rho * self._w
        cov = self.cov(rho)
        w_inv = _refine(cov, (self._v / np.sqrt(d)) @ self._v.conj().T)
        return _decompose(cov, w_inv, channel)


def ofdm_tx_cov(power, grid: OfdmGrid) -> np.ndarray:
    """Time-domain covariance ``A F^-1 P F A^H`` of a CP-OFDM block.

    ``power`` is either the diagonal of ``P`` (length N) or the full N x N
    matrix.
    """
    p = np.asarray(power)
    if p.ndim == 1:
        p = np.diag(p)
    f = dft_matrix(grid.n_subcarriers)
    t = cp_insertion(grid) @ f.conj().T
    return t @ p @ t.conj().T


def received_ofdm_cov(h: ConvolutionPair, power, grid: OfdmGrid) -> np.ndarray:
    """Covariance of an OFDM stream after the channel, current block plus IBI tail."""
    k = ofdm_tx_cov(power, grid)
    return h.lower @ k @ h.lower.conj().T + h.upper @ k @ h.upper.conj().T


def forward_interference(h_s, p_i_ofdm, alpha_b, grid, *, n0=None, p_th=None,
                         p_j_ofdm=None, gamma_j=None, p_b=None) -> np.ndarray:
    """``M`` such that the forward signaling noise covariance is ``n0 I + rho M``.

    Without the residual-SI arguments only the OFDM stream of the sending SN
    (seen through ``h_s``) contributes.
    """
    m = alpha_b * received_ofdm_cov(h_s, p_i_ofdm, grid)
    if p_th is not None:
        m = m + (n0 / p_th) * ofdm_tx_cov(p_j_ofdm, grid)
        ell = gamma_j.shape[1]
        m = m + (n0 * grid.block_len * p_b / (ell * p_th)) * (gamma_j @ gamma_j.conj().T)
    return m


def forward_signaling_cov_no_si(h_s: ConvolutionPair, p_i_ofdm, rho, alpha_b, n0, grid: OfdmGrid,
                                gamma_i: np.ndarray) -> WhiteningDecomposition:
    """Noise seen by SN j decoding SN i's signaling when SI is fully cancelled."""
    m = forward_interference(h_s, p_i_ofdm, alpha_b, grid)
    cov = n0 * np.eye(grid.block_len) + rho * m
    return whiten(cov, h_s.lower @ gamma_i)


def forward_signaling_cov_with_si(h_s: ConvolutionPair, p_i_ofdm, p_j_ofdm, gamma_j, rho, alpha_b, n0,
                                  p_th, p_b, grid: OfdmGrid, gamma_i: np.ndarray) -> WhiteningDecomposition:
    """As :func:`forward_signaling_cov_no_si` plus SN j's own residual SI.

    The residual SI of SN j's signaling is modelled with a uniform power
    split over its streams, since its rotation is unknown at SN i.
    """
    m = forward_interference(h_s, p_i_ofdm, alpha_b, grid, n0=n0, p_th=p_th,
                             p_j_ofdm=p_j_ofdm, gamma_j=gamma_j, p_b=p_b)
    cov = n0 * np.eye(grid.block_len) + rho * m
    return whiten(cov, h_s.lower @ gamma_i)


def backward_ofdm_interference(gamma_i_b, n0, p_th, p, grid: OfdmGrid, i: int) -> np.ndarray:
    dt = reduced_selector(grid, i) @ dft_matrix(grid.n_subcarriers) @ cp_removal(grid)
    g = dt @ gamma_i_b
    scale = n0 * grid.block_len * p / (gamma_i_b.shape[1] * p_th)
    return scale * (g @ g.conj().T)


def backward_ofdm_cov_with_si(gamma_i_b, rho, n0, p_th, p, grid: OfdmGrid, i: int,
                              h_tilde_ii: Optional[np.ndarray] = None) -> WhiteningDecomposition:
    """Noise on SN i's own subcarriers while it decodes its AN, backward phase.

    The residual-SI term is only present when ``rho > p_th / p``. The
    effective channel is ``diag(h_tilde_ii)`` restricted to link ``i``
    (all ones when ``h_tilde_ii`` is omitted).
    """
    size = grid.size(i)
    cov = n0 * np.eye(size, dtype=complex)
    if regime_of(rho, p, p_th, np.inf) is not Regime.NO_RESIDUAL_SI:
        cov = cov + rho * backward_ofdm_interference(gamma_i_b, n0, p_th, p, grid, i)
    if h_tilde_ii is None:
        h_eff = np.eye(size)
    else:
        h_eff = np.diag(np.asarray(h_tilde_ii)[list(grid.subcarriers(i))])
    return whiten(cov, h_eff)


def backward_signaling_interference(h_ji: ConvolutionPair, p_i_ofdm_b, alpha_ji, grid: OfdmGrid, *,
                                    gamma_j_b=None, n0=None, p_th=None, p=None) -> np.ndarray:
    m = alpha_ji * received_ofdm_cov(h_ji, p_i_ofdm_b, grid)
    if p_th is not None:
        scale = n0 * grid.block_len * p / (p_th * gamma_j_b.shape[1])
        m = m + scale * (gamma_j_b @ gamma_j_b.conj().T)
    return m


def backward_signaling_cov(h_ji: ConvolutionPair, p_i_ofdm_b, gamma_j_b, rho, alpha_ji, n0, grid: OfdmGrid,
                           h_s: ConvolutionPair, gamma_i_b, *, p_th=None, p=None) -> WhiteningDecomposition:
    """Noise at SN j decoding SN i's backward signaling.

    AN i's OFDM block (through ``h_ji``) always interferes; passing
    ``p_th`` and ``p`` adds SN j's residual SI with uniform stream powers.
    """
    kwargs = {}
    if p_th is not None:
        kwargs = dict(gamma_j_b=gamma_j_b, n0=n0, p_th=p_th, p=p)
    m = backward_signaling_interference(h_ji, p_i_ofdm_b, alpha_ji, grid, **kwargs)
    cov = n0 * np.eye(grid.block_len) + rho * m
    return whiten(cov, h_s.lower @ gamma_i_b)
