"""Water-filling and achievable rates of the OFDMA and signaling links."""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .exceptions import AllGainsZero, SaturatedRegime
from .ofdm import OfdmGrid
from .whitening import Regime, WhiteningDecomposition

__all__ = [
    "PowerAllocation",
    "RateReport",
    "waterfill",
    "uniform_allocation",
    "rate_forward_ofdma",
    "rate_forward_signaling",
    "rate_backward_ofdm",
    "rate_backward_signaling",
]


@dataclass(frozen=True)
class PowerAllocation:
    per_channel: np.ndarray
    water_level: float
    budget: float


@dataclass(frozen=True)
class RateReport:
    """Rate in bits per channel use, CP samples included in the channel uses."""

    rate: float
    phase: str
    link: str
    regime: Regime
    rho: float
    allocation: Optional[PowerAllocation] = None


def waterfill(gains, budget: float) -> PowerAllocation:
    """Maximise ``sum(log2(1 + g p))`` subject to ``sum(p) = budget``.

    Parameters
    ----------
    gains : array_like
        Nonnegative power gains of the parallel channels (noise already
        folded in).
    budget : float
        Total power to distribute.

    Returns
    -------
    PowerAllocation
        ``p = max(kappa - 1/g, 0)``; channels with zero gain get nothing.

    The active set is located by bisection over the sorted inverse gains;
    the level is then the closed form ``(budget + sum(1/g)) / |active|``.
    """
    g = np.asarray(gains, dtype=float)
    if np.any(g < 0):
        raise ValueError("gains must be nonnegative")
    pos = g > 0
    if not np.any(pos):
        raise AllGainsZero("water-filling needs at least one channel with positive gain")
    if budget < 0:
        raise ValueError("budget must be nonnegative")
    inv = np.full(g.shape, np.inf)
    inv[pos] = 1.0 / g[pos]
    if budget == 0:
        return PowerAllocation(np.zeros_like(g), float(inv[pos].min()), 0.0)

    # water needed to lift the level to each sorted breakpoint; the active
    # set is found by bisection over these, then the level is exact
    s = np.sort(inv[pos])
    need = np.arange(s.size) * s - np.concatenate(([0.0], np.cumsum(s)[:-1]))
    k = int(np.searchsorted(need, budget, side="left"))
    kappa = (budget + s[:k].sum()) / k
    p = np.clip(kappa - inv, 0.0, None)
    return PowerAllocation(p, float(kappa), float(budget))


def uniform_allocation(n: int, budget: float) -> PowerAllocation:
    return PowerAllocation(np.full(n, budget / n), float("nan"), float(budget))


def _rate(snr, grid: OfdmGrid) -> float:
    return float(np.sum(np.log2(1.0 + snr)) / grid.block_len)


def _check_decodable(regime):
    if regime is Regime.SATURATED:
        raise SaturatedRegime("the RX chain saturates at this splitting ratio")


def rate_forward_ofdma(h_tilde, alpha_ii, p_o, n0, grid: OfdmGrid, i: int) -> RateReport:
    """SN i to AN i over the subcarriers of link i, water-filled with ``N p_o``."""
    h = np.asarray(h_tilde)[list(grid.subcarriers(i))]
    gains = alpha_ii * np.abs(h) ** 2 / n0
    alloc = waterfill(gains, grid.n_subcarriers * p_o)
    return RateReport(_rate(gains * alloc.per_channel, grid), "forward", "ofdma",
                      Regime.NO_RESIDUAL_SI, 1.0, alloc)


def _stream_rate(gains, budget, regime, grid, rho, phase, link):
    _check_decodable(regime)
    if rho == 0 or budget == 0 or not np.any(gains > 0):
        return RateReport(0.0, phase, link, regime, rho, uniform_allocation(gains.size, budget))
    if regime is Regime.NO_RESIDUAL_SI:
        alloc = waterfill(gains, budget)
    else:
        alloc = uniform_allocation(gains.size, budget)
    return RateReport(_rate(gains * alloc.per_channel, grid), phase, link, regime, rho, alloc)


def rate_forward_signaling(whitening: WhiteningDecomposition, rho, alpha_b, p_b, grid: OfdmGrid,
                           regime: Regime) -> RateReport:
    """SN i to SN j in the forward phase.

    Water-filling with ``(N+L) p_b`` when SI is fully cancelled, uniform
    stream powers otherwise.
    """
    gains = rho * alpha_b * whitening.gains ** 2
    return _stream_rate(gains, grid.block_len * p_b, regime, grid, rho, "forward", "signaling")


def rate_backward_ofdm(channel, rho, alpha_ii, p_a, n0, grid: OfdmGrid, regime: Regime, i: int) -> RateReport:
    """AN i to SN i in the backward phase.

    ``channel`` is the frequency response ``h_tilde_ii`` when SI is fully
    cancelled, or the whitened decomposition from
    :func:`~fdrecycle.whitening.backward_ofdm_cov_with_si` otherwise (whose
    gains already include ``n0``).
    """
    _check_decodable(regime)
    budget = grid.n_subcarriers * p_a
    if isinstance(channel, WhiteningDecomposition):
        gains = rho * alpha_ii * channel.gains ** 2
    else:
        h = np.asarray(channel)[list(grid.subcarriers(i))]
        gains = rho * alpha_ii * np.abs(h) ** 2 / n0
    if rho == 0 or budget == 0:
        return RateReport(0.0, "backward", "ofdma", regime, rho, uniform_allocation(gains.size, budget))
    alloc = waterfill(gains, budget)
    return RateReport(_rate(gains * alloc.per_channel, grid), "backward", "ofdma", regime, rho, alloc)


def rate_backward_signaling(whitening: WhiteningDecomposition, rho, alpha_b, p, grid: OfdmGrid,
                            regime: Regime) -> RateReport:
    gains = rho * alpha_b * whitening.gains ** 2
    return _stream_rate(gains, grid.block_len * p, regime, grid, rho, "backward", "signaling")
