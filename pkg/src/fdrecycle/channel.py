"""Frequency-selective block-fading channels and link budgets."""

import functools
from dataclasses import dataclass

import numpy as np

from .ofdm import OfdmGrid

__all__ = [
    "PowerDelayProfile",
    "ChannelTaps",
    "ConvolutionPair",
    "LinkBudget",
    "exp_pdp",
    "sample_taps",
    "convolution_matrices",
    "freq_response",
    "indoor_path_loss",
    "indoor_path_loss_db",
    "dbm_to_linear",
    "linear_to_dbm",
    "db_to_linear",
]


@dataclass(frozen=True)
class PowerDelayProfile:
    variances: np.ndarray
    decay_ratio: float

    @property
    def n_taps(self) -> int:
        return len(self.variances)


@dataclass(frozen=True)
class ChannelTaps:
    taps: np.ndarray
    role: str = ""

    @property
    def max_delay(self) -> int:
        return len(self.taps) - 1


@dataclass(frozen=True)
class ConvolutionPair:
    """Block convolution matrix split into its causal and wrap-around parts.

    ``lower`` acts on the current block (ISI), ``upper`` on the previous
    one (IBI), and ``full = lower + upper``.
    """

    full: np.ndarray
    lower: np.ndarray
    upper: np.ndarray

    @functools.cached_property
    def gram(self) -> np.ndarray:
        """``lower^H lower + upper^H upper``, the energy operator of the pair."""
        return self.lower.conj().T @ self.lower + self.upper.conj().T @ self.upper


@dataclass(frozen=True)
class LinkBudget:
    """Linear power gains of every path seen in the four-node network.

    ``alpha_sa[i][j]`` is the gain between SN ``i+1`` and AN ``j+1``.
    """

    alpha_sa: tuple
    alpha_b: float
    alpha_c: float
    alpha_m: float

    def __post_init__(self):
        gains = [g for row in self.alpha_sa for g in row]
        gains += [self.alpha_b, self.alpha_c, self.alpha_m]
        for g in gains:
            if not 0.0 <= g <= 1.0:
                raise ValueError(f"link gains must lie in [0, 1], got {g}")

    def sa(self, sn: int, an: int) -> float:
        return self.alpha_sa[sn - 1][an - 1]


def exp_pdp(l: int, decay_ratio: float) -> PowerDelayProfile:
    """Exponentially decaying profile ``exp(-n * decay_ratio)``, n = 0..l, summing to one."""
    if l < 0:
        raise ValueError("l must be nonnegative")
    if decay_ratio <= 0:
        raise ValueError(f"decay_ratio must be positive, got {decay_ratio}")
    v = np.exp(-decay_ratio * np.arange(l + 1))
    return PowerDelayProfile(v / v.sum(), float(decay_ratio))


def sample_taps(pdp: PowerDelayProfile, rng: np.random.Generator, role: str = "") -> ChannelTaps:
    """Draw independent circular complex Gaussian taps with the profile's variances."""
    n = pdp.n_taps
    g = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return ChannelTaps(g * np.sqrt(pdp.variances / 2.0), role)


def convolution_matrices(taps, block: int) -> ConvolutionPair:
    h = np.asarray(getattr(taps, "taps", taps), dtype=complex)
    if len(h) > block:
        raise ValueError(f"{len(h)} taps do not fit in a block of {block} samples")
    r = np.arange(block)[:, None]
    c = np.arange(block)[None, :]
    lag = (r - c) % block
    full = np.where(lag < len(h), h[np.minimum(lag, len(h) - 1)], 0)
    lower = np.where(r >= c, full, 0)
    upper = np.where(r < c, full, 0)
    return ConvolutionPair(full, lower, upper)


def freq_response(taps, grid: OfdmGrid) -> np.ndarray:
    """Per-subcarrier gains ``sqrt(N) F [h; 0]``."""
    h = np.asarray(getattr(taps, "taps", taps), dtype=complex)
    n = grid.n_subcarriers
    if len(h) > n:
        raise ValueError(f"{len(h)} taps exceed {n} subcarriers")
    return np.fft.fft(h, n)


def indoor_path_loss_db(f_c: float, d: float, distance_coeff: float = 20.0) -> float:
    """ITU-R P.1238 indoor loss (dB) without floor penetration.

    ``distance_coeff`` is ten times the path-loss exponent; 20 gives the
    free-space-like 6 dB per doubling of distance.
    """
    if d < 1:
        raise ValueError(f"indoor model is only valid for d >= 1 m, got {d}")
    if f_c <= 0:
        raise ValueError("carrier frequency must be positive")
    return float(20.0 * np.log10(f_c / 1e6) + distance_coeff * np.log10(d) - 28.0)


def indoor_path_loss(f_c: float, d: float, distance_coeff: float = 20.0) -> float:
    return 10.0 ** (-indoor_path_loss_db(f_c, d, distance_coeff) / 10.0)


def _scalar_or_array(x):
    x = np.asarray(x, dtype=float)
    return float(x) if x.ndim == 0 else x


def dbm_to_linear(p_dbm):
    """dBm to watts."""
    return _scalar_or_array(10.0 ** ((np.asarray(p_dbm, dtype=float) - 30.0) / 10.0))


def linear_to_dbm(p_w):
    return _scalar_or_array(10.0 * np.log10(np.asarray(p_w, dtype=float)) + 30.0)


def db_to_linear(x_db):
    return _scalar_or_array(10.0 ** (np.asarray(x_db, dtype=float) / 10.0))
