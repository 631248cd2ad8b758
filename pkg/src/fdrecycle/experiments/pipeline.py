"""One channel realization of the four-node network, evaluated end to end.

A :class:`Realization` draws every channel once and builds the null-space
precoders, which do not depend on the splitting ratio. Rates and energies
are then evaluated at any ``rho`` on that same draw, so ratios against the
``rho = 1`` baseline use common random numbers.
"""

import logging
from dataclasses import dataclass
from typing import Dict, Tuple

import numpy as np

from ..channel import convolution_matrices, freq_response, sample_taps
from ..energy import EnergyReport, energy_backward, energy_forward, sn_tx_cov
from ..exceptions import NullspaceDimensionMismatch, SimulationError
from ..ofdm import reduced_selector
from ..precoding import Precoder, backward_nullspace, forward_nullspace
from ..rates import (
    RateReport,
    rate_backward_ofdm,
    rate_backward_signaling,
    rate_forward_ofdma,
    rate_forward_signaling,
    uniform_allocation,
    waterfill,
)
from ..whitening import (
    Regime,
    ScaledCovariance,
    backward_ofdm_interference,
    backward_signaling_interference,
    forward_interference,
    ofdm_tx_cov,
    regime_of,
    whiten,
)
from .config import ScenarioConfig

__all__ = ["Realization", "LinkState", "PhaseReport", "draw_realization", "run_realization", "realization_seeds"]

log = logging.getLogger(__name__)

CHANNEL_NAMES = ("h11", "h12", "h21", "h22", "hs", "hm1", "hm2")
LINKS = {"forward": ("ofdma", "signaling"), "backward": ("ofdma", "signaling")}


@dataclass(frozen=True)
class LinkState:
    """Rates (one report per SN) and harvested energies of one phase at one rho."""

    phase: str
    rho: float
    regime: Regime
    rates: Dict[str, Tuple[RateReport, RateReport]]
    energy: Tuple[EnergyReport, EnergyReport]

    def rate(self, link: str) -> np.ndarray:
        return np.array([r.rate for r in self.rates[link]])


@dataclass(frozen=True)
class PhaseReport:
    phase: str
    rho: float
    regime: Regime
    state: LinkState
    baseline: LinkState
    eta_r: Dict[str, float]
    eta_e: float
    resamples: int = 0


def eta_ratio(num: np.ndarray, den: np.ndarray) -> float:
    """Mean over both SNs of ``R(rho) / R(1)``; NaN when a baseline rate is zero."""
    with np.errstate(divide="ignore", invalid="ignore"):
        r = np.where(den > 0, num / np.where(den > 0, den, 1.0), np.nan)
    return float(np.mean(r))


def _saturated(phase, link, rho, n_streams, budget):
    return RateReport(0.0, phase, link, Regime.SATURATED, rho, uniform_allocation(n_streams, budget))


class Realization:
    """All random quantities of one block-fading draw plus derived precoders."""

    def __init__(self, config: ScenarioConfig, rng: np.random.Generator):
        self.config = config
        self.grid = grid = config.grid
        self.budget = config.link_budget()
        self.n0 = config.n0
        pdp = config.pdp
        self.taps = {name: sample_taps(pdp, rng, name) for name in CHANNEL_NAMES}
        self.conv = {k: convolution_matrices(t, grid.block_len) for k, t in self.taps.items()}
        self.h_tilde = {k: freq_response(t, grid) for k, t in self.taps.items()}
        self.fwd_precoders = (
            forward_nullspace(self.conv["h11"], self.conv["h12"], grid, 1),
            forward_nullspace(self.conv["h22"], self.conv["h21"], grid, 2),
        )
        # SN i's backward signaling must be invisible to SN j's OFDM decoding
        self.bwd_precoders = (
            backward_nullspace(self.conv["hs"], grid, 2),
            backward_nullspace(self.conv["hs"], grid, 1),
        )
        self._fwd_cache = None
        self._bwd_cache = {}

    # helpers

    def h(self, a, b):
        return self.conv[f"h{a}{b}"]

    def _expand(self, values, which):
        out = np.zeros(self.grid.n_subcarriers)
        out[list(self.grid.subcarriers(which))] = values
        return out

    # forward phase

    def _forward_setup(self):
        if self._fwd_cache is not None:
            return self._fwd_cache
        cfg, grid, n0 = self.config, self.grid, self.n0
        p = cfg.sn_power("forward")
        p_o = cfg.power_split_fwd * p
        p_b = p - p_o
        ofdma = []
        for i in (1, 2):
            ofdma.append(rate_forward_ofdma(self.h_tilde[f"h{i}{i}"], self.budget.sa(i, i), p_o, n0, grid, i))
        p_ofdm = [self._expand(r.allocation.per_channel, i) for i, r in zip((1, 2), ofdma)]
        covs = []
        for i in (1, 2):
            j = 3 - i
            hs = self.conv["hs"]
            no_si = forward_interference(hs, p_ofdm[i - 1], self.budget.alpha_b, grid)
            with_si = forward_interference(hs, p_ofdm[i - 1], self.budget.alpha_b, grid, n0=n0, p_th=cfg.p_th,
                                           p_j_ofdm=p_ofdm[j - 1], gamma_j=self.fwd_precoders[j - 1].gamma, p_b=p_b)
            covs.append({Regime.NO_RESIDUAL_SI: ScaledCovariance(n0, no_si),
                         Regime.RESIDUAL_SI: ScaledCovariance(n0, with_si)})
        eff = [self.conv["hs"].lower @ pc.gamma for pc in self.fwd_precoders]
        self._fwd_cache = dict(p=p, p_o=p_o, p_b=p_b, ofdma=tuple(ofdma), p_ofdm=p_ofdm, covs=covs, eff=eff)
        return self._fwd_cache

    def forward(self, rho: float, with_energy: bool = True) -> LinkState:
        cfg, grid = self.config, self.grid
        s = self._forward_setup()
        regime = regime_of(rho, s["p"], cfg.p_th, cfg.p_sat)
        signaling, precoders, powers = [], [], []
        for i in (1, 2):
            pc = self.fwd_precoders[i - 1]
            if regime is Regime.SATURATED:
                rep = _saturated("forward", "signaling", rho, pc.streams, grid.block_len * s["p_b"])
                rot = np.eye(pc.streams)
            else:
                wd = s["covs"][i - 1][regime].whiten(rho, s["eff"][i - 1])
                rep = rate_forward_signaling(wd, rho, self.budget.alpha_b, s["p_b"], grid, regime)
                rot = wd.right_basis
            signaling.append(rep)
            precoders.append(pc.with_rotation(rot))
            powers.append(rep.allocation.per_channel)
        rates = {"ofdma": s["ofdma"], "signaling": tuple(signaling)}
        if not with_energy:
            return LinkState("forward", rho, regime, rates, ())
        tx = [sn_tx_cov(grid, s["p_ofdm"][k], precoders[k], powers[k]) for k in range(2)]
        b = self.budget
        energy = tuple(
            energy_forward(self.conv["hs"], self.conv[f"hm{i}"], tx[i - 1], tx[2 - i], rho, cfg.beta,
                           b.alpha_b, b.alpha_c, b.alpha_m, s["p"], grid)
            for i in (1, 2)
        )
        return LinkState("forward", rho, regime, rates, energy)

    # backward phase

    def _an_allocation(self, i, rho, regime, p):
        """Rate of AN i -> SN i and the AN's N x N frequency-domain covariance."""
        cfg, grid, n0 = self.config, self.grid, self.n0
        alpha = self.budget.sa(i, i)
        budget = grid.n_subcarriers * cfg.p_a
        size = grid.size(i)
        if regime is Regime.SATURATED or rho == 0:
            rep = (_saturated("backward", "ofdma", rho, size, budget) if regime is Regime.SATURATED
                   else rate_backward_ofdm(self.h_tilde[f"h{i}{i}"], rho, alpha, cfg.p_a, n0, grid, regime, i))
            return rep, np.diag(self._expand(np.full(size, budget / size), i))
        if regime is Regime.NO_RESIDUAL_SI:
            rep = rate_backward_ofdm(self.h_tilde[f"h{i}{i}"], rho, alpha, cfg.p_a, n0, grid, regime, i)
            return rep, np.diag(self._expand(rep.allocation.per_channel, i))
        key = ("ofdm_si", i)
        if key not in self._bwd_cache:
            m = backward_ofdm_interference(self.bwd_precoders[i - 1].gamma, n0, cfg.p_th, p, grid, i)
            h_eff = np.diag(self.h_tilde[f"h{i}{i}"][list(grid.subcarriers(i))])
            self._bwd_cache[key] = (ScaledCovariance(n0, m), h_eff)
        cov, h_eff = self._bwd_cache[key]
        wd = cov.whiten(rho, h_eff)
        rep = rate_backward_ofdm(wd, rho, alpha, cfg.p_a, n0, grid, regime, i)
        d = reduced_selector(grid, i)
        t = d.T @ wd.right_basis
        return rep, (t * rep.allocation.per_channel) @ t.conj().T

    def backward(self, rho: float, with_energy: bool = True) -> LinkState:
        cfg, grid, n0, b = self.config, self.grid, self.n0, self.budget
        p = cfg.sn_power("backward")
        regime = regime_of(rho, p, cfg.p_th, cfg.p_sat)
        ofdm, an_cov = [], []
        for i in (1, 2):
            rep, cov = self._an_allocation(i, rho, regime, p)
            ofdm.append(rep)
            an_cov.append(cov)
        signaling, precoders, powers = [], [], []
        for i in (1, 2):
            j = 3 - i
            pc = self.bwd_precoders[i - 1]
            if regime is Regime.SATURATED:
                rep = _saturated("backward", "signaling", rho, pc.streams, grid.block_len * p)
                rot = np.eye(pc.streams)
            else:
                kwargs = {}
                if regime is Regime.RESIDUAL_SI:
                    kwargs = dict(gamma_j_b=self.bwd_precoders[j - 1].gamma, n0=n0, p_th=cfg.p_th, p=p)
                # AN i reaches SN j over the SN j <-> AN i channel
                m = backward_signaling_interference(self.h(j, i), an_cov[i - 1], b.sa(j, i), grid, **kwargs)
                cov = n0 * np.eye(grid.block_len) + rho * m
                wd = whiten(cov, self.conv["hs"].lower @ pc.gamma)
                rep = rate_backward_signaling(wd, rho, b.alpha_b, p, grid, regime)
                rot = wd.right_basis
            signaling.append(rep)
            precoders.append(pc.with_rotation(rot))
            powers.append(rep.allocation.per_channel)
        rates = {"ofdma": tuple(ofdm), "signaling": tuple(signaling)}
        if not with_energy:
            return LinkState("backward", rho, regime, rates, ())
        an_time = [ofdm_tx_cov(c, grid) for c in an_cov]
        sig = [sn_tx_cov(grid, None, precoders[k], powers[k]) for k in range(2)]
        energy = tuple(
            energy_backward(self.h(i, i), self.h(i, 3 - i), self.conv["hs"], self.conv[f"hm{i}"],
                            an_time[i - 1], an_time[2 - i], sig[i - 1], sig[2 - i], rho, cfg.beta,
                            b.sa(i, i), b.sa(i, 3 - i), b.alpha_b, b.alpha_c, b.alpha_m, p, grid)
            for i in (1, 2)
        )
        return LinkState("backward", rho, regime, rates, energy)

    def evaluate(self, phase: str, rho: float, with_energy: bool = True) -> LinkState:
        if phase == "forward":
            return self.forward(rho, with_energy)
        if phase == "backward":
            return self.backward(rho, with_energy)
        raise ValueError(f"unknown phase {phase!r}")

    def report(self, phase: str, rho: float, baseline: LinkState = None, resamples: int = 0) -> PhaseReport:
        state = self.evaluate(phase, rho)
        if baseline is None:
            baseline = state if rho == 1.0 else self.evaluate(phase, 1.0)
        eta_r = {link: eta_ratio(state.rate(link), baseline.rate(link)) for link in LINKS[phase]}
        eta_e = float(np.mean([e.eta_e for e in state.energy]))
        return PhaseReport(phase, rho, state.regime, state, baseline, eta_r, eta_e, resamples)


def realization_seeds(seed: int, n: int):
    """Independent child seeds, one per realization, derived from the run seed."""
    return np.random.SeedSequence(seed).spawn(n)


def draw_realization(config: ScenarioConfig, seed_seq) -> Tuple[Realization, int]:
    """Draw a realization, redrawing degenerate channels up to ``config.max_retries`` times."""
    rng = np.random.default_rng(seed_seq)
    for attempt in range(config.max_retries + 1):
        try:
            return Realization(config, rng), attempt
        except NullspaceDimensionMismatch as exc:
            log.warning("degenerate channel draw (%s), resampling", exc)
    raise SimulationError(f"no valid channel draw after {config.max_retries} retries")


def run_realization(config: ScenarioConfig, rho: float, seed) -> Tuple[PhaseReport, PhaseReport]:
    """Forward and backward reports of a single draw at ``rho``, with the rho = 1 baseline."""
    seed_seq = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    real, retries = draw_realization(config, seed_seq)
    return (real.report("forward", rho, resamples=retries), real.report("backward", rho, resamples=retries))
