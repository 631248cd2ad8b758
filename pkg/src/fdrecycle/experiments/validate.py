"""Invariant checks run by ``fd-sim validate`` on a handful of draws."""

from dataclasses import dataclass
from typing import Callable, List

import numpy as np

from ..channel import LinkBudget
from ..energy import energy_forward, sn_tx_cov
from ..precoding import backward_constraint, demod_operator
from ..whitening import (
    backward_ofdm_cov_with_si,
    backward_signaling_cov,
    forward_signaling_cov_no_si,
    forward_signaling_cov_with_si,
)
from .config import ScenarioConfig
from .pipeline import Realization, draw_realization, realization_seeds

__all__ = ["Check", "run_checks", "nullspace_residual", "whitening_deviation", "energy_collapse_error"]


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name}: {self.detail}"


def nullspace_residual(real: Realization) -> float:
    grid, c = real.grid, real.conv
    worst = 0.0
    for i, pc in zip((1, 2), real.fwd_precoders):
        j = 3 - i
        for h, which in ((c[f"h{i}{i}"], i), (c[f"h{i}{j}"], j)):
            op = demod_operator(grid, which) @ h.lower
            worst = max(worst, np.abs(op @ pc.gamma).max() / np.abs(op).max())
    for j, pc in zip((2, 1), real.bwd_precoders):
        op = backward_constraint(c["hs"], grid, j)
        worst = max(worst, np.abs(op @ pc.gamma).max() / np.abs(op).max())
    return float(worst)


def _uniform_ofdm(grid, which, total):
    p = np.zeros(grid.n_subcarriers)
    p[list(grid.subcarriers(which))] = total / grid.size(which)
    return p


def whitening_deviation(config: ScenarioConfig, real: Realization, rho: float) -> float:
    """Largest deviation of ``W cov W^H`` from identity over the four assemblies."""
    grid, c, b, n0 = real.grid, real.conv, real.budget, real.n0
    p_f, p_b = config.sn_power("forward"), config.sn_power("backward")
    p1 = _uniform_ofdm(grid, 1, grid.n_subcarriers * p_f / 2)
    p2 = _uniform_ofdm(grid, 2, grid.n_subcarriers * p_f / 2)
    pa = _uniform_ofdm(grid, 1, grid.n_subcarriers * config.p_a)
    g1, g2 = real.fwd_precoders[0].gamma, real.fwd_precoders[1].gamma
    gb1, gb2 = real.bwd_precoders[0].gamma, real.bwd_precoders[1].gamma
    decomps = [
        forward_signaling_cov_no_si(c["hs"], p1, rho, b.alpha_b, n0, grid, g1),
        forward_signaling_cov_with_si(c["hs"], p1, p2, g2, rho, b.alpha_b, n0, config.p_th, p_f / 2, grid, g1),
        backward_ofdm_cov_with_si(gb1, rho, n0, config.p_th, p_b, grid, 1, real.h_tilde["h11"]),
        backward_signaling_cov(c["h21"], pa, gb2, rho, b.sa(2, 1), n0, grid, c["hs"], gb1,
                               p_th=config.p_th, p=p_b),
    ]
    worst = 0.0
    for wd in decomps:
        e = wd.inv_sqrt @ wd.cov @ wd.inv_sqrt.conj().T
        worst = max(worst, np.abs(e - np.eye(e.shape[0])).max())
    return float(worst)


def energy_collapse_error(config: ScenarioConfig, real: Realization, rho: float) -> float:
    grid = real.grid
    p = config.sn_power("forward")
    p_ofdm = np.zeros(grid.n_subcarriers)
    p_ofdm[list(grid.subcarriers(1))] = grid.n_subcarriers * p / grid.size(1)
    tx_i = sn_tx_cov(grid, p_ofdm)
    silent = np.zeros_like(tx_i)
    b: LinkBudget = real.budget
    rep = energy_forward(real.conv["hs"], real.conv["hm1"], tx_i, silent, rho, config.beta,
                         0.0, b.alpha_c, 0.0, p, grid)
    return abs(rep.exact - rep.approx) / rep.approx


def run_checks(config: ScenarioConfig, n_draws: int = 20, progress: Callable[[str], None] = None) -> List[Check]:
    """Structural invariants on ``n_draws`` realizations of ``config``."""
    checks: List[Check] = []
    reals = []
    resamples = 0
    for s in realization_seeds(config.seed, n_draws):
        real, k = draw_realization(config, s)
        reals.append(real)
        resamples += k
    grid = config.grid

    res = max(nullspace_residual(r) for r in reals)
    checks.append(Check("null-space residual", res <= 1e-8, f"max relative residual {res:.2e}"))

    dims = all(
        all(pc.streams == grid.cp_len for pc in r.fwd_precoders)
        and r.bwd_precoders[0].streams == grid.block_len - grid.size(2)
        and r.bwd_precoders[1].streams == grid.block_len - grid.size(1)
        for r in reals
    )
    checks.append(Check("precoder dimensions", dims, f"{resamples} resampled draws"))

    rhos = [0.25, 0.75, 1.0]
    werr = max(whitening_deviation(config, r, rho) for r in reals[:5] for rho in rhos)
    checks.append(Check("whitening identity", werr <= 1e-8, f"max deviation {werr:.2e}"))

    worst_eta, worst_e = 0.0, 0.0
    for r in reals:
        for phase in ("forward", "backward"):
            rep = r.report(phase, 1.0)
            for v in rep.eta_r.values():
                if not np.isnan(v):
                    worst_eta = max(worst_eta, abs(v - 1.0))
            worst_e = max(worst_e, abs(rep.eta_e))
    checks.append(Check("baseline identity", worst_eta == 0.0 and worst_e == 0.0,
                        f"|eta_r(1) - 1| <= {worst_eta:.1e}, |eta_e(1)| <= {worst_e:.1e}"))

    col = max(energy_collapse_error(config, r, rho) for r in reals[:5] for rho in (0.0, 0.5))
    checks.append(Check("energy collapse", col <= 1e-10, f"max relative error {col:.2e}"))

    grid_rho = np.array(config.rho_grid)
    bad = 0
    for r in reals:
        for phase, links in (("forward", ("signaling",)), ("backward", ("ofdma", "signaling"))):
            states = [r.evaluate(phase, float(x)) for x in grid_rho]
            for link in links:
                rates = np.array([s.rate(link) for s in states])
                regimes = np.array([s.regime.value for s in states])
                for reg in np.unique(regimes):
                    seg = rates[regimes == reg]
                    if np.any(np.diff(seg, axis=0) < -1e-9 * max(1.0, np.abs(seg).max())):
                        bad += 1
                        break
    frac = 1.0 - bad / max(1, 3 * len(reals))
    checks.append(Check("rho monotonicity", frac >= 0.99, f"{frac:.1%} of draw-links monotone"))
    if progress:
        for c in checks:
            progress(c.line())
    return checks
