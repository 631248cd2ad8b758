"""Monte Carlo sweeps over the splitting ratio and the SN transmit power.

Every realization index ``k`` gets its own child seed, so the channel draw
for ``k`` is the same at every grid point (common random numbers) and does
not depend on how many threads run the sweep. Per-draw records are reduced
in index order, which keeps outputs bit-identical across thread counts.
"""

import logging
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..approximation import (
    anchor_points,
    crossover_interval,
    default_epsilon,
    fit_two_point,
)
from ..exceptions import DegenerateAnchors, OutOfScopeRegime
from ..whitening import Regime, regime_of
from .config import ScenarioConfig
from .pipeline import LINKS, draw_realization, eta_ratio, realization_seeds

__all__ = ["SweepResult", "sweep_rho", "sweep_power", "resolve_threads", "PHASES", "FITTED_LINKS"]

log = logging.getLogger(__name__)

PHASES = ("forward", "backward")
# links whose rate depends on rho and therefore get a two-point fit
FITTED_LINKS = {"forward": ("signaling",), "backward": ("ofdma", "signaling")}
RESAMPLE_FLAG_FRACTION = 1e-3


def resolve_threads(threads: Optional[int] = None) -> int:
    """``threads`` if given, else ``FD_SIM_THREADS``, else 1."""
    if threads is None:
        env = os.environ.get("FD_SIM_THREADS")
        threads = int(env) if env else 1
    if threads < 1:
        raise ValueError("thread count must be at least 1")
    return threads


@dataclass
class SweepResult:
    """Aggregated curves of one phase along one axis.

    All arrays are indexed like ``axis``. Rates are averaged over draws and
    over the two SNs; ``*_se`` are standard errors of the mean over draws.
    ``n_draws`` counts every evaluated draw, so a power sweep reports draws
    per power times the number of powers.
    """

    phase: str
    axis_name: str
    axis: np.ndarray
    links: Tuple[str, ...]
    eta_r_mean: Dict[str, np.ndarray]
    eta_r_se: Dict[str, np.ndarray]
    rate_mean: Dict[str, np.ndarray]
    rate_se: Dict[str, np.ndarray]
    eta_fit_mean: Dict[str, np.ndarray]
    rate_fit_mean: Dict[str, np.ndarray]
    eta_e_mean: np.ndarray
    eta_e_se: np.ndarray
    eta_e_approx_mean: np.ndarray
    rho_star: np.ndarray
    crossover_lower: Dict[str, np.ndarray]
    crossover_upper: Dict[str, np.ndarray]
    fit_summary: Dict[str, Dict[str, Tuple[float, float]]]
    n_draws: int
    n_resampled: int
    monotone_fraction: Dict[str, float] = field(default_factory=dict)
    extras: Dict[str, np.ndarray] = field(default_factory=dict)

    @property
    def flagged(self) -> bool:
        total = self.n_draws + self.n_resampled
        return total > 0 and self.n_resampled / total >= RESAMPLE_FLAG_FRACTION

    def __post_init__(self):
        n = len(self.axis)
        arrays = [self.eta_e_mean, self.eta_e_se, self.eta_e_approx_mean, self.rho_star]
        for d in (self.eta_r_mean, self.eta_r_se, self.rate_mean, self.rate_se, self.eta_fit_mean,
                  self.rate_fit_mean, self.crossover_lower, self.crossover_upper):
            arrays.extend(d.values())
        if any(len(a) != n for a in arrays):
            raise ValueError("every series must have one value per axis point")

    def columns(self) -> Dict[str, np.ndarray]:
        """Flat ``name -> series`` view used by the writers."""
        cols = {}
        for link in self.links:
            pre = f"{self.phase}.{link}."
            cols[pre + "eta_r_mean"] = self.eta_r_mean[link]
            cols[pre + "eta_r_se"] = self.eta_r_se[link]
            cols[pre + "rate_mean"] = self.rate_mean[link]
            cols[pre + "rate_se"] = self.rate_se[link]
            if link in self.eta_fit_mean:
                cols[pre + "eta_fit_mean"] = self.eta_fit_mean[link]
                cols[pre + "rate_fit_mean"] = self.rate_fit_mean[link]
                cols[pre + "crossover_lower"] = self.crossover_lower[link]
                cols[pre + "crossover_upper"] = self.crossover_upper[link]
        cols[f"{self.phase}.eta_e_mean"] = self.eta_e_mean
        cols[f"{self.phase}.eta_e_se"] = self.eta_e_se
        cols[f"{self.phase}.eta_e_approx_mean"] = self.eta_e_approx_mean
        cols[f"{self.phase}.rho_star"] = self.rho_star
        return cols

    def summary(self) -> dict:
        return {
            "phase": self.phase,
            "n_draws": self.n_draws,
            "n_resampled": self.n_resampled,
            "flagged": self.flagged,
            "monotone_fraction": dict(self.monotone_fraction),
            "fit_summary": self.fit_summary,
        }


# per-draw evaluation


@dataclass
class _Points:
    """The rho values one draw is evaluated at, with named positions."""

    p: float
    p_th: float
    p_sat: float
    rhos: np.ndarray
    named: Dict[str, int]

    @classmethod
    def build(cls, p, p_th, p_sat, extra: Sequence[float] = ()):
        eps = default_epsilon(p_th)
        cands = {"nosi_1": None, "nosi_2": None, "si_1": None, "si_2": None}
        r1, r2 = anchor_points(Regime.NO_RESIDUAL_SI, p, p_th, p_sat)
        cands["nosi_1"], cands["nosi_2"] = r1, r2
        if p > p_th + eps:
            s1, s2 = anchor_points(Regime.RESIDUAL_SI, p, p_th, p_sat, eps)
            if s1 < s2:
                cands["si_1"], cands["si_2"] = s1, s2
        cands["star_nosi"] = min(1.0, p_th / p)
        cands["star_si"] = min(1.0, p_sat / p)
        cands["one"] = 1.0
        values = sorted({float(v) for v in list(extra) + [v for v in cands.values() if v is not None]})
        rhos = np.array(values)
        named = {k: values.index(float(v)) for k, v in cands.items() if v is not None}
        return cls(p, p_th, p_sat, rhos, named)

    def index_of(self, values):
        return np.array([int(np.flatnonzero(self.rhos == float(v))[0]) for v in values], dtype=int)


def _fit_or_none(rho_1, r_1, rho_2, r_2, regime, eps=0.0):
    try:
        return fit_two_point(rho_1, r_1, rho_2, r_2, regime, eps)
    except DegenerateAnchors:
        return None


def _fit_curve(points: _Points, rates_sn, grid_idx):
    """Fitted rate of one SN along the grid plus the fit objects (or None)."""
    nm = points.named
    rhos = points.rhos
    nosi = _fit_or_none(rhos[nm["nosi_1"]], rates_sn[nm["nosi_1"]], rhos[nm["nosi_2"]],
                        rates_sn[nm["nosi_2"]], Regime.NO_RESIDUAL_SI)
    si = None
    if "si_1" in nm:
        si = _fit_or_none(rhos[nm["si_1"]], rates_sn[nm["si_1"]], rhos[nm["si_2"]], rates_sn[nm["si_2"]],
                          Regime.RESIDUAL_SI, default_epsilon(points.p_th))
    out = np.full(len(grid_idx), np.nan)
    for k, g in enumerate(grid_idx):
        rho = rhos[g]
        regime = regime_of(rho, points.p, points.p_th, points.p_sat)
        if regime is Regime.SATURATED:
            out[k] = 0.0
        elif regime is Regime.NO_RESIDUAL_SI and nosi is not None:
            out[k] = nosi(rho)
        elif regime is Regime.RESIDUAL_SI and si is not None:
            out[k] = si(rho)
    return out, nosi, si


def _monotone(points: _Points, grid_idx, rates_sn) -> bool:
    rhos = points.rhos[grid_idx]
    r = rates_sn[grid_idx]
    regimes = np.array([regime_of(x, points.p, points.p_th, points.p_sat).value for x in rhos])
    for reg in np.unique(regimes):
        seg = r[regimes == reg]
        if np.any(np.diff(seg) < -1e-9 * max(1.0, float(np.max(np.abs(seg))))):
            return False
    return True


def _draw_record(config: ScenarioConfig, seed_seq, phases, points_by_phase, grid_by_phase):
    """Everything the reducers need from one realization, as plain arrays."""
    real, retries = draw_realization(config, seed_seq)
    rec = {"resamples": retries}
    for phase in phases:
        pts = points_by_phase[phase]
        grid_idx = grid_by_phase[phase]
        states = [real.evaluate(phase, float(r)) for r in pts.rhos]
        base = states[pts.named["one"]]
        d = {}
        for link in LINKS[phase]:
            rates = np.array([s.rate(link) for s in states])  # (n_points, 2)
            d[link] = {
                "rate": rates.mean(axis=1),
                "eta": np.array([eta_ratio(s.rate(link), base.rate(link)) for s in states]),
                "rate_sn": rates,
            }
            if link in FITTED_LINKS[phase]:
                fits = [_fit_curve(pts, rates[:, sn], grid_idx) for sn in range(2)]
                fitted = np.array([f[0] for f in fits])  # (2, n_grid)
                with np.errstate(divide="ignore", invalid="ignore"):
                    eta_fit = fitted / base.rate(link)[:, None]
                d[link]["fit_rate"] = fitted.mean(axis=0)
                d[link]["fit_eta"] = eta_fit.mean(axis=0)
                d[link]["params"] = [(f[1], f[2]) for f in fits]
                d[link]["monotone"] = all(_monotone(pts, grid_idx, rates[:, sn]) for sn in range(2))
        d["eta_e"] = np.array([np.mean([e.eta_e for e in s.energy]) for s in states])
        d["eta_e_approx"] = np.array([np.mean([e.approx / e.e_tx for e in s.energy]) for s in states])
        rec[phase] = d
    return rec


def _run_draws(config, phases, points_by_phase, grid_by_phase, threads):
    seeds = realization_seeds(config.seed, config.n_realizations)

    def work(seed_seq):
        return _draw_record(config, seed_seq, phases, points_by_phase, grid_by_phase)

    if threads == 1 or len(seeds) <= 1:
        return [work(s) for s in seeds]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(work, seeds))


# reduction


def _mean_se(stack: np.ndarray):
    """Mean and standard error over axis 0, ignoring NaN draws."""
    if stack.shape[0] == 0:
        nan = np.full(stack.shape[1:], np.nan)
        return nan, nan.copy()
    with warnings.catch_warnings():
        # all-NaN columns (no fit on any draw) are expected and stay NaN
        warnings.simplefilter("ignore", RuntimeWarning)
        mean = np.nanmean(stack, axis=0)
        n = np.sum(~np.isnan(stack), axis=0)
        sd = np.nanstd(stack, axis=0, ddof=1) if stack.shape[0] > 1 else np.zeros_like(mean)
        se = np.where(n > 1, sd / np.sqrt(np.maximum(n, 1)), 0.0)
    return mean, se


def _fit_summary(records, phase, link):
    out = {}
    for k, name in ((0, Regime.NO_RESIDUAL_SI.value), (1, Regime.RESIDUAL_SI.value)):
        cs = [pair[k].c for r in records for pair in r[phase][link]["params"] if pair[k] is not None]
        phis = [pair[k].phi for r in records for pair in r[phase][link]["params"] if pair[k] is not None]
        if cs:
            out[name] = (float(np.median(cs)), float(np.median(phis)))
    return out


def mean_curve_crossover(points: _Points, mean_rates: np.ndarray) -> Tuple[float, float]:
    """Closed-form crossover interval from a fit through the draw-averaged anchor rates.

    Returns ``(nan, nan)`` outside ``p_th < p <= p_sat`` or when no fit exists.
    """
    nm = points.named
    fit = _fit_or_none(points.rhos[nm["nosi_1"]], mean_rates[nm["nosi_1"]],
                       points.rhos[nm["nosi_2"]], mean_rates[nm["nosi_2"]], Regime.NO_RESIDUAL_SI)
    if fit is None:
        return float("nan"), float("nan")
    try:
        iv = crossover_interval(fit, mean_rates[nm["one"]], points.p, points.p_th, points.p_sat)
    except OutOfScopeRegime:
        return float("nan"), float("nan")
    return iv.lower, iv.upper


def _objective(phase, rate_means):
    if phase == "forward":
        return rate_means["signaling"]
    return rate_means["signaling"] + rate_means["ofdma"]


def _rho_star_index(phase, points: _Points, rate_means) -> int:
    """Index of the rate-maximising candidate among the two regime optima."""
    obj = _objective(phase, rate_means)
    a, b = points.named["star_nosi"], points.named["star_si"]
    return b if obj[b] > obj[a] else a


def _stack(records, phase, link, key):
    return np.array([r[phase][link][key] for r in records])


def sweep_rho(config: ScenarioConfig, phases: Sequence[str] = PHASES, threads: Optional[int] = None,
              ) -> Dict[str, SweepResult]:
    """Curves of every link against ``config.rho_grid`` at ``config.p_dbm``."""
    threads = resolve_threads(threads)
    grid = np.array(config.rho_grid, dtype=float)
    points_by_phase, grid_by_phase = {}, {}
    for phase in phases:
        pts = _Points.build(config.sn_power(phase), config.p_th, config.p_sat, grid)
        points_by_phase[phase] = pts
        grid_by_phase[phase] = pts.index_of(grid)
    records = _run_draws(config, phases, points_by_phase, grid_by_phase, threads)
    n_res = int(sum(r["resamples"] for r in records))
    out = {}
    for phase in phases:
        pts, gi = points_by_phase[phase], grid_by_phase[phase]
        n, n_pts = len(grid), len(pts.rhos)
        eta_m, eta_s, rate_m, rate_s, fit_eta, fit_rate, xl, xu = {}, {}, {}, {}, {}, {}, {}, {}
        full_means = {}
        mono, summ = {}, {}
        for link in LINKS[phase]:
            em, es = _mean_se(_stack(records, phase, link, "eta").reshape(len(records), n_pts))
            rm, rs = _mean_se(_stack(records, phase, link, "rate").reshape(len(records), n_pts))
            full_means[link] = rm
            eta_m[link], eta_s[link], rate_m[link], rate_s[link] = em[gi], es[gi], rm[gi], rs[gi]
            if link in FITTED_LINKS[phase]:
                fit_eta[link] = _mean_se(_stack(records, phase, link, "fit_eta").reshape(len(records), n))[0]
                fit_rate[link] = _mean_se(_stack(records, phase, link, "fit_rate").reshape(len(records), n))[0]
                lo, hi = mean_curve_crossover(pts, rm) if records else (np.nan, np.nan)
                xl[link], xu[link] = np.full(n, lo), np.full(n, hi)
                mono[link] = float(np.mean([r[phase][link]["monotone"] for r in records])) if records else 1.0
                summ[link] = _fit_summary(records, phase, link)
        ee_m, ee_s = _mean_se(np.array([r[phase]["eta_e"] for r in records]).reshape(len(records), n_pts))
        ea_m, _ = _mean_se(np.array([r[phase]["eta_e_approx"] for r in records]).reshape(len(records), n_pts))
        star = pts.rhos[_rho_star_index(phase, pts, full_means)] if records else np.nan
        out[phase] = SweepResult(
            phase=phase, axis_name="rho", axis=grid, links=LINKS[phase],
            eta_r_mean=eta_m, eta_r_se=eta_s, rate_mean=rate_m, rate_se=rate_s,
            eta_fit_mean=fit_eta, rate_fit_mean=fit_rate,
            eta_e_mean=ee_m[gi], eta_e_se=ee_s[gi], eta_e_approx_mean=ea_m[gi],
            rho_star=np.full(n, star), crossover_lower=xl, crossover_upper=xu,
            fit_summary=summ, n_draws=len(records), n_resampled=n_res, monotone_fraction=mono,
            extras={"points": pts.rhos, **{f"rate_mean_points.{k}": v for k, v in full_means.items()}},
        )
    return out


def sweep_power(config: ScenarioConfig, phases: Sequence[str] = PHASES, threads: Optional[int] = None,
                ) -> Dict[str, SweepResult]:
    """Optimal splitting ratio and the resulting gains for each power in ``config.p_grid_dbm``.

    The axis of each result is the SN power actually used in that phase, so
    the backward axis sits ``backward_offset_db`` below the forward one.
    """
    threads = resolve_threads(threads)
    p_axis = np.array(config.p_grid_dbm, dtype=float)
    per_p = []
    for p_dbm in p_axis:
        cfg = config.replace(p_dbm=float(p_dbm), rho_grid=())
        pts_by, grid_by = {}, {}
        for phase in phases:
            pts = _Points.build(cfg.sn_power(phase), cfg.p_th, cfg.p_sat)
            # per-draw fits are only needed at the two rho* candidates
            pts_by[phase] = pts
            grid_by[phase] = np.array([pts.named["star_nosi"], pts.named["star_si"]])
        per_p.append((cfg, pts_by, _run_draws(cfg, phases, pts_by, grid_by, threads)))
    out = {}
    n = len(p_axis)
    for phase in phases:
        links = LINKS[phase]
        keys = ("eta_r_mean", "eta_r_se", "rate_mean", "rate_se", "eta_fit_mean", "rate_fit_mean",
                "crossover_lower", "crossover_upper")
        series = {k: {link: np.full(n, np.nan) for link in links} for k in keys}
        for k in ("eta_fit_mean", "rate_fit_mean", "crossover_lower", "crossover_upper"):
            series[k] = {link: np.full(n, np.nan) for link in FITTED_LINKS[phase]}
        ee_m, ee_s, ea_m, star = (np.full(n, np.nan) for _ in range(4))
        n_draws = n_res = 0
        mono_acc = {link: [] for link in FITTED_LINKS[phase]}
        summ = {}
        for i, (cfg, pts_by, records) in enumerate(per_p):
            if not records:
                continue
            pts = pts_by[phase]
            n_draws += len(records)
            n_res += int(sum(r["resamples"] for r in records))
            means = {}
            stats = {}
            for link in links:
                em, es = _mean_se(_stack(records, phase, link, "eta"))
                rm, rs = _mean_se(_stack(records, phase, link, "rate"))
                means[link] = rm
                stats[link] = (em, es, rm, rs)
            k = _rho_star_index(phase, pts, means)
            star[i] = pts.rhos[k]
            for link in links:
                em, es, rm, rs = stats[link]
                series["eta_r_mean"][link][i] = em[k]
                series["eta_r_se"][link][i] = es[k]
                series["rate_mean"][link][i] = rm[k]
                series["rate_se"][link][i] = rs[k]
                if link in FITTED_LINKS[phase]:
                    lo, hi = mean_curve_crossover(pts, rm)
                    series["crossover_lower"][link][i] = lo
                    series["crossover_upper"][link][i] = hi
                    col = 0 if k == pts.named["star_nosi"] else 1
                    series["rate_fit_mean"][link][i] = _mean_se(_stack(records, phase, link, "fit_rate"))[0][col]
                    series["eta_fit_mean"][link][i] = _mean_se(_stack(records, phase, link, "fit_eta"))[0][col]
                    mono_acc[link].extend(r[phase][link]["monotone"] for r in records)
                    summ.setdefault(link, {})[f"{p_axis[i]:g}"] = _fit_summary(records, phase, link)
            m, s = _mean_se(np.array([r[phase]["eta_e"] for r in records]))
            ee_m[i], ee_s[i] = m[k], s[k]
            ea_m[i] = _mean_se(np.array([r[phase]["eta_e_approx"] for r in records]))[0][k]
        out[phase] = SweepResult(
            phase=phase, axis_name="p_dbm",
            axis=np.array([per_p[i][0].p_dbm - (config.backward_offset_db if phase == "backward" else 0.0)
                           for i in range(n)]),
            links=links, eta_r_mean=series["eta_r_mean"], eta_r_se=series["eta_r_se"],
            rate_mean=series["rate_mean"], rate_se=series["rate_se"],
            eta_fit_mean=series["eta_fit_mean"], rate_fit_mean=series["rate_fit_mean"],
            eta_e_mean=ee_m, eta_e_se=ee_s, eta_e_approx_mean=ea_m, rho_star=star,
            crossover_lower=series["crossover_lower"], crossover_upper=series["crossover_upper"],
            fit_summary=summ, n_draws=n_draws, n_resampled=n_res,
            monotone_fraction={k: float(np.mean(v)) if v else 1.0 for k, v in mono_acc.items()},
        )
    return out

