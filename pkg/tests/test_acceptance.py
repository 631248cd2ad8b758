"""Acceptance suite: one test per criterion, each reporting a PASS/FAIL line.

The expensive Monte Carlo runs are session fixtures shared between the
criteria that read them. Expect roughly ten minutes on one core.
"""

import time

import numpy as np
import pytest

from fdrecycle.approximation import crossover_interval, fit_rate_curve, fit_two_point, numeric_crossover
from fdrecycle.exceptions import NullspaceDimensionMismatch
from fdrecycle.experiments import ScenarioConfig, draw_realization, sweep_power, sweep_rho, to_csv
from fdrecycle.experiments.pipeline import realization_seeds
from fdrecycle.experiments.validate import energy_collapse_error, whitening_deviation
from fdrecycle.ofdm import OfdmGrid
from fdrecycle.precoding import backward_constraint, backward_nullspace, demod_operator, forward_nullspace
from fdrecycle.rates import waterfill
from fdrecycle.whitening import Regime

from conftest import ACCEPTANCE_LINES, random_pair

N_DRAWS = 500
FIT_LINKS = (("forward", "signaling"), ("backward", "ofdma"), ("backward", "signaling"))


def criterion(number, title, passed, detail):
    line = f"[{'PASS' if passed else 'FAIL'}] {number:2d}. {title}: {detail}"
    ACCEPTANCE_LINES[number] = line
    print(line)
    assert passed, line


def _timed(fn, *args, **kwargs):
    t0 = time.perf_counter()
    out = fn(*args, **kwargs)
    return out, time.perf_counter() - t0


# shared runs


@pytest.fixture(scope="session")
def power_run():
    """The default preset swept over SN power, both phases, 500 draws, one thread."""
    return _timed(sweep_power, ScenarioConfig(n_realizations=N_DRAWS), threads=1)


@pytest.fixture(scope="session")
def power_run_short_link():
    cfg = ScenarioConfig(n_realizations=N_DRAWS, d_ss=15.0, p_grid_dbm=(24.0, 28.0))
    return sweep_power(cfg, phases=("forward",), threads=1)


@pytest.fixture(scope="session")
def rho_run():
    return sweep_rho(ScenarioConfig(n_realizations=N_DRAWS), threads=1)


@pytest.fixture(scope="session")
def draws():
    cfg = ScenarioConfig()
    return cfg, [draw_realization(cfg, s)[0] for s in realization_seeds(cfg.seed, 200)]


# structural criteria


def test_01_zero_interference():
    grid = OfdmGrid(64, 16)
    rng = np.random.default_rng(101)
    worst = {"forward own link": 0.0, "forward cross link": 0.0, "backward": 0.0}

    def rel(op, gamma):
        return np.abs(op @ gamma).max() / np.abs(op).max()

    t0 = time.perf_counter()
    for _ in range(200):
        c = {k: random_pair(rng, grid)[0] for k in ("h11", "h12", "h21", "h22", "hs")}
        for i, j in ((1, 2), (2, 1)):
            g = forward_nullspace(c[f"h{i}{i}"], c[f"h{i}{j}"], grid, i).gamma
            own = demod_operator(grid, i) @ c[f"h{i}{i}"].lower
            cross = demod_operator(grid, j) @ c[f"h{i}{j}"].lower
            worst["forward own link"] = max(worst["forward own link"], rel(own, g))
            worst["forward cross link"] = max(worst["forward cross link"], rel(cross, g))
            gb = backward_nullspace(c["hs"], grid, j).gamma
            worst["backward"] = max(worst["backward"], rel(backward_constraint(c["hs"], grid, j), gb))
    elapsed = time.perf_counter() - t0
    ok = all(v <= 1e-8 for v in worst.values()) and elapsed < 30
    detail = ", ".join(f"{k} {v:.1e}" for k, v in worst.items()) + f"; {elapsed:.1f} s"
    criterion(1, "null-space residual <= 1e-8 over 200 draws", ok, detail)


def test_02_nullspace_dimensions():
    grid = OfdmGrid(64, 16)
    rng = np.random.default_rng(202)
    n, good = 1000, 0
    for _ in range(n):
        c = {k: random_pair(rng, grid)[0] for k in ("h11", "h12", "h21", "h22", "hs")}
        try:
            dims = [forward_nullspace(c["h11"], c["h12"], grid, 1).streams,
                    forward_nullspace(c["h22"], c["h21"], grid, 2).streams,
                    backward_nullspace(c["hs"], grid, 1).streams,
                    backward_nullspace(c["hs"], grid, 2).streams]
        except NullspaceDimensionMismatch:
            continue
        good += dims == [16, 16, 48, 48]
    criterion(2, "precoder dimensions 16 / 48", good / n >= 0.999, f"{good}/{n} draws exact")


def _dense_kappa(gains, budget):
    """Water level by grid search, zooming twice around the best grid point."""
    inv = 1.0 / gains

    def mismatch(k):
        return np.abs(np.clip(k[:, None] - inv[None, :], 0, None).sum(axis=1) - budget)

    lo, hi = 0.0, budget + inv.max()
    for _ in range(3):
        ks = np.linspace(lo, hi, 100_001)
        best = ks[np.argmin(mismatch(ks))]
        step = ks[1] - ks[0]
        lo, hi = best - 2 * step, best + 2 * step
    return best


def test_03_waterfilling_oracle():
    rng = np.random.default_rng(303)
    worst_p, worst_kkt = 0.0, 0.0
    for _ in range(100):
        n = int(rng.integers(1, 9))
        g = rng.uniform(0.05, 10.0, n)
        budget = float(rng.uniform(0.1, 10.0))
        a = waterfill(g, budget)
        ref = np.clip(_dense_kappa(g, budget) - 1 / g, 0, None)
        worst_p = max(worst_p, np.abs(a.per_channel - ref).max())
        p, k = a.per_channel, a.water_level
        act = p > 0
        kkt = [abs(p.sum() - budget) / budget,
               np.abs(p[act] - (k - 1 / g[act])).max() / k,
               max(0.0, np.max(k - 1 / g[~act], initial=0.0)) / k,
               max(0.0, -p.min())]
        worst_kkt = max(worst_kkt, max(kkt))
    ok = worst_p <= 1e-6 and worst_kkt <= 1e-12
    criterion(3, "water-filling vs dense grid", ok, f"max power gap {worst_p:.1e}, max KKT violation {worst_kkt:.1e}")


def test_04_whitening_identity(draws):
    cfg, reals = draws
    worst = max(whitening_deviation(cfg, r, rho) for r in reals[:100] for rho in (0.25, 0.75, 1.0))
    criterion(4, "whitening identity on 100 draws", worst <= 1e-8, f"max |W C W^H - I| = {worst:.1e}")


def test_05_baseline_identity(draws, rho_run):
    _, reals = draws
    bad = 0
    for r in reals:
        for phase in ("forward", "backward"):
            rep = r.report(phase, 1.0)
            bad += any(v != 1.0 for v in rep.eta_r.values()) or rep.eta_e != 0.0
    sweep_ok = all(res.eta_r_mean[link][-1] == 1.0 and res.eta_e_mean[-1] == 0.0
                   for res in rho_run.values() for link in res.links)
    criterion(5, "eta_R(1) = 1 and eta_E(1) = 0", bad == 0 and sweep_ok,
              f"{bad} deviating draw-phases of {2 * len(reals)}; sweep endpoint exact: {sweep_ok}")


def test_06_rho_monotonicity(rho_run):
    fracs = {f"{ph} {link}": rho_run[ph].monotone_fraction[link] for ph, link in FIT_LINKS}
    ok = all(v >= 0.99 for v in fracs.values())
    criterion(6, "rates nondecreasing in rho within each regime", ok,
              ", ".join(f"{k} {v:.1%}" for k, v in fracs.items()))


def test_07_fit_quality(draws, rho_run):
    cfg, reals = draws
    worst_anchor = 0.0
    for r in reals[:50]:
        for phase, link in FIT_LINKS:
            p = cfg.sn_power(phase)
            for sn in range(2):
                def f(rho):
                    return r.evaluate(phase, rho, with_energy=False).rate(link)[sn]
                for regime in (Regime.NO_RESIDUAL_SI, Regime.RESIDUAL_SI):
                    fit = fit_rate_curve(f, regime, p, cfg.p_th, cfg.p_sat)
                    for rho, rate in fit.anchor_points:
                        worst_anchor = max(worst_anchor, abs(fit(rho) - rate))
    worst_track = 0.0
    for phase, link in FIT_LINKS:
        res = rho_run[phase]
        interior = (res.axis > 0) & (res.axis < 1)
        gap = np.abs(res.rate_fit_mean[link] - res.rate_mean[link])[interior]
        worst_track = max(worst_track, np.nanmax(gap))
    ok = worst_anchor <= 1e-10 and worst_track <= 0.1
    criterion(7, "two-point fits", ok,
              f"anchor error {worst_anchor:.1e}, max |fit - mean rate| at interior rho {worst_track:.3f} bit")


def _crossover_grid(cfg, phase):
    """25 points up to P_th/P, the half-way anchor, zero and the rho = 1 baseline."""
    top = cfg.p_th / cfg.sn_power(phase)
    return np.unique(np.concatenate([[0.0, top / 2, 1.0], np.linspace(top / 25, top, 25)])), top


def _mean_curves(cfg, n_draws):
    """Draw-averaged rate (both SNs) of each fitted link on its phase's crossover grid."""
    grids = {phase: _crossover_grid(cfg, phase)[0] for phase in ("forward", "backward")}
    acc = {key: np.zeros(len(grids[key[0]])) for key in FIT_LINKS}
    for s in realization_seeds(cfg.seed, n_draws):
        real, _ = draw_realization(cfg, s)
        for phase, rhos in grids.items():
            states = [real.evaluate(phase, float(x), with_energy=False) for x in rhos]
            for ph, link in FIT_LINKS:
                if ph == phase:
                    acc[(ph, link)] += [st.rate(link).mean() for st in states]
    return {k: v / n_draws for k, v in acc.items()}


def test_08_crossover_closed_form():
    gaps = {}
    for p_dbm in (24.0, 28.0):
        cfg = ScenarioConfig(p_dbm=p_dbm)
        curves = _mean_curves(cfg, 200)
        for phase, link in FIT_LINKS:
            rhos, top = _crossover_grid(cfg, phase)
            p = cfg.sn_power(phase)
            mean = curves[(phase, link)]
            at = dict(zip(rhos, mean))
            fit = fit_two_point(top, at[top], top / 2, at[top / 2], Regime.NO_RESIDUAL_SI)
            iv = crossover_interval(fit, at[1.0], p, cfg.p_th, cfg.p_sat)
            inside = rhos <= top

            def interp(x):
                return np.interp(x, rhos[inside], mean[inside])
            oracle = numeric_crossover(interp, at[1.0], 0.0, top, xtol=1e-7)
            gaps[(p_dbm, f"{phase} {link}")] = abs(min(iv.lower, top) - oracle)
    ok = all(v <= 0.02 for v in gaps.values())
    criterion(8, "closed-form crossover vs bisection on mean curves", ok,
              ", ".join(f"P={k[0]:g} {k[1]} {v:.4f}" for k, v in gaps.items()))


# headline numbers


def test_09_forward_signaling_gain(power_run, power_run_short_link):
    (res, elapsed) = power_run
    fwd = res["forward"]
    bands = {24.0: (1.25, 1.45), 28.0: (1.10, 1.30)}
    parts, ok = [], elapsed < 600
    for label, r in (("d_ss=20", fwd), ("d_ss=15", power_run_short_link["forward"])):
        for p, (lo, hi) in bands.items():
            v = r.eta_r_mean["signaling"][np.flatnonzero(r.axis == p)[0]]
            ok &= lo <= v <= hi
            parts.append(f"{label} P={p:g} {v:.3f} in [{lo}, {hi}]")
    criterion(9, "forward signaling eta_R at rho*", ok, "; ".join(parts) + f"; sweep {elapsed:.0f} s")


def test_10_backward_signal_gain(power_run):
    res, _ = power_run
    bwd = res["backward"]
    parts, ok = [], True
    for p_fwd in (24.0, 28.0):
        i = np.flatnonzero(bwd.axis == p_fwd - 3.0)[0]
        v = bwd.eta_r_mean["ofdma"][i]
        ok &= 1.25 <= v <= 1.45
        parts.append(f"P={p_fwd:g} (SN {p_fwd - 3:g} dBm) {v:.3f}")
    criterion(10, "backward AN-to-SN eta_R at rho* in [1.25, 1.45]", ok, "; ".join(parts))


def test_11_energy_recycling(power_run):
    res, _ = power_run
    cfg = ScenarioConfig()
    fwd, bwd = res["forward"], res["backward"]
    in_band = bool(np.all((fwd.eta_e_mean >= 0.020) & (fwd.eta_e_mean <= 0.060)))
    alpha_c = 10 ** (cfg.alpha_c_db / 10)
    ratio = np.concatenate([fwd.eta_e_mean, bwd.eta_e_mean]) / alpha_c
    bounded = bool(np.all(ratio <= cfg.beta))
    rel = np.abs(fwd.eta_e_mean - fwd.eta_e_approx_mean) / fwd.eta_e_approx_mean
    ok = in_band and bounded and rel.max() < 0.05
    criterion(11, "energy recycling", ok,
              f"eta*_E over P = {np.array2string(fwd.eta_e_mean, precision=4)}; "
              f"max eta*_E/alpha_c {ratio.max():.3f} <= beta {cfg.beta}; exact vs approx {rel.max():.2%}")


def test_12_energy_collapse(draws):
    cfg, reals = draws
    worst = max(energy_collapse_error(cfg, r, rho) for r in reals[:50] for rho in (0.0, 0.3, 0.7, 0.99))
    criterion(12, "energy collapses to beta alpha_c (1 - rho) P", worst <= 1e-10, f"max relative error {worst:.1e}")


def test_13_thread_determinism():
    cfg = ScenarioConfig(n_realizations=16, seed=2024)
    one = to_csv(sweep_rho(cfg, threads=1), cfg)
    eight = to_csv(sweep_rho(cfg, threads=8), cfg)
    criterion(13, "CSV identical across 1 and 8 threads", one == eight, f"{len(one)} bytes compared")
