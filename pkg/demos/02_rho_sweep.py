"""Gains against the splitting ratio, numeric and two-point fitted.

``python demos/02_rho_sweep.py --draws 100 --p-dbm 24``. The same data as
CSV comes from ``fd-sim sweep-rho``.
"""

import argparse

import numpy as np

from fdrecycle.experiments import ScenarioConfig, sweep_rho

parser = argparse.ArgumentParser()
parser.add_argument("--draws", type=int, default=100)
parser.add_argument("--p-dbm", type=float, default=24.0)
parser.add_argument("--n0-dbm", type=float, default=None, help="noise floor (default: thermal over 80 MHz)")
args = parser.parse_args()

cfg = ScenarioConfig(p_dbm=args.p_dbm, n_realizations=args.draws)
if args.n0_dbm is not None:
    cfg = cfg.replace(n0_dbm=args.n0_dbm)
results = sweep_rho(cfg)

# %%
for phase, res in results.items():
    p_dbm = cfg.p_dbm - (cfg.backward_offset_db if phase == "backward" else 0.0)
    print(f"\n{phase} phase, SN power {p_dbm:g} dBm, "
          f"{res.n_draws} draws, rho* = {res.rho_star[0]:.3f}")
    fitted = list(res.eta_fit_mean)
    head = " ".join(f"{link:>12} {'(fit)':>8}" if link in fitted else f"{link:>12}" for link in res.links)
    print(f"{'rho':>5} {head} {'eta_E':>8}")
    for k, rho in enumerate(res.axis):
        cells = []
        for link in res.links:
            cells.append(f"{res.eta_r_mean[link][k]:12.3f}")
            if link in fitted:
                cells.append(f"{res.eta_fit_mean[link][k]:8.3f}")
        print(f"{rho:5.2f} {' '.join(cells)} {res.eta_e_mean[k]:8.4f}")
    for link in fitted:
        lo, hi = res.crossover_lower[link][0], res.crossover_upper[link][0]
        if np.isfinite(lo):
            print(f"  {link}: fitted curve beats rho = 1 for rho in [{lo:.3f}, {hi:.3f}]")
