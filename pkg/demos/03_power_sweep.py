"""Optimal splitting ratio, rate gain and recycled energy against SN power.

``python demos/03_power_sweep.py --draws 100``.
"""

import argparse

from fdrecycle.experiments import ScenarioConfig, sweep_power

parser = argparse.ArgumentParser()
parser.add_argument("--draws", type=int, default=100)
args = parser.parse_args()

cfg = ScenarioConfig(n_realizations=args.draws)
results = sweep_power(cfg)

# %%
for phase, res in results.items():
    print(f"\n{phase} phase ({cfg.n_realizations} draws at each power)")
    print(f"{'P dBm':>6} {'rho*':>7} " + " ".join(f"{'eta_R ' + link:>16}" for link in res.links)
          + f" {'eta_E':>8} {'approx':>8}")
    for k, p in enumerate(res.axis):
        gains = " ".join(f"{res.eta_r_mean[link][k]:16.3f}" for link in res.links)
        print(f"{p:6.1f} {res.rho_star[k]:7.3f} {gains} {res.eta_e_mean[k]:8.4f} {res.eta_e_approx_mean[k]:8.4f}")
