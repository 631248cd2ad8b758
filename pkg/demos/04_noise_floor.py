"""How strongly the rate gain depends on the noise floor.

The default noise floor (thermal noise over 80 MHz, about -95 dBm) puts the
signaling links at roughly 55 dB SNR, where OFDM interference rather than
noise limits them and the gain from removing residual SI is small. Raising
the floor moves the links toward the noise-limited regime.

``python demos/04_noise_floor.py --draws 20``.
"""

import argparse

import numpy as np

from fdrecycle.experiments import ScenarioConfig, sweep_power

parser = argparse.ArgumentParser()
parser.add_argument("--draws", type=int, default=20)
parser.add_argument("--n0", type=float, nargs="*", default=[-95, -80, -70, -60, -55, -50, -45, -40])
args = parser.parse_args()

print(f"{'N0 dBm':>7} {'fwd sig 24':>11} {'fwd sig 28':>11} {'bwd AN 24':>10} {'bwd AN 28':>10} "
      f"{'eta_E 24':>9} {'eta_E 28':>9}")
for n0 in args.n0:
    cfg = ScenarioConfig(n0_dbm=float(n0), n_realizations=args.draws, p_grid_dbm=(24.0, 28.0))
    res = sweep_power(cfg)
    f, b = res["forward"], res["backward"]
    row = np.concatenate([f.eta_r_mean["signaling"], b.eta_r_mean["ofdma"], f.eta_e_mean])
    print(f"{n0:7.0f} " + " ".join(f"{v:10.3f}" for v in row))
