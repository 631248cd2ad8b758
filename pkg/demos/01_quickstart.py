"""Quickstart: one channel draw, evaluated at a few splitting ratios.

Run with ``python demos/01_quickstart.py``.
"""

import numpy as np

from fdrecycle.experiments import ScenarioConfig, draw_realization
from fdrecycle.experiments.pipeline import realization_seeds

cfg = ScenarioConfig(p_dbm=24.0)
print(f"SN power {cfg.p_dbm} dBm, SIC threshold {cfg.p_th_dbm} dBm, noise floor {cfg.n0_dbm:.1f} dBm")
print(f"no residual SI up to rho = {cfg.p_th / cfg.sn_power('forward'):.3f} in the forward phase")

# %%
# Every realization index has its own seed, so this draw is reproducible.
real, retries = draw_realization(cfg, realization_seeds(cfg.seed, 1)[0])
print(f"precoder streams: forward {[pc.streams for pc in real.fwd_precoders]}, "
      f"backward {[pc.streams for pc in real.bwd_precoders]} ({retries} redraws)")

# %%
# Rates are bits per channel use averaged over the two SNs; rho = 1 is the
# receiver without a power divider.
for phase in ("forward", "backward"):
    base = real.evaluate(phase, 1.0)
    print(f"\n{phase} phase")
    print(f"{'rho':>6} {'regime':>15} " + " ".join(f"{link + ' rate':>16}" for link in base.rates)
          + f" {'eta_E':>8}")
    for rho in (0.1, 0.2, 0.3, 0.398, 0.6, 0.8, 1.0):
        rep = real.report(phase, rho, baseline=base)
        rates = " ".join(f"{rep.state.rate(link).mean():16.4f}" for link in base.rates)
        print(f"{rho:6.3f} {rep.regime.value:>15} {rates} {rep.eta_e:8.4f}")

# %%
# The ratio to the undivided receiver is what the sweeps average.
rep = real.report("forward", 0.398)
print("\nforward eta_R at rho = 0.398:", {k: round(v, 3) for k, v in rep.eta_r.items()})
print("recycled fraction of the transmitted energy:", round(rep.eta_e, 4))
np.testing.assert_equal(real.report("forward", 1.0).eta_e, 0.0)
