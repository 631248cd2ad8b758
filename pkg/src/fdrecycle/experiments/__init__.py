"""Monte Carlo experiments over random channel draws."""

from .config import ScenarioConfig, default_n0_dbm, load_config, reference_preset
from .output import emit, to_csv, to_json
from .pipeline import LinkState, PhaseReport, Realization, draw_realization, run_realization
from .sweeps import SweepResult, sweep_power, sweep_rho

__all__ = [
    "ScenarioConfig",
    "default_n0_dbm",
    "load_config",
    "reference_preset",
    "emit",
    "to_csv",
    "to_json",
    "LinkState",
    "PhaseReport",
    "Realization",
    "draw_realization",
    "run_realization",
    "SweepResult",
    "sweep_power",
    "sweep_rho",
]
