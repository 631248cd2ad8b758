"""Scenario configuration and its JSON representation."""

import dataclasses
import json
from dataclasses import dataclass, field
from importlib import resources
from typing import List, Optional, Tuple

import numpy as np

from ..channel import LinkBudget, db_to_linear, dbm_to_linear, exp_pdp, indoor_path_loss
from ..exceptions import ConfigError
from ..ofdm import OfdmGrid

__all__ = ["ScenarioConfig", "load_config", "reference_preset", "default_n0_dbm"]


def default_n0_dbm(bandwidth_hz: float = 80e6) -> float:
    """Thermal noise power over ``bandwidth_hz`` at 290 K (-174 dBm/Hz)."""
    return -174.0 + 10.0 * np.log10(bandwidth_hz)


@dataclass(frozen=True)
class ScenarioConfig:
    """Every scalar of the four-node scenario.

    Powers are in dBm, distances in metres, gains in dB. ``p_dbm`` is the
    SN transmit power of the forward phase; the backward phase uses
    ``p_dbm - backward_offset_db``.
    """

    n_subcarriers: int = 64
    cp_len: int = 16
    max_delay: int = 16
    decay_ratio: float = 2.0
    set_1: Optional[Tuple[int, ...]] = None
    d_sa: float = 10.0
    d_ss: float = 20.0
    f_c: float = 1.8e9
    path_loss_coeff: float = 20.0
    p_dbm: float = 24.0
    p_th_dbm: float = 20.0
    p_sat_dbm: float = 28.0
    p_a_dbm: float = 20.0
    power_split_fwd: float = 0.5
    backward_offset_db: float = 3.0
    alpha_c_db: float = -10.0
    alpha_m_db: float = -35.0
    beta: float = 0.7
    n0_dbm: float = field(default_factory=default_n0_dbm)
    rho_grid: Tuple[float, ...] = tuple(np.round(np.linspace(0.0, 1.0, 21), 12))
    p_grid_dbm: Tuple[float, ...] = (23.0, 24.0, 25.0, 26.0, 27.0, 28.0)
    n_realizations: int = 500
    seed: int = 0
    max_retries: int = 10

    def __post_init__(self):
        if self.p_th_dbm > self.p_sat_dbm:
            raise ConfigError("p_th_dbm must not exceed p_sat_dbm")
        if not 0.0 < self.beta <= 1.0:
            raise ConfigError(f"beta must lie in (0, 1], got {self.beta}")
        if not 0.0 <= self.power_split_fwd <= 1.0:
            raise ConfigError("power_split_fwd must lie in [0, 1]")
        if any(not 0.0 <= r <= 1.0 for r in self.rho_grid):
            raise ConfigError("rho values must lie in [0, 1]")
        if not 0 <= self.max_delay <= self.cp_len:
            raise ConfigError("max_delay must be between 0 and cp_len")
        if self.n_realizations < 0 or self.seed < 0:
            raise ConfigError("n_realizations and seed must be nonnegative")
        if self.d_sa < 1 or self.d_ss < 1:
            raise ConfigError("distances below 1 m are outside the path-loss model")
        try:
            self.grid
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        object.__setattr__(self, "rho_grid", tuple(float(r) for r in self.rho_grid))
        object.__setattr__(self, "p_grid_dbm", tuple(float(p) for p in self.p_grid_dbm))
        if self.set_1 is not None:
            object.__setattr__(self, "set_1", tuple(int(k) for k in self.set_1))

    # derived quantities

    @property
    def grid(self) -> OfdmGrid:
        return OfdmGrid(self.n_subcarriers, self.cp_len, self.set_1)

    @property
    def pdp(self):
        return exp_pdp(self.max_delay, self.decay_ratio)

    @property
    def n0(self) -> float:
        return dbm_to_linear(self.n0_dbm)

    @property
    def p_th(self) -> float:
        return dbm_to_linear(self.p_th_dbm)

    @property
    def p_sat(self) -> float:
        return dbm_to_linear(self.p_sat_dbm)

    @property
    def p_a(self) -> float:
        return dbm_to_linear(self.p_a_dbm)

    def sn_power(self, phase: str) -> float:
        if phase == "forward":
            return dbm_to_linear(self.p_dbm)
        if phase == "backward":
            return dbm_to_linear(self.p_dbm - self.backward_offset_db)
        raise ValueError(f"unknown phase {phase!r}")

    def link_budget(self) -> LinkBudget:
        a_sa = indoor_path_loss(self.f_c, self.d_sa, self.path_loss_coeff)
        return LinkBudget(
            alpha_sa=((a_sa, a_sa), (a_sa, a_sa)),
            alpha_b=indoor_path_loss(self.f_c, self.d_ss, self.path_loss_coeff),
            alpha_c=db_to_linear(self.alpha_c_db),
            alpha_m=db_to_linear(self.alpha_m_db),
        )

    def replace(self, **changes) -> "ScenarioConfig":
        return dataclasses.replace(self, **changes)

    # serialisation

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        for k, v in d.items():
            if isinstance(v, tuple):
                d[k] = list(v)
        return d

    @classmethod
    def from_dict(cls, data: dict) -> "ScenarioConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown configuration keys: {sorted(unknown)}")
        kwargs = {}
        for k, v in data.items():
            kwargs[k] = tuple(v) if isinstance(v, list) else v
        try:
            return cls(**kwargs)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc


def reference_preset() -> ScenarioConfig:
    text = resources.files(__package__).joinpath("presets/reference.json").read_text()
    return ScenarioConfig.from_dict(json.loads(text))


def load_config(path) -> ScenarioConfig:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"config {path} must hold a JSON object")
    return ScenarioConfig.from_dict(data)
