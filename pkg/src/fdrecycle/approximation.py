"""Two-point fits ``log2(1 + c rho^phi)`` of rate-versus-splitting-ratio curves."""

from dataclasses import dataclass
from typing import Callable, Tuple

import numpy as np
from scipy import optimize

from .exceptions import DegenerateAnchors, OutOfScopeRegime
from .whitening import Regime

__all__ = [
    "RateFit",
    "CrossoverInterval",
    "anchor_points",
    "fit_two_point",
    "fit_rate_curve",
    "crossover_interval",
    "optimal_rho",
    "numeric_crossover",
    "default_epsilon",
]

_LN2 = np.log(2.0)


def default_epsilon(p_th: float) -> float:
    return 1e-3 * p_th


@dataclass(frozen=True)
class RateFit:
    c: float
    phi: float
    regime: Regime
    anchor_points: Tuple[Tuple[float, float], Tuple[float, float]]
    epsilon: float = 0.0

    def __call__(self, rho):
        rho = np.asarray(rho, dtype=float)
        out = np.log2(1.0 + self.c * rho ** self.phi)
        return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class CrossoverInterval:
    lower: float
    upper: float
    valid: bool


def anchor_points(regime: Regime, p, p_th, p_sat, epsilon=None):
    """The two splitting ratios at which a curve of the given regime is sampled."""
    if regime is Regime.NO_RESIDUAL_SI:
        # below p_th the whole range is SI-free, so anchor at rho = 1 instead
        top = min(1.0, p_th / p)
        return top, 0.5 * top
    if regime is Regime.RESIDUAL_SI:
        eps = default_epsilon(p_th) if epsilon is None else epsilon
        return (p_th + eps) / p, min(1.0, p_sat / p)
    raise ValueError("no fit exists for the saturated regime")


def fit_two_point(rho_1, r_1, rho_2, r_2, regime: Regime = Regime.NO_RESIDUAL_SI, epsilon=0.0) -> RateFit:
    """Match ``log2(1 + c rho^phi)`` to two samples ``(rho_k, r_k)`` exactly.

    ``phi`` is the log, in base ``rho_1 / rho_2``, of the ratio of the
    linearised rates ``2^r - 1``; ``c`` then follows from the first anchor.
    """
    s_1 = np.expm1(r_1 * _LN2)
    s_2 = np.expm1(r_2 * _LN2)
    if not (s_1 > 0 and s_2 > 0) or s_1 == s_2 or rho_1 == rho_2 or min(rho_1, rho_2) <= 0:
        raise DegenerateAnchors(f"cannot fit through ({rho_1}, {r_1}) and ({rho_2}, {r_2})")
    phi = np.log(s_1 / s_2) / np.log(rho_1 / rho_2)
    c = s_1 / rho_1 ** phi
    return RateFit(float(c), float(phi), regime, ((rho_1, r_1), (rho_2, r_2)), float(epsilon))


def fit_rate_curve(r_fn: Callable[[float], float], regime: Regime, p, p_th, p_sat, epsilon=None) -> RateFit:
    """Fit the curve ``r_fn`` from its values at the regime's two anchors."""
    if regime is Regime.RESIDUAL_SI and epsilon is None:
        epsilon = default_epsilon(p_th)
    rho_1, rho_2 = anchor_points(regime, p, p_th, p_sat, epsilon)
    return fit_two_point(rho_1, r_fn(rho_1), rho_2, r_fn(rho_2), regime, epsilon or 0.0)


def crossover_interval(fit: RateFit, baseline_rate, p, p_th, p_sat) -> CrossoverInterval:
    """Splitting ratios where the fitted rate beats the undivided (rho = 1) receiver.

    Only meaningful when ``p_th < p <= p_sat``: below ``p_th`` the baseline
    is already optimal and above ``p_sat`` it cannot decode at all.
    """
    if not p_th < p <= p_sat * (1 + 1e-12):
        raise OutOfScopeRegime(f"crossover needs p_th < p <= p_sat, got p={p}")
    lower = (np.expm1(baseline_rate * _LN2) / fit.c) ** (1.0 / fit.phi)
    upper = p_th / p
    return CrossoverInterval(float(lower), upper, bool(lower <= upper))


def optimal_rho(p, p_th, p_sat, regime_choice: Regime = Regime.NO_RESIDUAL_SI) -> float:
    if regime_choice is Regime.NO_RESIDUAL_SI:
        return min(1.0, p_th / p)
    if regime_choice is Regime.RESIDUAL_SI:
        return min(1.0, p_sat / p)
    raise ValueError("no operating point in the saturated regime")


def numeric_crossover(r_fn: Callable[[float], float], baseline_rate, lo, hi, xtol=1e-6) -> float:
    """Smallest rho in ``[lo, hi]`` where ``r_fn`` reaches ``baseline_rate``, by bisection.

    Assumes ``r_fn`` is increasing on the bracket. Returns ``hi`` when the
    baseline is never reached and ``lo`` when it is already exceeded there.
    """
    f = lambda rho: r_fn(rho) - baseline_rate  # noqa: E731
    f_hi = f(hi)
    if f_hi < 0:
        return float(hi)
    if f(lo) >= 0:
        return float(lo)
    return float(optimize.bisect(f, lo, hi, xtol=xtol))
