"""Penalty formulation turning the constrained distance problem into a
maximization of a scalar fitness.

Fitness is C - beta - lambda * Gamma(g), where Gamma is a power-law penalty
that is exactly zero inside a small tolerance band |g| <= eta around the
failure surface.  With the default calibration any solution violating the
band by more than a tenth of the origin state value scores below the entire
feasible fitness range, so solutions sitting on the surface always outrank
meaningfully infeasible ones.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import CalibrationError, ConfigError


@dataclass(frozen=True)
class PenaltyParams:
    """Fitness offset C, scaling lambda, power-law pair (K, q), tolerance eta."""

    C: float
    lam: float
    K: float
    q: float
    eta: float

    def __post_init__(self):
        for name in ("C", "lam", "K", "q", "eta"):
            value = getattr(self, name)
            if not value > 0.0:
                raise ConfigError(f"penalty parameter {name} must be positive, got {value}")


def penalty(g_value: float, params: PenaltyParams) -> float:
    """K*|g|^q outside the tolerance band, exactly zero inside it."""
    g_abs = abs(g_value)
    if g_abs > params.eta:
        return params.K * g_abs ** params.q
    return 0.0


def fitness(beta: float, g_value: float, params: PenaltyParams) -> float:
    if beta < 0.0:
        raise ConfigError(f"beta must be nonnegative, got {beta}")
    return params.C - beta - params.lam * penalty(g_value, params)


def calibrate_penalty(anchor1: tuple[float, float],
                      anchor2: tuple[float, float]) -> tuple[float, float]:
    """Solve K*g^q through two (|g|, target penalty) anchor points.

    q = ln(t1/t2) / ln(g1/g2) and K = t1 / g1^q; both anchors must have
    distinct positive |g| and positive targets.
    """
    g1, t1 = anchor1
    g2, t2 = anchor2
    if g1 <= 0.0 or g2 <= 0.0:
        raise CalibrationError(f"anchor |g| values must be positive, got {g1}, {g2}")
    if g1 == g2:
        raise CalibrationError(f"anchor |g| values must differ, both are {g1}")
    if t1 <= 0.0 or t2 <= 0.0:
        raise CalibrationError(f"anchor targets must be positive, got {t1}, {t2}")
    q = math.log(t1 / t2) / math.log(g1 / g2)
    k = t1 / g1 ** q
    return k, q


def default_penalty_params(g0: float, beta_max: float) -> PenaltyParams:
    """Reproducible default calibration tied to the problem scale.

    eta is 1e-3 of the origin state value; C exceeds beta_max so feasible
    fitness stays positive; the anchors pin the penalty to C at 0.1*|g0| and
    to 100*C at |g0|, which pushes any violation beyond 0.1*|g0| below the
    whole feasible fitness range.
    """
    if not g0 > 0.0:
        raise ConfigError(f"origin state value must be positive, got {g0}")
    if not beta_max > 0.0:
        raise ConfigError(f"beta_max must be positive, got {beta_max}")
    c = beta_max + 1.0
    k, q = calibrate_penalty((0.1 * abs(g0), c), (abs(g0), 100.0 * c))
    return PenaltyParams(C=c, lam=1.0, K=k, q=q, eta=1e-3 * abs(g0))


def selection_weights(fitnesses: list[float], epsilon: float = 1e-12) -> list[float]:
    """Shift fitness values so they are strictly positive for proportional
    selection; stored fitness values are never modified."""
    lowest = min(fitnesses)
    shift = -min(0.0, lowest) + epsilon
    return [f + shift for f in fitnesses]
