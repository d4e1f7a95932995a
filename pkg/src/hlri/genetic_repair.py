"""Deterministic line repair driving the limit state to zero along a ray.

Each candidate solution owns a frozen unit direction; repair walks the
distance gene outward while the state value is nonnegative and inward
otherwise, with a nonlinear step size proportional to an amplitude parameter.
The amplitude at iteration k is a fixed fraction alpha of the current
distance (floored by a reference scale so the walk can leave the origin), and
whenever a candidate step fails to strictly reduce |g| the amplitude is
geometrically reduced and the step retried.  Iteration stops on the tolerance
band |g| <= eta (total repair), on the iteration cap (partial repair), or
when the distance runs away past a multiple of the configured search bound,
which identifies directions along which no failure surface exists.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import ConfigError, ContractError, DegenerateProblemError
from .problem_model import BenchmarkProblem, g_along

# caps the exponent so a wildly violating state cannot overflow the step;
# any candidate this far out is already past every runaway bound
_MAX_RATIO = 512.0


@dataclass(frozen=True)
class RepairConfig:
    """Amplitude fraction, iteration budget, and stop/runaway tolerances.

    eta is shared with the penalty tolerance and is resolved by the engine
    when left unset.  beta_cap is expressed in multiples of the search
    region's beta_max.
    """

    alpha: float = 0.5
    k_max: int = 50
    eta: Optional[float] = None
    beta_ref: float = 1.0
    beta_cap: float = 2.0
    stability_retries: int = 8

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ConfigError(f"alpha must be in (0, 1), got {self.alpha}")
        if self.k_max < 1:
            raise ConfigError(f"k_max must be >= 1, got {self.k_max}")
        if self.eta is not None and not self.eta > 0.0:
            raise ConfigError(f"eta must be positive, got {self.eta}")
        if not self.beta_ref > 0.0:
            raise ConfigError(f"beta_ref must be positive, got {self.beta_ref}")
        if not self.beta_cap > 0.0:
            raise ConfigError(f"beta_cap must be positive, got {self.beta_cap}")
        if self.stability_retries < 0:
            raise ConfigError(
                f"stability_retries must be >= 0, got {self.stability_retries}")


@dataclass(frozen=True)
class TraceRow:
    """State at iteration k plus the outgoing step.

    stable records whether the step taken from this row passed the strict
    |g|-decrease check; it is None on the final row, whose step fields hold
    the computed-but-unapplied values.
    """

    k: int
    beta: float
    g: float
    delta_beta: float
    delta_max: float
    stable: Optional[bool]


@dataclass(frozen=True)
class RepairOutcome:
    final_beta: float
    final_g: float
    status: str            # 'total' | 'partial' | 'no_surface'
    mode: str              # 'strong' | 'weak' | 'undetermined'
    iterations: int
    trace: tuple[TraceRow, ...]


def increment(g_abs: float, g0: float, delta_max: float) -> float:
    """Nonlinear step length: delta_max * (2^(|g|/g0) - 1).

    Equals delta_max exactly when |g| = g0 and zero exactly when |g| = 0;
    the base-2 power form keeps both anchors exact in floating point.
    """
    if not g0 > 0.0:
        raise ConfigError(f"origin state value must be positive, got {g0}")
    if not delta_max > 0.0:
        raise ContractError(f"delta_max must be positive, got {delta_max}")
    if g_abs < 0.0:
        raise ContractError(f"g_abs must be nonnegative, got {g_abs}")
    ratio = min(g_abs / g0, _MAX_RATIO)
    return delta_max * (2.0 ** ratio - 1.0)


def _candidate(beta_k: float, g_k: float, g0: float, delta_max: float) -> tuple[float, float]:
    """Next distance from the signed-state branch rule, clamped at zero."""
    d_beta = increment(abs(g_k), g0, delta_max)
    if g_k >= 0.0:
        return beta_k + d_beta, d_beta
    return max(0.0, beta_k - d_beta), d_beta


def repair_step(beta_k: float, a: np.ndarray, delta_max: float,
                problem: BenchmarkProblem, *,
                g_k: Optional[float] = None,
                g0: Optional[float] = None) -> tuple[float, float]:
    """One raw repair step: outward while g >= 0, inward otherwise."""
    if g0 is None:
        g0 = g_along(0.0, a, problem)
    if g_k is None:
        g_k = g_along(beta_k, a, problem)
    beta_next, _ = _candidate(beta_k, g_k, g0, delta_max)
    return beta_next, g_along(beta_next, a, problem)


def stable(g_prev_abs: float, g_next_abs: float) -> bool:
    """Strict decrease of |g| between consecutive iterations."""
    return g_next_abs < g_prev_abs


def classify_mode(trace: tuple[TraceRow, ...], eta: Optional[float] = None) -> str:
    """'strong' for a one-signed descent, 'weak' for a sign-alternating path
    with strictly decreasing |g|, 'undetermined' otherwise (including any
    trace whose endpoint has not reached the tolerance band)."""
    gs = [row.g for row in trace]
    if not gs:
        return "undetermined"
    if eta is not None and abs(gs[-1]) > eta:
        return "undetermined"
    has_pos = any(g > 0.0 for g in gs)
    has_neg = any(g < 0.0 for g in gs)
    if not (has_pos and has_neg):
        return "strong"
    if all(abs(b) < abs(a) for a, b in zip(gs, gs[1:])):
        return "weak"
    return "undetermined"


def repair(genotype, problem: BenchmarkProblem, config: RepairConfig,
           beta_max: float = 8.0, g0: Optional[float] = None) -> RepairOutcome:
    """Run the full repair iteration on one genotype.

    The genotype's distance gene is overwritten with the best iterate found
    (the one with smallest |g|), and the outcome is attached to it.  The
    direction bits are never touched.
    """
    if config.eta is None:
        raise ConfigError("repair config has no resolved eta")
    eta = config.eta
    a = genotype.direction
    if a is None:
        raise ContractError("genotype has no decoded direction")
    if genotype.beta < 0.0:
        raise ContractError(f"genotype beta must be nonnegative, got {genotype.beta}")

    if g0 is None:
        g0 = g_along(0.0, a, problem)
    if g0 <= eta:
        raise DegenerateProblemError(
            f"origin on or beyond failure surface: g(0) = {g0} <= eta = {eta}")

    runaway = config.beta_cap * beta_max
    beta = float(genotype.beta)
    g = g_along(beta, a, problem)
    best_beta, best_g = beta, g

    rows: list[TraceRow] = []
    k = 0
    while True:
        if abs(g) <= eta:
            status = "total"
            break
        if k >= config.k_max:
            status = "partial"
            break
        if beta > runaway:
            status = "no_surface"
            break

        scale = max(beta, config.beta_ref)
        accepted = None
        tried: list[tuple[float, float, float, float]] = []
        for r in range(config.stability_retries + 1):
            delta_max = config.alpha ** (r + 1) * scale
            beta_next, d_beta = _candidate(beta, g, g0, delta_max)
            g_next = g_along(beta_next, a, problem)
            tried.append((beta_next, g_next, d_beta, delta_max))
            if stable(abs(g), abs(g_next)):
                accepted = (*tried[-1], True)
                break
        if accepted is None:
            # no amplitude produced a strict decrease; take the least
            # violating candidate so the iteration cannot deadlock
            accepted = (*min(tried, key=lambda t: abs(t[1])), False)

        beta_next, g_next, d_beta, delta_max, was_stable = accepted
        rows.append(TraceRow(k, beta, g, d_beta, delta_max, was_stable))
        beta, g = beta_next, g_next
        k += 1
        if abs(g) < abs(best_g):
            best_beta, best_g = beta, g

    final_scale = config.alpha * max(beta, config.beta_ref)
    rows.append(TraceRow(k, beta, g, increment(abs(g), g0, final_scale),
                         final_scale, None))

    trace = tuple(rows)
    mode = classify_mode(trace, eta) if status == "total" else "undetermined"
    outcome = RepairOutcome(
        final_beta=best_beta,
        final_g=best_g,
        status=status,
        mode=mode,
        iterations=k,
        trace=trace,
    )
    genotype.beta = best_beta
    genotype.repair = outcome
    return outcome
