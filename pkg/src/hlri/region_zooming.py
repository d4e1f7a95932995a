"""Staged reduction and translation of the direction search box.

The search runs in three stages.  First, directions are sought anywhere on
the unit box until every elite member sits on the failure surface inside the
distance bounds.  Then the per-variable direction bounds are repeatedly
shrunk to the elite's componentwise extent (never narrower than a minimum
diameter, recentering and clamping at the box edge when needed), the elite
is recoded against the new bounds, and the rest of the population restarts
at random.  Zooming repeats while the population stays diverse; afterwards
the population refines inside the last region for a fixed budget.

Only the direction bounds shrink; the distance interval is never zoomed.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import ConfigError, ContractError, DecodeError
from .genotype import MixedGenotype, Population, decode, encode

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SearchRegion:
    """Per-variable direction bounds plus the fixed distance interval."""

    a_min: np.ndarray
    a_max: np.ndarray
    beta_min: float
    beta_max: float
    generation_created: int = 1

    def __post_init__(self):
        a_min = np.asarray(self.a_min, dtype=float)
        a_max = np.asarray(self.a_max, dtype=float)
        if a_min.shape != a_max.shape or a_min.ndim != 1:
            raise ConfigError("direction bounds must be 1-d arrays of equal length")
        if np.any(a_min > a_max):
            raise ConfigError("direction bounds inverted: a_min > a_max")
        if np.any(a_min < -1.0 - 1e-12) or np.any(a_max > 1.0 + 1e-12):
            raise ConfigError("direction bounds must lie within [-1, 1]")
        if not 0.0 <= self.beta_min < self.beta_max:
            raise ConfigError(
                f"need 0 <= beta_min < beta_max, got [{self.beta_min}, {self.beta_max}]")
        a_min.setflags(write=False)
        a_max.setflags(write=False)
        object.__setattr__(self, "a_min", a_min)
        object.__setattr__(self, "a_max", a_max)

    @property
    def dimension(self) -> int:
        return self.a_min.shape[0]

    def diameter(self) -> float:
        """Euclidean diagonal of the direction box."""
        return float(np.linalg.norm(self.a_max - self.a_min))

    def to_json_dict(self) -> dict:
        return {
            "a_min": [float(v) for v in self.a_min],
            "a_max": [float(v) for v in self.a_max],
            "beta_min": self.beta_min,
            "beta_max": self.beta_max,
            "generation_created": self.generation_created,
        }


@dataclass(frozen=True)
class ZoomConfig:
    """Zooming schedule: minimum box diameter, generations per block, the
    refinement budget, and the concentration thresholds.

    progress_tol is expressed in fitness (standard deviation) units: when an
    entire zoom block improves the best fitness by no more than this and the
    elite fitness spread is equally flat, the population counts as
    concentrated."""

    delta_a: float = 0.15
    t_z: int = 5
    delta_t: int = 40
    diversity_floor: float = 0.5
    progress_tol: float = 1e-3

    def __post_init__(self):
        if not 0.0 < self.delta_a <= 2.0:
            raise ConfigError(f"delta_a must be in (0, 2], got {self.delta_a}")
        if self.t_z < 1:
            raise ConfigError(f"t_z must be >= 1, got {self.t_z}")
        if self.delta_t < 1:
            raise ConfigError(f"delta_t must be >= 1, got {self.delta_t}")
        if not 0.0 < self.diversity_floor < 1.0:
            raise ConfigError(
                f"diversity_floor must be in (0, 1), got {self.diversity_floor}")
        if not self.progress_tol > 0.0:
            raise ConfigError(f"progress_tol must be positive, got {self.progress_tol}")


def initial_region(beta_min: float, beta_max: float, n: int,
                   generation: int = 1) -> SearchRegion:
    """Full unit box on every direction variable."""
    if n < 1:
        raise ConfigError(f"dimension must be >= 1, got {n}")
    return SearchRegion(
        a_min=-np.ones(n),
        a_max=np.ones(n),
        beta_min=beta_min,
        beta_max=beta_max,
        generation_created=generation,
    )


def high_content(genotype: MixedGenotype, region: SearchRegion, eta: float) -> bool:
    """True when the repaired genotype sits on the failure surface within the
    tolerance band and its distance lies inside the region's interval."""
    if genotype.repair is None:
        raise ContractError("genotype has not been repaired")
    return (abs(genotype.repair.final_g) <= eta
            and region.beta_min <= genotype.beta <= region.beta_max)


def stage1_complete(elite: Sequence[MixedGenotype], region: SearchRegion,
                    eta: float) -> bool:
    """First-stage exit test: every elite member is high-content."""
    if not elite:
        raise ContractError("elite must be nonempty")
    return all(high_content(m, region, eta) for m in elite)


def reduce_region(elite: Sequence[MixedGenotype], region: SearchRegion,
                  config: ZoomConfig, generation: int) -> SearchRegion:
    """New bounds from the elite's componentwise direction extent.

    Intervals narrower than the minimum diameter are recentered to that
    diameter (updating both ends from the old values simultaneously), then
    shifted inward where they poke past the unit box.
    """
    if not elite:
        raise ContractError("elite must be nonempty")
    directions = np.array([m.direction for m in elite])
    lo = directions.min(axis=0)
    hi = directions.max(axis=0)

    narrow = (hi - lo) < config.delta_a
    mid = 0.5 * (hi + lo)
    lo = np.where(narrow, mid - 0.5 * config.delta_a, lo)
    hi = np.where(narrow, mid + 0.5 * config.delta_a, hi)

    shift_in = np.maximum(hi - 1.0, 0.0)
    hi -= shift_in
    lo -= shift_in
    shift_out = np.maximum(-1.0 - lo, 0.0)
    lo += shift_out
    hi += shift_out
    hi = np.minimum(hi, 1.0)

    return SearchRegion(
        a_min=lo,
        a_max=hi,
        beta_min=region.beta_min,
        beta_max=region.beta_max,
        generation_created=generation,
    )


def recode_population(population: Population, old_region: SearchRegion,
                      new_region: SearchRegion, rng: np.random.Generator) -> Population:
    """Re-express the elite in the new bounds and restart everyone else.

    Elite members keep their distance gene and repair state; their bits are
    re-quantized (components outside the new bounds clamp to it).  Non-elite
    slots are replaced by fresh random genotypes that still need repair and
    fitness evaluation.
    """
    from .evolution_ops import random_genotype

    if not population.members:
        raise ContractError("population is empty")
    bits_per_var = len(population.members[0].bits) // new_region.dimension

    for member in population.elite:
        new_bits = encode(member.direction, new_region, bits_per_var)
        try:
            new_direction = decode(new_bits, new_region)
        except DecodeError:
            logger.warning("elite recode produced a degenerate direction; keeping old coding")
            continue
        member.bits = new_bits
        member.direction = new_direction

    refreshed = list(population.elite)
    for _ in range(len(population.members) - population.elite_size):
        refreshed.append(random_genotype(new_region, rng, bits_per_var))
    population.members = refreshed
    return population


def quantization_step(region: SearchRegion, bits_per_var: int) -> np.ndarray:
    """Per-variable resolution of the binary coding in this region."""
    return (region.a_max - region.a_min) / ((1 << bits_per_var) - 1)


def diversity_ok(population: Population, config: ZoomConfig,
                 reference_fitness: Optional[float] = None) -> bool:
    """Concentration test gating another zoom cycle.

    Diversity counts as preserved while the population keeps enough distinct
    bitstrings and the elite is still separating solutions: either its
    fitness spread exceeds progress_tol, or the best fitness improved by
    more than progress_tol since reference_fitness (taken before the last
    zoom block).  When the elite has equalized and a whole block brought no
    progress, the search has concentrated onto a region of equally good
    solutions and further zooming cannot exploit the remaining differences."""
    members = population.members
    if not members:
        raise ContractError("population is empty")
    distinct = len({m.bitstring() for m in members}) / len(members)
    if distinct < config.diversity_floor:
        return False
    values = [m.fitness for m in population.elite]
    if any(v is None for v in values):
        raise ContractError("population has unevaluated members")
    if max(values) - min(values) > config.progress_tol:
        return True
    if reference_fitness is not None:
        return max(values) - reference_fitness > config.progress_tol
    return False
