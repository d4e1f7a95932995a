"""Stochastic operators: initialization, biased parent selection, uniform
crossover, and the three-operator elitist survivor selection.

Selection pairs one elite parent with one non-elite parent, both drawn
fitness-proportionally, so the strongest genotypes recombine with the
weakest.  Crossover picks every gene (the distance gene included) from the
elite parent with a fixed bias.  Survivor selection first purges weaker
near-clones, then truncates the extended population to size, and finally
reinitializes the worst few genotypes at random; the best genotype survives
every one of these steps, so the population's best fitness never decreases.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import TYPE_CHECKING, Optional, Sequence

import numpy as np

from .errors import ConfigError, ContractError, DecodeError
from .fitness import selection_weights
from .genotype import MixedGenotype, Population, decode

if TYPE_CHECKING:
    from .region_zooming import SearchRegion

logger = logging.getLogger(__name__)

_REDRAW_LIMIT = 100
_CROSSOVER_RETRY_LIMIT = 32


@dataclass(frozen=True)
class EvolutionConfig:
    """Micro-population sizing and operator rates.

    epsilon_sc is the similarity threshold (number of equal direction
    variables above which two genotypes are similar); None resolves to N-1
    at run time so only near-clones are purged.
    """

    n_p: int = 12
    n_e: int = 3
    n_b: int = 6
    r_uc: float = 0.7
    epsilon_sc: Optional[int] = None
    n_bot: int = 2

    def __post_init__(self):
        if self.n_p < 2:
            raise ConfigError(f"population size must be >= 2, got {self.n_p}")
        if not 1 <= self.n_e < self.n_p:
            raise ConfigError(f"need 1 <= n_e < n_p, got n_e={self.n_e}, n_p={self.n_p}")
        if self.n_b < 1:
            raise ConfigError(f"offspring count must be >= 1, got {self.n_b}")
        if not 0.0 < self.r_uc < 1.0:
            raise ConfigError(f"r_uc must be in (0, 1), got {self.r_uc}")
        if not 1 <= self.n_bot < self.n_p:
            raise ConfigError(f"need 1 <= n_bot < n_p, got n_bot={self.n_bot}")
        if self.epsilon_sc is not None and self.epsilon_sc < 0:
            raise ConfigError(f"epsilon_sc must be >= 0, got {self.epsilon_sc}")


def random_genotype(region: "SearchRegion", rng: np.random.Generator,
                    bits_per_var: int) -> MixedGenotype:
    """Fresh genotype: distance at the region's lower bound, uniform bits."""
    n = region.dimension
    for _ in range(_REDRAW_LIMIT):
        bits = rng.integers(0, 2, size=n * bits_per_var, dtype=np.uint8)
        try:
            direction = decode(bits, region)
        except DecodeError:
            continue
        return MixedGenotype(beta=region.beta_min, bits=bits, direction=direction)
    # forced perturbation after exhausting redraws; flip one bit of the last draw
    bits[int(rng.integers(0, len(bits)))] ^= 1
    direction = decode(bits, region)
    return MixedGenotype(beta=region.beta_min, bits=bits, direction=direction)


def select_parents(population: Population, rng: np.random.Generator,
                   n_pairs: int) -> list[tuple[MixedGenotype, MixedGenotype]]:
    """Draw n_pairs (elite, non-elite) parent pairs, each fitness-proportional
    within its group.  Falls back to elite-only pairs if the non-elite group
    is empty."""
    elite = population.elite
    others = population.non_elite
    if not elite:
        raise ContractError("population has no elite members")
    if not others:
        logger.warning("non-elite group empty; drawing both parents from the elite")
        others = elite

    elite_w = np.array(selection_weights([m.fitness for m in elite]))
    other_w = np.array(selection_weights([m.fitness for m in others]))
    elite_p = elite_w / elite_w.sum()
    other_p = other_w / other_w.sum()

    pairs = []
    for _ in range(n_pairs):
        i = int(rng.choice(len(elite), p=elite_p))
        j = int(rng.choice(len(others), p=other_p))
        pairs.append((elite[i], others[j]))
    return pairs


def uniform_crossover(parent_elite: MixedGenotype, parent_other: MixedGenotype,
                      r_uc: float, rng: np.random.Generator,
                      region: "SearchRegion") -> MixedGenotype:
    """Gene-by-gene recombination biased toward the elite parent.

    Every bit, and the distance gene, comes from the elite parent with
    probability r_uc.  Genes common to both parents always transmit.
    """
    if len(parent_elite.bits) != len(parent_other.bits):
        raise ContractError("parents have different bit lengths")
    l = len(parent_elite.bits)
    for _ in range(_CROSSOVER_RETRY_LIMIT):
        take_elite = rng.random(l) < r_uc
        bits = np.where(take_elite, parent_elite.bits, parent_other.bits).astype(np.uint8)
        beta = parent_elite.beta if rng.random() < r_uc else parent_other.beta
        try:
            direction = decode(bits, region)
        except DecodeError:
            continue
        return MixedGenotype(beta=beta, bits=bits, direction=direction)
    bits = parent_elite.bits.copy()
    bits[int(rng.integers(0, l))] ^= 1
    return MixedGenotype(beta=parent_elite.beta, bits=bits,
                         direction=decode(bits, region))


def _equal_variables(a: MixedGenotype, b: MixedGenotype, n: int) -> int:
    bpv = len(a.bits) // n
    blocks_a = a.bits.reshape(n, bpv)
    blocks_b = b.bits.reshape(n, bpv)
    return int(np.all(blocks_a == blocks_b, axis=1).sum())


def similar(a: MixedGenotype, b: MixedGenotype, epsilon_sc: int, n: int) -> bool:
    """Similarity compares binary variable blocks only; two genotypes are
    similar when strictly more than epsilon_sc variables coincide."""
    return _equal_variables(a, b, n) > epsilon_sc


def similarity_control(extended: list[MixedGenotype], epsilon_sc: int,
                       region: "SearchRegion", rng: np.random.Generator
                       ) -> list[MixedGenotype]:
    """Purge weaker genotypes similar to a surviving stronger one, then refill
    to the original size with random genotypes (returned unrepaired and
    unevaluated).  Input must be ranked by fitness, descending."""
    n = region.dimension
    if epsilon_sc > n:
        raise ConfigError(f"epsilon_sc must be <= dimension {n}, got {epsilon_sc}")
    survivors: list[MixedGenotype] = []
    for member in extended:
        if any(similar(member, keeper, epsilon_sc, n) for keeper in survivors):
            continue
        survivors.append(member)
    removed = len(extended) - len(survivors)
    if removed:
        bits_per_var = len(extended[0].bits) // n
        survivors.extend(random_genotype(region, rng, bits_per_var)
                         for _ in range(removed))
    return survivors


def replacement(members: Sequence[MixedGenotype], offspring: Sequence[MixedGenotype],
                n_p: int) -> list[MixedGenotype]:
    """Truncate the ranked union of population and offspring to the top n_p;
    ties keep the existing order (population before offspring)."""
    combined = list(members) + list(offspring)
    for i, m in enumerate(combined):
        if m.fitness is None:
            raise ContractError(f"member {i} has no evaluated fitness")
    combined.sort(key=lambda m: m.fitness, reverse=True)
    return combined[:n_p]


def implicit_mutation(members: list[MixedGenotype], n_bot: int,
                      region: "SearchRegion", rng: np.random.Generator
                      ) -> list[MixedGenotype]:
    """Replace the n_bot worst genotypes with fresh random ones (returned
    unrepaired and unevaluated).  Input must be ranked, descending."""
    if not 1 <= n_bot < len(members):
        raise ContractError(f"need 1 <= n_bot < population size, got {n_bot}")
    bits_per_var = len(members[0].bits) // region.dimension
    kept = members[:len(members) - n_bot]
    fresh = [random_genotype(region, rng, bits_per_var) for _ in range(n_bot)]
    return kept + fresh
