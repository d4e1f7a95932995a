"""Mixed real-binary solution encoding and the fitness-ordered population.

A candidate solution pairs one nonnegative real distance gene with a binary
string that encodes a search direction: each of the N direction variables is
quantized on its current side-constraint interval with a fixed number of bits
(plain binary code, most significant bit first), and the dequantized vector is
projected onto the unit sphere.  Crossover and mutation therefore stay closed
over the genotype space while the unit-norm constraint is enforced on decode.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import TYPE_CHECKING, Optional

import numpy as np

from .errors import ContractError, DecodeError

if TYPE_CHECKING:
    from .genetic_repair import RepairOutcome
    from .region_zooming import SearchRegion

logger = logging.getLogger(__name__)

MIN_BITS_PER_VAR = 3
MAX_BITS_PER_VAR = 16


def _bit_weights(bits_per_var: int) -> np.ndarray:
    return 1 << np.arange(bits_per_var - 1, -1, -1)


def decode(bits: np.ndarray, region: "SearchRegion") -> np.ndarray:
    """Dequantize a bitstring against the region's bounds and normalize.

    Raises DecodeError if the raw vector is numerically zero; the caller is
    expected to reinitialize such a genotype.
    """
    n = region.a_min.shape[0]
    if len(bits) % n != 0:
        raise ContractError(f"bit count {len(bits)} not divisible by dimension {n}")
    bits_per_var = len(bits) // n
    ints = np.asarray(bits, dtype=np.int64).reshape(n, bits_per_var) @ _bit_weights(bits_per_var)
    levels = (1 << bits_per_var) - 1
    raw = region.a_min + ints * (region.a_max - region.a_min) / levels
    norm = float(np.linalg.norm(raw))
    if norm < 1e-12:
        raise DecodeError("bitstring decodes to a zero-norm direction")
    return raw / norm


def encode(a: np.ndarray, region: "SearchRegion", bits_per_var: int) -> np.ndarray:
    """Quantize a direction vector into the region's bounds, nearest level,
    ties rounding up.  Components outside the bounds clamp to the nearest
    bound (logged as a clamp event)."""
    a = np.asarray(a, dtype=float)
    clamped = np.clip(a, region.a_min, region.a_max)
    out_of_bounds = np.nonzero(clamped != a)[0]
    if out_of_bounds.size:
        logger.debug("encode clamped components %s into region bounds", out_of_bounds.tolist())
    width = region.a_max - region.a_min
    if np.any(width <= 0.0):
        raise ContractError("region has a zero-width direction interval")
    levels = (1 << bits_per_var) - 1
    codes = np.floor((clamped - region.a_min) / width * levels + 0.5).astype(np.int64)
    codes = np.clip(codes, 0, levels)
    shifts = np.arange(bits_per_var - 1, -1, -1)
    return ((codes[:, None] >> shifts) & 1).astype(np.uint8).ravel()


@dataclass(eq=False)
class MixedGenotype:
    """One candidate: distance gene, direction bits, and cached decode.

    Mutable state object; equality is identity.
    """

    beta: float
    bits: np.ndarray
    direction: np.ndarray
    fitness: Optional[float] = None
    repair: Optional["RepairOutcome"] = None

    def copy(self) -> "MixedGenotype":
        return MixedGenotype(
            beta=self.beta,
            bits=self.bits.copy(),
            direction=self.direction.copy(),
            fitness=self.fitness,
            repair=self.repair,  # immutable, safe to share
        )

    def bitstring(self) -> str:
        return "".join("1" if b else "0" for b in self.bits)

    def to_json_dict(self) -> dict:
        return {
            "beta": self.beta,
            "bits": self.bitstring(),
            "direction": [float(v) for v in self.direction],
            "fitness": self.fitness,
            "repair_status": None if self.repair is None else self.repair.status,
        }


@dataclass
class Population:
    """Fitness-ordered list of genotypes; repetition is allowed.

    The first elite_size members after ranking form the elite.
    """

    members: list[MixedGenotype]
    elite_size: int

    def __post_init__(self):
        if self.elite_size < 1:
            raise ContractError(f"elite size must be >= 1, got {self.elite_size}")

    def __len__(self) -> int:
        return len(self.members)

    @property
    def elite(self) -> list[MixedGenotype]:
        return self.members[:self.elite_size]

    @property
    def non_elite(self) -> list[MixedGenotype]:
        return self.members[self.elite_size:]

    def rank(self) -> "Population":
        """Stable sort by fitness, descending; ties keep insertion order."""
        for i, m in enumerate(self.members):
            if m.fitness is None:
                raise ContractError(f"member {i} has no evaluated fitness")
        self.members.sort(key=lambda m: m.fitness, reverse=True)
        return self
