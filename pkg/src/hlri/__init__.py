"""Reliability-index solver: hybrid micro-genetic search for the minimum
distance from the origin of standardized uncertainty space to a failure
surface, with analytical benchmarks and independent validation oracles."""

from .engine import RunConfig, RunReport, probability_of_failure, run
from .errors import (CalibrationError, ConfigError, ContractError, DecodeError,
                     DegenerateProblemError, DomainError, HlriError,
                     SurfaceNotFoundError)
from .evolution_ops import EvolutionConfig
from .fitness import PenaltyParams, calibrate_penalty, default_penalty_params
from .genetic_repair import RepairConfig, RepairOutcome, repair
from .genotype import MixedGenotype, Population
from .oracle import OracleResult, beta_along, brute_force_mpp, hlrf
from .problem_model import (BenchmarkProblem, LimitStateFunction, Marginal,
                            UncertaintySpace, evaluate_G, from_standard,
                            g_along, linear_problem, load_polynomial_problem,
                            make_problem, parabolic_problem, polynomial_problem,
                            sphere_problem, to_standard)
from .region_zooming import SearchRegion, ZoomConfig

__version__ = "0.1.0"

__all__ = [
    "BenchmarkProblem",
    "CalibrationError",
    "ConfigError",
    "ContractError",
    "DecodeError",
    "DegenerateProblemError",
    "DomainError",
    "EvolutionConfig",
    "HlriError",
    "LimitStateFunction",
    "Marginal",
    "MixedGenotype",
    "OracleResult",
    "PenaltyParams",
    "Population",
    "RepairConfig",
    "RepairOutcome",
    "RunConfig",
    "RunReport",
    "SearchRegion",
    "SurfaceNotFoundError",
    "UncertaintySpace",
    "ZoomConfig",
    "beta_along",
    "brute_force_mpp",
    "calibrate_penalty",
    "default_penalty_params",
    "evaluate_G",
    "from_standard",
    "g_along",
    "hlrf",
    "linear_problem",
    "load_polynomial_problem",
    "make_problem",
    "parabolic_problem",
    "polynomial_problem",
    "probability_of_failure",
    "repair",
    "run",
    "sphere_problem",
    "to_standard",
]
