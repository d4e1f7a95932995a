"""Three-stage search driver assembling repair, zooming, and the stochastic
operators into a full reliability-index run.

A run seeds a deterministic generator, spreads an initial population over the
whole direction box, repairs every member, and then evolves under the staged
region schedule.  The best on-surface solution ever seen is tracked outside
the population so later region translations or restarts cannot lose it; the
reported index is the smallest distance among that incumbent and the final
population's on-surface members.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import Optional, Union

import numpy as np

from .errors import ConfigError, DegenerateProblemError, SurfaceNotFoundError
from .evolution_ops import (EvolutionConfig, implicit_mutation, random_genotype,
                            replacement, select_parents, similarity_control,
                            uniform_crossover)
from .fitness import PenaltyParams, default_penalty_params, fitness
from .genetic_repair import RepairConfig, repair
from .genotype import MIN_BITS_PER_VAR, MAX_BITS_PER_VAR, MixedGenotype, Population
from .problem_model import (BenchmarkProblem, EvalCounter, counted_problem,
                            evaluate_G, from_standard, make_problem, std_normal_cdf)
from .region_zooming import (SearchRegion, ZoomConfig, diversity_ok, high_content,
                             initial_region, recode_population, reduce_region,
                             stage1_complete)

logger = logging.getLogger(__name__)


def probability_of_failure(beta: float) -> float:
    """First-order failure probability estimate from the reliability index."""
    if beta < 0.0:
        raise ConfigError(f"beta must be nonnegative, got {beta}")
    return std_normal_cdf(-beta)


@dataclass(frozen=True)
class RunConfig:
    problem: Union[str, BenchmarkProblem]
    seed: int = 0
    beta_min: float = 0.0
    beta_max: float = 8.0
    bits_per_var: int = 5
    max_generations: int = 300
    evolution: EvolutionConfig = field(default_factory=EvolutionConfig)
    repair: RepairConfig = field(default_factory=RepairConfig)
    penalty: Optional[PenaltyParams] = None
    zoom: ZoomConfig = field(default_factory=ZoomConfig)

    def __post_init__(self):
        if not 0.0 <= self.beta_min < self.beta_max:
            raise ConfigError(
                f"need 0 <= beta_min < beta_max, got [{self.beta_min}, {self.beta_max}]")
        if not MIN_BITS_PER_VAR <= self.bits_per_var <= MAX_BITS_PER_VAR:
            raise ConfigError(
                f"bits_per_var must be in [{MIN_BITS_PER_VAR}, {MAX_BITS_PER_VAR}], "
                f"got {self.bits_per_var}")
        if self.max_generations < self.zoom.delta_t:
            raise ConfigError(
                f"max_generations ({self.max_generations}) must be >= the "
                f"refinement budget delta_t ({self.zoom.delta_t})")
        if self.penalty is not None and not self.penalty.C > self.beta_max:
            raise ConfigError(
                f"penalty offset C ({self.penalty.C}) must exceed beta_max "
                f"({self.beta_max}) so feasible fitness stays positive")


@dataclass(frozen=True)
class GenerationRecord:
    generation: int
    stage: int
    best_fitness: float
    best_beta: Optional[float]
    region_diameter: float
    distinct_fraction: float
    evaluations: int


@dataclass(frozen=True)
class RunReport:
    problem: str
    seed: int
    beta_hl: float
    mpp_standard: np.ndarray
    mpp_physical: np.ndarray
    p_f: float
    stage_boundaries: tuple[Optional[int], Optional[int], int]
    generations: int
    evaluations: int
    history: tuple[GenerationRecord, ...]
    region_history: tuple[SearchRegion, ...]
    best_genotype: dict

    def to_json_dict(self) -> dict:
        t1, t_div, t_final = self.stage_boundaries
        return {
            "problem": self.problem,
            "seed": self.seed,
            "beta_hl": self.beta_hl,
            "mpp_standard": [float(v) for v in self.mpp_standard],
            "mpp_physical": [float(v) for v in self.mpp_physical],
            "p_f": self.p_f,
            "stage_boundaries": {"t1": t1, "t_diversity_end": t_div, "t_final": t_final},
            "generations": self.generations,
            "evaluations": self.evaluations,
            "best_genotype": self.best_genotype,
        }


class _RunState:
    """Mutable bookkeeping shared by the stage loops."""

    def __init__(self, config: RunConfig, problem: BenchmarkProblem,
                 counter: EvalCounter, penalty_params: PenaltyParams,
                 repair_cfg: RepairConfig, epsilon_sc: int, g0: float):
        self.config = config
        self.problem = problem
        self.counter = counter
        self.penalty = penalty_params
        self.repair_cfg = repair_cfg
        self.epsilon_sc = epsilon_sc
        self.rng = np.random.default_rng(config.seed)
        self.g0 = g0
        self.region = initial_region(config.beta_min, config.beta_max,
                                     problem.dimension, generation=1)
        self.region_history: list[SearchRegion] = [self.region]
        self.history: list[GenerationRecord] = []
        self.population: Optional[Population] = None
        self.incumbent: Optional[MixedGenotype] = None
        self.best_partial: Optional[MixedGenotype] = None
        self.t = 1

    # -- per-genotype plumbing ------------------------------------------------

    def repair_and_evaluate(self, member: MixedGenotype) -> None:
        outcome = repair(member, self.problem, self.repair_cfg,
                         beta_max=self.config.beta_max, g0=self.g0)
        member.fitness = fitness(member.beta, outcome.final_g, self.penalty)
        if high_content(member, self.region, self.repair_cfg.eta):
            if self.incumbent is None or member.beta < self.incumbent.beta:
                self.incumbent = member.copy()
        elif self.best_partial is None or abs(outcome.final_g) < abs(
                self.best_partial.repair.final_g):
            self.best_partial = member.copy()

    def _evaluate_new(self, members) -> None:
        for m in members:
            if m.repair is None:
                self.repair_and_evaluate(m)

    # -- one generation of evolution ------------------------------------------

    def evolve_generation(self, stage: int) -> None:
        cfg = self.config.evolution
        pop = self.population
        pop.rank()
        pairs = select_parents(pop, self.rng, cfg.n_b)
        offspring = [uniform_crossover(e, o, cfg.r_uc, self.rng, self.region)
                     for e, o in pairs]
        for child in offspring:
            self.repair_and_evaluate(child)

        extended = pop.members + offspring
        extended.sort(key=lambda m: m.fitness, reverse=True)
        survivors = similarity_control(extended, self.epsilon_sc, self.region, self.rng)
        self._evaluate_new(survivors)
        survivors.sort(key=lambda m: m.fitness, reverse=True)

        members = replacement(survivors, (), cfg.n_p)
        members = implicit_mutation(members, cfg.n_bot, self.region, self.rng)
        self._evaluate_new(members)
        pop.members = members
        pop.rank()
        self.record(stage)

    def record(self, stage: int) -> None:
        pop = self.population
        eta = self.repair_cfg.eta
        content_betas = [m.beta for m in pop.members
                         if m.repair is not None and high_content(m, self.region, eta)]
        distinct = len({m.bitstring() for m in pop.members}) / len(pop.members)
        self.history.append(GenerationRecord(
            generation=self.t,
            stage=stage,
            best_fitness=pop.members[0].fitness,
            best_beta=min(content_betas) if content_betas else None,
            region_diameter=self.region.diameter(),
            distinct_fraction=distinct,
            evaluations=self.counter.count,
        ))

    def capped(self) -> bool:
        return self.t >= self.config.max_generations


def _resolve_problem(problem: Union[str, BenchmarkProblem]) -> BenchmarkProblem:
    if isinstance(problem, str):
        return make_problem(problem)
    return problem


def run(config: RunConfig) -> RunReport:
    """Execute the full three-stage search and return the final report.

    Raises SurfaceNotFoundError if no on-surface solution inside the distance
    bounds is ever found within the generation cap, and
    DegenerateProblemError if the origin state value is not safely positive.
    """
    problem = _resolve_problem(config.problem)
    counted, counter = counted_problem(problem)
    n = problem.dimension

    epsilon_sc = config.evolution.epsilon_sc
    if epsilon_sc is None:
        epsilon_sc = n - 1
    if epsilon_sc > n:
        raise ConfigError(f"epsilon_sc ({epsilon_sc}) must be <= dimension ({n})")

    g0 = evaluate_G(np.zeros(n), counted)
    penalty_params = config.penalty
    if penalty_params is None:
        penalty_params = default_penalty_params(g0, config.beta_max)
    if config.repair.eta is None:
        repair_cfg = replace(config.repair, eta=penalty_params.eta)
    else:
        repair_cfg = config.repair
    if g0 <= repair_cfg.eta:
        raise DegenerateProblemError(
            f"origin on or beyond failure surface: g(0) = {g0} <= eta = {repair_cfg.eta}")

    state = _RunState(config, counted, counter, penalty_params, repair_cfg,
                      epsilon_sc, g0)

    cfg = config.evolution
    state.population = Population(
        [random_genotype(state.region, state.rng, config.bits_per_var)
         for _ in range(cfg.n_p)],
        elite_size=cfg.n_e,
    )
    for m in state.population.members:
        state.repair_and_evaluate(m)
    state.population.rank()
    state.record(stage=1)

    eta = repair_cfg.eta

    # First stage: search the whole box until the elite is on the surface.
    stage1_done = False
    while not state.capped():
        state.t += 1
        state.evolve_generation(stage=1)
        if stage1_complete(state.population.elite, state.region, eta):
            stage1_done = True
            break

    t1: Optional[int] = None
    t_diversity_end: Optional[int] = None

    if stage1_done:
        t1 = state.t

        # Second stage: zoom, recode, partially restart, evolve in blocks.
        while True:
            if state.capped():
                break
            fitness_before_block = state.population.members[0].fitness
            old_region = state.region
            state.region = reduce_region(state.population.elite, old_region,
                                         config.zoom, generation=state.t)
            state.region_history.append(state.region)
            recode_population(state.population, old_region, state.region, state.rng)
            state._evaluate_new(state.population.members)
            state.population.rank()

            t_ref = state.t
            while not state.capped():
                state.t += 1
                state.evolve_generation(stage=2)
                if state.t - t_ref > config.zoom.t_z:
                    break
            if state.capped():
                break
            state.t += 1  # generation consumed by the next region reduction
            if not diversity_ok(state.population, config.zoom,
                                reference_fitness=fitness_before_block):
                t_diversity_end = state.t
                break
        if t_diversity_end is None:
            t_diversity_end = state.t

        # Third stage: refine inside the last region.
        while not state.capped():
            state.t += 1
            state.evolve_generation(stage=3)
            if state.t - t1 > config.zoom.delta_t:
                break

    # Final answer: the incumbent competes with the final population.
    candidates = []
    if state.incumbent is not None:
        candidates.append(state.incumbent)
    candidates.extend(
        m for m in state.population.members
        if m.repair is not None and high_content(m, state.region, eta))
    if not candidates:
        best_info = None
        if state.best_partial is not None:
            best_info = state.best_partial.to_json_dict()
        raise SurfaceNotFoundError(
            f"no on-surface solution found within {config.max_generations} "
            f"generations (best residual "
            f"{None if state.best_partial is None else state.best_partial.repair.final_g})",
            best_partial=best_info)

    best = min(candidates, key=lambda m: m.beta)
    mpp_standard = best.beta * best.direction
    mpp_physical = from_standard(mpp_standard, problem.space)
    beta_hl = float(best.beta)

    return RunReport(
        problem=problem.name,
        seed=config.seed,
        beta_hl=beta_hl,
        mpp_standard=mpp_standard,
        mpp_physical=mpp_physical,
        p_f=probability_of_failure(beta_hl),
        stage_boundaries=(t1, t_diversity_end, state.t),
        generations=state.t,
        evaluations=counter.count,
        history=tuple(state.history),
        region_history=tuple(state.region_history),
        best_genotype=best.to_json_dict(),
    )
