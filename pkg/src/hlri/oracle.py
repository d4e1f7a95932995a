"""Independent ground-truth generators used only for validation.

Two unrelated algorithms approximate the minimum-distance point: an
exhaustive direction scan backed by grid-plus-bisection root finding along
each ray, and the classical gradient fixed-point iteration with
finite-difference gradients.  Neither shares any code path with the
evolutionary solver, so agreement between the two sides is meaningful.

Reference values for benchmarks without a closed form are produced here at a
pinned resolution and committed to golden files together with the generating
command line.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.stats import qmc

from .errors import ContractError, SurfaceNotFoundError
from .problem_model import BenchmarkProblem, counted_problem, evaluate_G

_FD_STEP = 1e-5


@dataclass(frozen=True)
class OracleResult:
    beta: float
    direction: np.ndarray
    method: str            # 'brute_force' | 'hlrf' | 'closed_form'
    evaluations: int

    def to_json_dict(self) -> dict:
        return {
            "beta": self.beta,
            "direction": [float(v) for v in self.direction],
            "method": self.method,
            "evaluations": self.evaluations,
        }


def closed_form_result(problem: BenchmarkProblem) -> Optional[OracleResult]:
    """Package a benchmark's known index, when it has one."""
    if problem.known_beta is None:
        return None
    if problem.known_mpp is not None and problem.known_beta > 0:
        direction = np.asarray(problem.known_mpp, dtype=float) / problem.known_beta
    else:
        direction = np.full(problem.dimension, math.nan)
    return OracleResult(beta=float(problem.known_beta), direction=direction,
                        method="closed_form", evaluations=0)


def beta_along(a: Sequence[float], problem: BenchmarkProblem,
               beta_cap: float = 8.0, tol: float = 1e-6,
               grid: int = 512) -> Optional[float]:
    """Distance to the first surface crossing along a ray, or None.

    Scans G on a uniform grid over [0, beta_cap] for the first change away
    from the positive origin side, then bisects that bracket down to tol.
    """
    a = np.asarray(a, dtype=float)
    norm = float(np.linalg.norm(a))
    if abs(norm - 1.0) > 1e-9:
        raise ContractError(f"direction must be a unit vector, |a| = {norm}")

    betas = np.linspace(0.0, beta_cap, grid)
    prev_beta = betas[0]
    prev_g = evaluate_G(prev_beta * a, problem)
    bracket = None
    for b in betas[1:]:
        g = evaluate_G(b * a, problem)
        if prev_g > 0.0 and g <= 0.0:
            bracket = (prev_beta, b)
            break
        prev_beta, prev_g = b, g
    if bracket is None:
        return None

    lo, hi = bracket
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if evaluate_G(mid * a, problem) > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _sphere_directions(n: int, count: int) -> np.ndarray:
    """Quasi-uniform unit directions: Sobol points mapped through the normal
    quantile and normalized."""
    sampler = qmc.Sobol(d=n, scramble=False, seed=0)
    # draw a power-of-two batch (keeps the sequence balanced) and drop the
    # leading all-zeros point, which would map to the origin
    points = sampler.random_base2(max(1, math.ceil(math.log2(count + 1))))
    points = points[1:count + 1]
    from .problem_model import std_normal_quantile
    gauss = np.vectorize(std_normal_quantile)(np.clip(points, 1e-12, 1.0 - 1e-12))
    norms = np.linalg.norm(gauss, axis=1)
    keep = norms > 1e-12
    return gauss[keep] / norms[keep, None]


def _refine_on_sphere(a: np.ndarray, problem: BenchmarkProblem, beta_cap: float,
                      tol: float, best_beta: float) -> tuple[float, np.ndarray]:
    """Coordinate-descent polish: perturb one component at a time, normalize,
    keep improvements, halve the step when a full pass stalls."""
    n = a.shape[0]
    step = 0.1
    best = best_beta
    while step > 1e-4:
        improved = False
        for i in range(n):
            for sign in (1.0, -1.0):
                trial = a.copy()
                trial[i] += sign * step
                trial /= np.linalg.norm(trial)
                b = beta_along(trial, problem, beta_cap, tol)
                if b is not None and b < best:
                    best, a = b, trial
                    improved = True
        if not improved:
            step *= 0.5
    return best, a


def brute_force_mpp(problem: BenchmarkProblem, resolution: Optional[int] = None,
                    beta_cap: float = 8.0, tol: float = 1e-6) -> OracleResult:
    """Exhaustive minimum of beta_along over directions (desk scale, N <= 4).

    N = 2 sweeps a uniform angle grid (default 4096); N = 3 or 4 scans a
    low-discrepancy direction set (default 65536) with a cheap ray probe,
    re-measures the best candidates accurately, and polishes the winner by
    coordinate descent on the sphere.
    """
    n = problem.dimension
    if n > 4:
        raise ContractError(f"brute-force oracle supports N <= 4, got N = {n}")
    counted, counter = counted_problem(problem)

    best_beta = math.inf
    best_dir: Optional[np.ndarray] = None

    if n == 1:
        for a in (np.array([1.0]), np.array([-1.0])):
            b = beta_along(a, counted, beta_cap, tol)
            if b is not None and b < best_beta:
                best_beta, best_dir = b, a
    elif n == 2:
        resolution = resolution or 4096
        thetas = np.linspace(0.0, 2.0 * math.pi, resolution, endpoint=False)
        for theta in thetas:
            a = np.array([math.cos(theta), math.sin(theta)])
            b = beta_along(a, counted, beta_cap, tol)
            if b is not None and b < best_beta:
                best_beta, best_dir = b, a
    else:
        resolution = resolution or 65536
        directions = _sphere_directions(n, resolution)
        # cheap probe pass, then accurate re-measure of the closest candidates
        probes = []
        for a in directions:
            b = beta_along(a, counted, beta_cap, tol=beta_cap / 64.0, grid=64)
            if b is not None:
                probes.append((b, a))
        probes.sort(key=lambda t: t[0])
        for _, a in probes[:32]:
            b = beta_along(a, counted, beta_cap, tol)
            if b is not None and b < best_beta:
                best_beta, best_dir = b, a
        if best_dir is not None:
            best_beta, best_dir = _refine_on_sphere(best_dir, counted, beta_cap,
                                                    tol, best_beta)

    if best_dir is None:
        raise SurfaceNotFoundError(
            f"no failure surface found in any scanned direction within "
            f"beta_cap = {beta_cap}")
    return OracleResult(beta=float(best_beta), direction=best_dir,
                        method="brute_force", evaluations=counter.count)


def _gradient(y: np.ndarray, problem: BenchmarkProblem) -> np.ndarray:
    grad = np.empty_like(y)
    for i in range(y.shape[0]):
        step = np.zeros_like(y)
        step[i] = _FD_STEP
        grad[i] = (evaluate_G(y + step, problem) - evaluate_G(y - step, problem)) \
            / (2.0 * _FD_STEP)
    return grad


def hlrf(problem: BenchmarkProblem, y0: Optional[Sequence[float]] = None,
         max_iter: int = 100, tol: float = 1e-8,
         beta_cap: float = 8.0) -> Optional[OracleResult]:
    """Classical gradient fixed-point iteration with finite differences.

    Returns None on divergence (iterate escaping 10x the search bound,
    vanishing gradient, or exhausting max_iter without settling); divergence
    on concave surfaces is an expected behavior, not an error.
    """
    counted, counter = counted_problem(problem)
    y = np.zeros(problem.dimension) if y0 is None else np.asarray(y0, dtype=float)
    if not np.all(np.isfinite(y)):
        raise ContractError("starting point must be finite")

    for _ in range(max_iter):
        g = evaluate_G(y, counted)
        grad = _gradient(y, counted)
        denom = float(grad @ grad)
        if denom < 1e-30:
            return None
        y_next = ((float(grad @ y) - g) / denom) * grad
        if float(np.linalg.norm(y_next)) > 10.0 * beta_cap:
            return None
        if float(np.linalg.norm(y_next - y)) <= tol:
            beta = float(np.linalg.norm(y_next))
            if beta < 1e-12:
                return None
            return OracleResult(beta=beta, direction=y_next / beta,
                                method="hlrf", evaluations=counter.count)
        y = y_next
    return None
