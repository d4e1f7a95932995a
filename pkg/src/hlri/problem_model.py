"""Random-variable model, standard-normal transforms, and benchmark limit states.

Reliability problems are posed over a vector of independent random variables.
Every solver component works in the standardized space obtained by mapping each
coordinate through its own inverse-CDF composition, so the distance of a point
from the origin is measured in standard-deviation units.  A limit state g maps
a physical point to a real state measure with the convention g < 0 = failure;
G denotes the same function composed with the inverse transform, i.e. evaluated
on standardized coordinates.

The module also ships a small registry of analytical benchmark problems with
closed-form reliability indices where available, plus a loader for custom
polynomial limit states defined in JSON files.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import ConfigError, ContractError, DegenerateProblemError, DomainError

_SQRT2 = math.sqrt(2.0)
_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)

MARGINAL_KINDS = ("normal", "lognormal", "uniform")


# ---------------------------------------------------------------------------
# Standard normal CDF / PDF / quantile
# ---------------------------------------------------------------------------

def std_normal_cdf(x: float) -> float:
    """Standard normal CDF, accurate to better than 1e-12 absolute."""
    return 0.5 * math.erfc(-x / _SQRT2)


def std_normal_pdf(x: float) -> float:
    return _INV_SQRT_2PI * math.exp(-0.5 * x * x)


# Rational approximation for the central and tail regions of the inverse
# normal CDF (relative error ~1.15e-9 before polishing).
_QA = (-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
       1.383577518672690e+02, -3.066479806614716e+01, 2.506628277459239e+00)
_QB = (-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
       6.680131188771972e+01, -1.328068155288572e+01)
_QC = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
       -2.549732539343734e+00, 4.374664141464968e+00, 2.938163982698783e+00)
_QD = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
       3.754408661907416e+00)
_P_LOW = 0.02425


def std_normal_quantile(p: float) -> float:
    """Inverse standard normal CDF.

    Rational approximation followed by one Newton polish step against the
    erfc-based CDF; absolute error is below 1e-12 over the usable range.
    The upper half reflects through the lower half (1 - p is exact there),
    which keeps the polish step meaningful in both tails.  p = 0 and p = 1
    map to -inf/+inf.
    """
    if math.isnan(p) or p < 0.0 or p > 1.0:
        raise DomainError(f"quantile argument must be in [0, 1], got {p!r}")
    if p == 0.0:
        return -math.inf
    if p == 1.0:
        return math.inf
    if p > 0.5:
        return -std_normal_quantile(1.0 - p)

    if p < _P_LOW:
        q = math.sqrt(-2.0 * math.log(p))
        x = (((((_QC[0] * q + _QC[1]) * q + _QC[2]) * q + _QC[3]) * q + _QC[4]) * q + _QC[5]) / \
            ((((_QD[0] * q + _QD[1]) * q + _QD[2]) * q + _QD[3]) * q + 1.0)
    else:
        q = p - 0.5
        r = q * q
        x = (((((_QA[0] * r + _QA[1]) * r + _QA[2]) * r + _QA[3]) * r + _QA[4]) * r + _QA[5]) * q / \
            (((((_QB[0] * r + _QB[1]) * r + _QB[2]) * r + _QB[3]) * r + _QB[4]) * r + 1.0)

    pdf = std_normal_pdf(x)
    if pdf > 1e-300:
        x -= (std_normal_cdf(x) - p) / pdf
    return x


# ---------------------------------------------------------------------------
# Marginals and the uncertainty space
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Marginal:
    """One independent random variable.

    kind      'normal' (param1 = mean, param2 = std dev),
              'lognormal' (param1/param2 = mean/std dev of the underlying
              normal, i.e. of ln X), or
              'uniform' (param1 = lower bound, param2 = upper bound).
    """

    kind: str
    param1: float
    param2: float

    def __post_init__(self):
        if self.kind not in MARGINAL_KINDS:
            raise ConfigError(f"unknown marginal kind {self.kind!r}")
        if self.kind in ("normal", "lognormal") and not self.param2 > 0.0:
            raise ConfigError(f"{self.kind} marginal needs std dev > 0, got {self.param2}")
        if self.kind == "uniform" and not self.param2 > self.param1:
            raise ConfigError(
                f"uniform marginal needs upper > lower, got [{self.param1}, {self.param2}]")

    def to_standard_scalar(self, x: float, index: int = 0) -> float:
        if self.kind == "normal":
            return (x - self.param1) / self.param2
        if self.kind == "lognormal":
            if x <= 0.0:
                raise DomainError(
                    f"coordinate {index}: {x} outside lognormal support (0, inf)")
            return (math.log(x) - self.param1) / self.param2
        lo, hi = self.param1, self.param2
        if x < lo or x > hi:
            raise DomainError(
                f"coordinate {index}: {x} outside uniform support [{lo}, {hi}]")
        width = hi - lo
        # Two-sided form keeps tail precision: the CDF value nearest 0 is used
        # on whichever side of the midpoint x falls.
        if x <= lo + 0.5 * width:
            return std_normal_quantile((x - lo) / width)
        return -std_normal_quantile((hi - x) / width)

    def from_standard_scalar(self, y: float) -> float:
        if self.kind == "normal":
            return self.param1 + self.param2 * y
        if self.kind == "lognormal":
            return math.exp(self.param1 + self.param2 * y)
        lo, hi = self.param1, self.param2
        width = hi - lo
        if y <= 0.0:
            return lo + width * std_normal_cdf(y)
        return hi - width * std_normal_cdf(-y)


@dataclass(frozen=True)
class UncertaintySpace:
    """Ordered collection of independent marginals, dimension N >= 1."""

    marginals: tuple[Marginal, ...]

    # cached fast-path flags; all marginals standard normal means the
    # transform is the identity, which the solver hot loop relies on
    _identity: bool = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        marg = tuple(self.marginals)
        if len(marg) < 1:
            raise ConfigError("uncertainty space needs at least one marginal")
        object.__setattr__(self, "marginals", marg)
        identity = all(
            m.kind == "normal" and m.param1 == 0.0 and m.param2 == 1.0 for m in marg)
        object.__setattr__(self, "_identity", identity)

    @property
    def dimension(self) -> int:
        return len(self.marginals)

    @classmethod
    def standard_normal(cls, n: int) -> "UncertaintySpace":
        return cls(tuple(Marginal("normal", 0.0, 1.0) for _ in range(n)))


def to_standard(x: Sequence[float], space: UncertaintySpace) -> np.ndarray:
    """Map a physical point to standardized coordinates, y_i = Phi^-1(F_i(x_i))."""
    x = np.asarray(x, dtype=float)
    if x.shape != (space.dimension,):
        raise ContractError(f"expected vector of length {space.dimension}, got shape {x.shape}")
    if space._identity:
        return x.copy()
    return np.array([m.to_standard_scalar(float(xi), i)
                     for i, (m, xi) in enumerate(zip(space.marginals, x))])


def from_standard(y: Sequence[float], space: UncertaintySpace) -> np.ndarray:
    """Map standardized coordinates back to physical ones, x_i = F_i^-1(Phi(y_i))."""
    y = np.asarray(y, dtype=float)
    if y.shape != (space.dimension,):
        raise ContractError(f"expected vector of length {space.dimension}, got shape {y.shape}")
    if space._identity:
        return y
    return np.array([m.from_standard_scalar(float(yi)) for m, yi in zip(space.marginals, y)])


# ---------------------------------------------------------------------------
# Limit states and benchmark problems
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LimitStateFunction:
    """Deterministic state measure g(x); g < 0 is failure."""

    evaluator: Callable[[np.ndarray], float]
    name: str
    dimension: int


@dataclass(frozen=True)
class BenchmarkProblem:
    space: UncertaintySpace
    limit_state: LimitStateFunction
    known_beta: Optional[float] = None
    known_mpp: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.space.dimension != self.limit_state.dimension:
            raise ConfigError(
                f"space dimension {self.space.dimension} != limit state "
                f"dimension {self.limit_state.dimension}")
        if self.known_mpp is not None:
            mpp = np.asarray(self.known_mpp, dtype=float)
            mpp.setflags(write=False)
            object.__setattr__(self, "known_mpp", mpp)

    @property
    def dimension(self) -> int:
        return self.space.dimension

    @property
    def name(self) -> str:
        return self.limit_state.name


def evaluate_G(y: Sequence[float], problem: BenchmarkProblem) -> float:
    """Limit state in standardized coordinates: g evaluated at the physical
    image of y.  Negative values are failure states."""
    x = from_standard(y, problem.space)
    return float(problem.limit_state.evaluator(x))


def g_along(beta: float, a: np.ndarray, problem: BenchmarkProblem) -> float:
    """Limit state at distance beta along the unit direction a."""
    if beta < 0.0:
        raise ContractError(f"beta must be nonnegative, got {beta}")
    norm = float(np.linalg.norm(a))
    if abs(norm - 1.0) > 1e-9:
        raise ContractError(f"direction must be a unit vector, |a| = {norm}")
    return evaluate_G(beta * np.asarray(a, dtype=float), problem)


def origin_value(problem: BenchmarkProblem) -> float:
    """g at the standardized origin; must be positive for a well-posed problem."""
    return evaluate_G(np.zeros(problem.dimension), problem)


class EvalCounter:
    """Mutable tally of limit-state evaluations."""

    __slots__ = ("count",)

    def __init__(self):
        self.count = 0


def counted_problem(problem: BenchmarkProblem) -> tuple[BenchmarkProblem, EvalCounter]:
    """Wrap a problem so every limit-state call increments a counter."""
    counter = EvalCounter()
    inner = problem.limit_state.evaluator

    def wrapped(x: np.ndarray) -> float:
        counter.count += 1
        return inner(x)

    counted = BenchmarkProblem(
        space=problem.space,
        limit_state=LimitStateFunction(wrapped, problem.limit_state.name,
                                       problem.limit_state.dimension),
        known_beta=problem.known_beta,
        known_mpp=problem.known_mpp,
    )
    return counted, counter


def _checked(problem: BenchmarkProblem) -> BenchmarkProblem:
    g0 = origin_value(problem)
    if not g0 > 0.0:
        raise DegenerateProblemError(
            f"benchmark {problem.name!r}: origin is not in the safety space (g(0) = {g0})")
    return problem


# ---------------------------------------------------------------------------
# Benchmark factories and the registry
# ---------------------------------------------------------------------------

def linear_problem(n: int = 2, beta_star: float = 3.0,
                   alpha: Optional[Sequence[float]] = None) -> BenchmarkProblem:
    """Hyperplane at distance beta_star from the origin along alpha."""
    if beta_star <= 0.0:
        raise ConfigError(f"beta_star must be positive, got {beta_star}")
    if alpha is None:
        avec = np.zeros(n)
        avec[0] = 1.0
    else:
        avec = np.asarray(alpha, dtype=float)
        if avec.shape != (n,):
            raise ConfigError(f"alpha must have length {n}")
        norm = float(np.linalg.norm(avec))
        if norm < 1e-12:
            raise ConfigError("alpha must be nonzero")
        avec = avec / norm
    avec.setflags(write=False)

    def g(y: np.ndarray) -> float:
        return beta_star - float(avec @ y)

    return _checked(BenchmarkProblem(
        space=UncertaintySpace.standard_normal(n),
        limit_state=LimitStateFunction(g, "linear", n),
        known_beta=beta_star,
        known_mpp=beta_star * avec,
    ))


def sphere_problem(center: Sequence[float] = (4.0, 0.0),
                   radius: float = 1.0) -> BenchmarkProblem:
    """Failure inside a ball offset from the origin; beta = |center| - radius."""
    c = np.asarray(center, dtype=float)
    c.setflags(write=False)
    cnorm = float(np.linalg.norm(c))
    if radius <= 0.0:
        raise ConfigError(f"radius must be positive, got {radius}")
    if cnorm <= radius:
        raise ConfigError("sphere must not contain the origin: |center| must exceed radius")
    n = c.shape[0]

    def g(y: np.ndarray) -> float:
        d = y - c
        return float(d @ d) - radius * radius

    return _checked(BenchmarkProblem(
        space=UncertaintySpace.standard_normal(n),
        limit_state=LimitStateFunction(g, "sphere", n),
        known_beta=cnorm - radius,
        known_mpp=(cnorm - radius) * c / cnorm,
    ))


def parabolic_problem(c: float = 5.0, kappa: float = 0.5) -> BenchmarkProblem:
    """Curved failure surface y2 = c + kappa*y1^2; the safe set is nonconvex.

    No closed-form index is attached; the reference value is produced by the
    brute-force oracle and kept in a committed golden file.
    """
    if c <= 0.0:
        raise ConfigError(f"c must be positive, got {c}")

    def g(y: np.ndarray) -> float:
        return c - float(y[1]) + kappa * float(y[0]) ** 2

    return _checked(BenchmarkProblem(
        space=UncertaintySpace.standard_normal(2),
        limit_state=LimitStateFunction(g, "parabolic", 2),
    ))


def gapped_problem() -> BenchmarkProblem:
    """Small offset ball: the failure surface exists only inside a ~7 degree
    cone of directions, so most rays admit no repair."""
    c = np.array([4.0, 0.0])

    def g(y: np.ndarray) -> float:
        d = y - c
        return float(d @ d) - 0.25

    return _checked(BenchmarkProblem(
        space=UncertaintySpace.standard_normal(2),
        limit_state=LimitStateFunction(g, "gapped", 2),
        known_beta=3.5,
        known_mpp=np.array([3.5, 0.0]),
    ))


def polynomial_problem(dimension: int, terms: Sequence[dict], name: str = "polynomial",
                       marginals: Optional[Sequence[Marginal]] = None) -> BenchmarkProblem:
    """Limit state g(x) = sum_t coefficient_t * prod_i x_i^exponents_t[i]."""
    if dimension < 1:
        raise ConfigError(f"dimension must be >= 1, got {dimension}")
    if not terms:
        raise ConfigError("polynomial limit state needs at least one term")
    coeffs = []
    expos = []
    for t, term in enumerate(terms):
        unknown = set(term) - {"coefficient", "exponents"}
        if unknown:
            raise ConfigError(f"polynomial term {t}: unknown keys {sorted(unknown)}")
        try:
            coeffs.append(float(term["coefficient"]))
            exponents = [int(e) for e in term["exponents"]]
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"polynomial term {t}: {exc}") from exc
        if len(exponents) != dimension:
            raise ConfigError(
                f"polynomial term {t}: expected {dimension} exponents, got {len(exponents)}")
        if any(e < 0 for e in exponents):
            raise ConfigError(f"polynomial term {t}: exponents must be nonnegative")
        expos.append(exponents)
    cvec = np.array(coeffs)
    emat = np.array(expos, dtype=float)
    cvec.setflags(write=False)
    emat.setflags(write=False)

    def g(x: np.ndarray) -> float:
        return float(cvec @ np.prod(x[None, :] ** emat, axis=1))

    if marginals is None:
        space = UncertaintySpace.standard_normal(dimension)
    else:
        space = UncertaintySpace(tuple(marginals))
    return _checked(BenchmarkProblem(
        space=space,
        limit_state=LimitStateFunction(g, name, dimension),
    ))


def load_polynomial_problem(path: str | Path) -> BenchmarkProblem:
    """Read a polynomial limit state from a JSON coefficient file."""
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read polynomial file {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"polynomial file {path} must contain a JSON object")
    unknown = set(data) - {"name", "dimension", "terms", "marginals"}
    if unknown:
        raise ConfigError(f"polynomial file {path}: unknown keys {sorted(unknown)}")
    try:
        dimension = int(data["dimension"])
        terms = data["terms"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"polynomial file {path}: {exc}") from exc
    marginals = None
    if "marginals" in data:
        marginals = [_marginal_from_dict(m, i) for i, m in enumerate(data["marginals"])]
    return polynomial_problem(dimension, terms, name=str(data.get("name", "polynomial")),
                              marginals=marginals)


def _marginal_from_dict(d: dict, index: int) -> Marginal:
    unknown = set(d) - {"kind", "param1", "param2"}
    if unknown:
        raise ConfigError(f"marginal {index}: unknown keys {sorted(unknown)}")
    try:
        return Marginal(str(d["kind"]), float(d["param1"]), float(d["param2"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"marginal {index}: {exc}") from exc


REGISTRY: dict[str, Callable[..., BenchmarkProblem]] = {
    "linear": linear_problem,
    "sphere": sphere_problem,
    "parabolic": parabolic_problem,
    "gapped": gapped_problem,
}


def make_problem(name: str, **params) -> BenchmarkProblem:
    """Instantiate a registered benchmark by name, forwarding its parameters."""
    if name not in REGISTRY:
        raise ConfigError(
            f"unknown benchmark {name!r}; available: {sorted(REGISTRY)}")
    try:
        return REGISTRY[name](**params)
    except TypeError as exc:
        raise ConfigError(f"benchmark {name!r}: {exc}") from exc
