"""Exception hierarchy shared across the solver."""

from __future__ import annotations


class HlriError(Exception):
    """Base class for all library errors."""


class ConfigError(HlriError):
    """Invalid configuration value, file, or field (CLI exit code 1)."""


class DomainError(HlriError):
    """A physical coordinate lies outside its marginal's support."""


class DecodeError(HlriError):
    """A bitstring decodes to a degenerate (zero-norm) direction."""


class ContractError(HlriError):
    """An operation precondition was violated by the caller."""


class CalibrationError(HlriError):
    """Penalty anchors do not determine a valid (K, q) pair."""


class DegenerateProblemError(HlriError):
    """The limit state at the standard-space origin is not safely positive."""


class SurfaceNotFoundError(HlriError):
    """No point on the failure surface was found within the run budget.

    Carries the best partially repaired result seen, if any, so callers
    can report how close the search got (CLI exit code 2).
    """

    def __init__(self, message: str, best_partial=None):
        super().__init__(message)
        self.best_partial = best_partial
