"""Exception types shared across the package.

The command line maps these onto process exit codes: configuration problems
exit with 2, step-size / divergence failures with 3, and invariant breaches
under strict monitoring with 1.
"""

from __future__ import annotations


class CtnsError(Exception):
    """Base class for all package errors."""


class ConfigurationError(CtnsError):
    """Invalid configuration: bad grid sizes, unknown or duplicate config keys,
    inconsistent coefficient/noise settings, malformed snapshot files."""


class ContractViolationError(CtnsError):
    """An operator precondition failed, e.g. advecting with a velocity field
    whose discrete divergence is not zero."""


class StepSizeError(CtnsError):
    """The requested time step exceeds the advective stability limit."""

    def __init__(self, message: str, admissible_dt: float):
        super().__init__(message)
        self.admissible_dt = admissible_dt


class DivergenceError(CtnsError):
    """A field stopped being finite during time stepping."""

    def __init__(self, message: str, term: str = "unknown", t: float = float("nan")):
        super().__init__(message)
        self.term = term
        self.t = t


class InvariantBreachError(CtnsError):
    """A monitored run invariant (mass drift, attractant overshoot, negative
    density) exceeded its tolerance while strict monitoring was enabled."""
