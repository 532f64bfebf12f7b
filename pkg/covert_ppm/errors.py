"""Exception hierarchy for covert-ppm.

Every error raised on purpose by the library derives from CovertError, so callers
(and the command line entry point) can separate domain failures from bugs.
"""

from typing import Iterable


class CovertError(Exception):
    """Base error for this package."""


class AbsoluteContinuityViolation(CovertError):
    """A distribution puts mass where the reference distribution has none."""


class AlphabetMismatch(CovertError):
    """Two distributions (or a score and a distribution) use different alphabets."""


class DomainError(CovertError, ValueError):
    """An argument lies outside the domain of a formula (e.g. Q^-1 of p outside (0,1))."""


class InvalidParams(CovertError, ValueError):
    """Structural parameters are inconsistent (e.g. pulse count larger than blocklength)."""


class CombinatorialBlowup(CovertError):
    """An exact enumeration would exceed its configured cap."""


class DegenerateVariance(CovertError):
    """A normal approximation was requested for a sum with zero variance."""


class InfeasibleBlocklength(CovertError):
    """A planner cannot produce a valid code at this blocklength."""


class ComplexRootRegime(CovertError):
    """The trigonometric cubic formula has no real root in the requested branch."""


class PreconditionViolation(CovertError):
    """The hypothesis of a bound does not hold for the supplied arguments."""


class InfeasibleWeight(CovertError):
    """A weight-indexed converse bound is undefined at this weight."""


class AssumptionViolation(CovertError):
    """The channel pair breaks the standing absolute continuity assumptions."""


class ConfigError(CovertError):
    """An experiment configuration could not be parsed or validated."""


class UnknownSuite(CovertError, KeyError):
    """A verification suite name is not registered."""

    def __init__(self, name: str, available: Iterable[str]):
        self.name = name
        self.available = tuple(available)
        super().__init__(f"unknown suite '{name}' (available: {', '.join(self.available)})")

    def __str__(self) -> str:
        return str(self.args[0])
