"""Shared exception types.

Every failure mode that crosses a module boundary gets a named class here so
the CLI can map it to a stable exit code (see cli.EXIT_CODES).
"""


class PsQuintetError(Exception):
    """Base class for all package errors."""


class SchemaError(PsQuintetError):
    """Config document is malformed. Carries the offending field path."""

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")


class AdmissibilityError(PsQuintetError):
    """Parameters outside the admissible range for the requested k."""


class DegenerateRatio(PsQuintetError):
    """lambda1/lambda2 has no usable convergent above the requested floor."""


class NonConvergence(PsQuintetError):
    """Quadrature node doubling hit its cap without the estimates settling."""


class BudgetExceeded(PsQuintetError):
    """A configured work budget (quintuple count, time) would be exceeded."""


class CapacityExceeded(PsQuintetError):
    """A configured memory budget (sieve segment, enumeration size) would be exceeded."""


class EmptyWindow(PsQuintetError):
    """A prime window needed by the search contains no primes."""


class SpecMismatch(PsQuintetError):
    """A table was built with different parameters than the sum asks for."""


class IoError(PsQuintetError):
    """Filesystem failure while emitting outputs."""
