"""Exception types shared across the package."""


class CoarsecError(Exception):
    """Base class for all package-specific errors."""


class GroundMismatchError(CoarsecError):
    """Two objects that must share a ground set do not."""


class ScheduleError(CoarsecError):
    """An entourage schedule violates nestedness or stage invariants."""


class CapExceededError(CoarsecError):
    """A construction would exceed the configured size cap."""


class MetricError(CoarsecError):
    """A distance matrix violates a metric axiom.

    Carries the offending triple (or pair) in ``witness`` when available.
    """

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class SimplicialityError(CoarsecError):
    """A vertex map fails to be simplicial; ``witness`` is a violating simplex."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class ContiguityError(CoarsecError):
    """Two maps fail to be contiguous; ``witness`` is a violating simplex."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class PreconditionError(CoarsecError):
    """An operation was invoked with its stated precondition violated."""


class FormatError(CoarsecError):
    """A space, map, or certificate file cannot be parsed or fails validation."""


class CertifyError(CoarsecError):
    """Certification cannot proceed (bad degree bound, margin, or dimension cap)."""
