"""Exception hierarchy for kgphase.

Every error raised by this package derives from :class:`KgPhaseError`, so
callers can catch one type at the CLI boundary and map it to an exit code.
"""


class KgPhaseError(Exception):
    """Base class for all kgphase errors."""


class DomainError(KgPhaseError):
    """A physical parameter violates its sign or range constraint."""


class PlanError(KgPhaseError):
    """A sweep plan is structurally invalid (empty ranges, duplicate keys, ...)."""


class IoError(KgPhaseError):
    """A journal or output file could not be read or written."""


class StageDivergence(KgPhaseError):
    """The implicit stage iteration failed to reach tolerance.

    Signals that the time step is too large for the current state; the fix is
    an explicit dt reduction, never a silent solver fallback.
    """

    def __init__(self, message: str, t: float | None = None):
        super().__init__(message)
        self.t = t


class NumericalBlowup(KgPhaseError):
    """A field exceeded the blow-up guard 10*max(sqrt(2*mu), 1)."""

    def __init__(self, message: str, t: float | None = None):
        super().__init__(message)
        self.t = t
