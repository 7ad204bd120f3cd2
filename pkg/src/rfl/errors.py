"""Exception hierarchy shared by every module."""


class RflError(Exception):
    """Base class for all errors raised by :mod:`rfl`."""


class DomainError(RflError, ValueError):
    """An argument lies outside the domain of the operation."""


class RegimeError(RflError):
    """The requested parameters fall outside the regime a method covers."""


class DegenerateStateError(RflError):
    """A trajectory state collapsed to (0, 0)."""


class PrecisionError(RflError):
    """Working precision was insufficient for a guaranteed result."""


class ResourceError(RflError):
    """A combinatorial or refinement budget was exhausted.

    ``achieved`` carries the best error bound reached before giving up,
    when one is available.
    """

    def __init__(self, message, achieved=None):
        super().__init__(message)
        self.achieved = achieved
