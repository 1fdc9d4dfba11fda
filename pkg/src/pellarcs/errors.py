"""Exception hierarchy shared by all pellarcs modules."""


class PellarcsError(Exception):
    """Base class for every error raised by this package."""


class DomainError(PellarcsError):
    """An argument lies outside the supported domain."""


class ConvergenceError(PellarcsError):
    """An iteration (AGM, Newton, series) failed to reach its tolerance."""


class PoleError(PellarcsError):
    """Evaluation was requested too close to a pole."""


class DegenerateError(PellarcsError):
    """A parameter combination collapses onto the boundary of the model."""


class CrossCheckError(PellarcsError):
    """Two independent formulas for the same quantity disagree."""


class BracketError(PellarcsError):
    """A root bracket does not contain a sign change."""


class CertificationError(PellarcsError):
    """A computed object failed its internal certification test."""


class ContinuationError(PellarcsError):
    """Curve continuation stalled; carries the last index that converged."""

    def __init__(self, message, last_good_index=None):
        super().__init__(message)
        self.last_good_index = last_good_index
