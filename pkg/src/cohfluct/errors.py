"""Exception hierarchy shared by all modules."""


class CohFluctError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(CohFluctError, ValueError):
    """An input violates a documented precondition (bad vector, bad index...)."""


class MajorisationError(CohFluctError):
    """Raised when a transport is requested between non-majorised vectors."""

    def __init__(self, message, prefix_index):
        super().__init__(message)
        self.prefix_index = prefix_index


class DegeneracyError(CohFluctError):
    """Numerical degeneracy, e.g. no perfect matching left while decomposing."""


class WraparoundError(CohFluctError):
    """A battery profile would leave the available level range."""


class GridError(CohFluctError):
    """A fluctuation is not an integer multiple of the coherence quantum."""

    def __init__(self, message, offending):
        super().__init__(message)
        self.offending = list(offending)


class ConditionViolation(CohFluctError):
    """A coupling breaks a constraint required by a downstream construction."""


class InconclusiveError(CohFluctError):
    """The LP solver stopped without proving feasibility or infeasibility."""


class PreconditionError(CohFluctError):
    """A theorem was evaluated outside its hypotheses."""


class SizeCapError(CohFluctError):
    """A dense computation was requested beyond its size cap."""
