"""Exception hierarchy shared by every stage of the solver."""


class PatrolGameError(Exception):
    """Base class for all errors raised by :mod:`patrolgame`."""


class InstanceError(PatrolGameError, ValueError):
    """A problem instance is malformed.  ``field`` names the offending entry."""

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field


class NegativeWeight(InstanceError):
    pass


class TrackLengthMismatch(InstanceError):
    pass


class ZeroHorizon(InstanceError):
    pass


class NegativeParameter(InstanceError):
    pass


class ParseError(PatrolGameError, ValueError):
    """Raised for unreadable instance documents; ``location`` is a JSON path."""

    def __init__(self, location, message):
        super().__init__(f"{location}: {message}")
        self.location = location


class EmptyFeasibleSet(PatrolGameError):
    pass


class UnsortedSnapshot(PatrolGameError, ValueError):
    pass


class ProbabilitySumMismatch(PatrolGameError, ValueError):
    pass


class LPError(PatrolGameError):
    pass


class Infeasible(LPError):
    pass


class Unbounded(LPError):
    pass


class NumericalFailure(LPError):
    pass


class ExhaustedFlow(PatrolGameError):
    pass


class IncompatibleTopPaths(PatrolGameError):
    pass


class TooLarge(PatrolGameError):
    pass
