"""Exception hierarchy shared by all modules."""


class DepboundError(Exception):
    """Base class for computation errors (CLI exit code 3)."""


class AbsoluteContinuityViolation(DepboundError):
    """Some state has positive mass under the first measure and none under the second."""


class DomainMismatch(DepboundError):
    pass


class ZeroMassState(DepboundError):
    pass


class ConvergenceFailure(DepboundError):
    pass


class TooLarge(DepboundError):
    """Enumeration would exceed the path budget."""


class ScheduleInvalid(DepboundError):
    pass


class UnsupportedProcess(DepboundError):
    pass


class ZeroMarginal(DepboundError):
    pass


class NoHalfPoint(DepboundError):
    pass


class NotContracting(DepboundError):
    pass


class PreconditionT(DepboundError):
    pass


class NoCrossover(DepboundError):
    pass


class OutOfSupport(DepboundError):
    pass


class InvalidPrefix(DepboundError):
    pass


class NoStationary(DepboundError):
    pass


class Unreachable(DepboundError):
    pass


class Unsupported(DepboundError):
    pass
