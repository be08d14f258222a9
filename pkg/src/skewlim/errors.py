"""Exception hierarchy shared by all modules."""


class SkewlimError(Exception):
    """Base class for every error raised by this package."""


class MalformedInput(SkewlimError, ValueError):
    pass


class PeriodOverflow(SkewlimError):
    def __init__(self, period, cap):
        super().__init__(f"period {period} exceeds cap {cap}")
        self.period = period
        self.cap = cap


class NotALimit(SkewlimError, ValueError):
    pass


class NotInjective(SkewlimError):
    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class NotRepresentable(SkewlimError):
    pass


class UnboundVariable(SkewlimError):
    def __init__(self, name):
        super().__init__(f"unbound variable {name!r}")
        self.name = name


class FormulaSyntaxError(SkewlimError, ValueError):
    """Raised by the formula and term parsers; carries the offending offset."""

    def __init__(self, message, position):
        super().__init__(f"{message} at position {position}")
        self.position = position


class ArityMismatch(SkewlimError, ValueError):
    pass


class MissingLevel(SkewlimError, KeyError):
    def __init__(self, level):
        super().__init__(f"environment has no value for level {level}")
        self.level = level


class RankTooHigh(SkewlimError, ValueError):
    pass


class StageCapExceeded(SkewlimError):
    pass


class NoRepresentative(SkewlimError):
    pass


class InvalidRepresentative(SkewlimError):
    def __init__(self, message, stage=None, payload=None):
        super().__init__(message)
        self.stage = stage
        self.payload = payload


class DiagramViolation(SkewlimError):
    def __init__(self, diagram, witness):
        super().__init__(f"{diagram} does not commute at {witness}")
        self.diagram = diagram
        self.witness = witness
