"""Exception hierarchy shared by every module of the package."""


class MovingWaveError(Exception):
    """Base class for all package errors."""


class ParseError(MovingWaveError):
    """Malformed expression or configuration text."""

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        self.detail = message
        where = ""
        if line is not None:
            where = f" (line {line}, column {column})"
        elif column is not None:
            where = f" (column {column})"
        super().__init__(message + where)


class ValidationError(MovingWaveError):
    """A configuration or object violates a stated invariant."""

    def __init__(self, message, field=None):
        self.field = field
        if field is not None and field not in message:
            message = f"{field}: {message}"
        super().__init__(message)


class DomainError(MovingWaveError):
    """A function was evaluated outside its domain of definition."""


class DegenerateDenominator(DomainError):
    pass


class NotOnBoundary(MovingWaveError):
    pass


class LuminalBoundary(ValidationError):
    pass


class EmptyRegion(MovingWaveError):
    pass


class BoundaryConditionViolation(MovingWaveError):
    pass


class NumericalFailure(MovingWaveError):
    """Base for failures that map to CLI exit code 3."""


class CFLViolation(NumericalFailure):
    pass


class UnstableBlowup(NumericalFailure):
    def __init__(self, step, value):
        self.step = step
        self.value = value
        super().__init__(f"solution exceeded {value:.3g} at step {step}")


class NoConvergence(NumericalFailure):
    def __init__(self, message, residuals=None):
        self.residuals = list(residuals or [])
        super().__init__(message)
