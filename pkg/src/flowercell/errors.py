"""Exception types shared across the package."""


class FlowercellError(Exception):
    pass


class ValidationError(FlowercellError, ValueError):
    """Invalid input rejected at construction time."""


class UnsupportedKindError(FlowercellError, TypeError):
    """Operation requires the other body kind (smooth vs polygon)."""


class DomainError(FlowercellError, ValueError):
    """Arguments outside the domain of an operation."""


class NumericError(FlowercellError, ArithmeticError):
    """A numeric routine failed to reach its target tolerance."""

    def __init__(self, message, achieved=None):
        super().__init__(message)
        self.achieved = achieved


class UnboundedCellError(FlowercellError, RuntimeError):
    """Zero-cell construction could not certify a bounded cell."""

    def __init__(self, message, radius_reached=None):
        super().__init__(message)
        self.radius_reached = radius_reached


class ExperimentError(FlowercellError, RuntimeError):
    """Monte Carlo experiment failed structurally (not statistically)."""
