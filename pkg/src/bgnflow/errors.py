"""Exception hierarchy shared by all bgnflow modules."""


class BGNFlowError(Exception):
    """Base class for every error raised by the package."""


class InvalidDegreeError(BGNFlowError, ValueError):
    pass


class InvalidGeometryError(BGNFlowError, ValueError):
    pass


class MeshDegenerationError(BGNFlowError):
    """An element Jacobian vanished; the flow step is rejected."""


class DegenerateNormalError(BGNFlowError):
    pass


class SingularSystemError(BGNFlowError):
    """The linear system of a time step has a pivot below tolerance."""


class FieldDomainError(BGNFlowError, ValueError):
    pass


class ProjectionDomainError(BGNFlowError):
    """A point lies outside the tube where closest-point projection is unique."""


class NonconvergenceError(BGNFlowError):
    pass


class FlowAborted(BGNFlowError):
    """Wraps an error raised inside a time loop with the failing step index."""

    def __init__(self, step, cause):
        super().__init__(f"step {step}: {type(cause).__name__}: {cause}")
        self.step = step
        self.cause = cause
