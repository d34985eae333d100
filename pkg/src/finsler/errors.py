"""Exception hierarchy shared by every module of the package."""

from __future__ import annotations


class FinslerError(Exception):
    """Base class for all errors raised by this package."""


class SpecError(FinslerError):
    """A body or metric description could not be understood."""


class BadSpec(SpecError):
    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        where = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(message + where)
        self.line = line
        self.column = column


class InvalidBody(SpecError):
    pass


class NumericalFailure(FinslerError):
    """Numerics broke down: singular tensors, step underflow, kinks."""


class NonSmoothPoint(NumericalFailure):
    pass


class SingularFundamentalTensor(NumericalFailure):
    pass


class StepUnderflow(NumericalFailure):
    pass


class PointOutsideBody(FinslerError):
    pass


class OutsideUnitBall(PointOutsideBody):
    pass


class CurveLeavesDomain(PointOutsideBody):
    pass


class SegmentLeavesDomain(PointOutsideBody):
    pass


class UnboundedRay(FinslerError):
    pass


class UnboundedBody(FinslerError):
    pass


class EscapingDirection(FinslerError):
    pass


class OriginNotInterior(FinslerError):
    pass


class FormTooLarge(FinslerError):
    pass


class WindTooStrong(FinslerError):
    pass


class WeakMetricError(FinslerError):
    """Operation needs a strictly positive, strongly convex Lagrangian."""


class DegenerateDirection(FinslerError):
    pass


class DegenerateFlag(FinslerError):
    pass


class ZeroLagrangian(FinslerError):
    pass


class StationaryPoint(FinslerError):
    pass


class NotProjectivelyFlat(FinslerError):
    pass


class InconsistentBoundaryData(FinslerError):
    pass


class BoundaryReached(FinslerError):
    """Geodesic integration stopped at the boundary; ``trace`` holds the
    samples computed so far."""

    def __init__(self, message: str, trace=None):
        super().__init__(message)
        self.trace = trace
