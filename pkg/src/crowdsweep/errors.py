"""Exception types shared across the package."""


class CrowdsweepError(Exception):
    """Base class for all crowdsweep errors."""


class OutOfReach(CrowdsweepError):
    """Projection requested from a point where the nearest set point is not trustworthy.

    Raised instead of silently picking among ambiguous candidates, or when a
    declared reach guard is exceeded.  Carries the offending point and, when
    projecting a whole cloud, the particle index.
    """

    def __init__(self, message, point=None, index=None, step=None):
        super().__init__(message)
        self.point = point
        self.index = index
        self.step = step


class NonSmoothPoint(CrowdsweepError):
    """Outward normal requested at a point where the boundary has no unique normal."""


class TimeOutOfHorizon(CrowdsweepError):
    """A moving set was evaluated outside its time horizon."""


class SizeMismatch(CrowdsweepError):
    """Two particle clouds have different cardinalities."""


class ParameterOutOfRange(CrowdsweepError):
    """A scalar parameter lies outside its admissible interval."""


class DriftSingularity(CrowdsweepError):
    """The congestion drift was evaluated at its singular point."""


class DeclaredBoundViolated(CrowdsweepError):
    """A probed field constant exceeds the declared bound.

    ``witness`` holds the sample (clouds, points, value) that broke the bound.
    """

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class MeshMismatch(CrowdsweepError):
    """A time does not lie on the trajectory mesh, or the horizon is not an even multiple of tau."""


class PreconditionViolated(CrowdsweepError):
    """A documented precondition of the solver was violated."""


class ConstantMismatch(CrowdsweepError):
    """Two trajectories do not share the constants required to compare them."""


class SamplingStarved(CrowdsweepError):
    """Rejection sampling of the initial measure accepted less than 1% of draws."""


class EmptyAdmissibleSet(CrowdsweepError):
    """No grid point of an obstacle search yields an admissible viability region."""


class ParseError(CrowdsweepError):
    """A scenario file failed to parse.  Carries line/column when known."""

    def __init__(self, message, line=None, column=None):
        super().__init__(message)
        self.line = line
        self.column = column


class ValidationError(CrowdsweepError):
    """A scenario parsed but failed a named validation check."""

    def __init__(self, check, message, witness=None):
        super().__init__(f"{check}: {message}")
        self.check = check
        self.witness = witness
