"""Exception types shared across the package.

Every failure mode of the numerical lab maps to one of these; the CLI and
the HTTP service translate them into exit codes / response statuses.
"""


class GrwlabError(Exception):
    """Base class for all domain errors raised by grwlab."""


class ExprSyntaxError(GrwlabError):
    """Malformed expression source; carries the byte offset of the problem."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


class DomainError(GrwlabError):
    """Evaluation left the mathematical domain of a function (log, sqrt, /)."""


class UnboundVariable(GrwlabError):
    """Expression evaluated with a variable missing from the bindings."""


class NotPositive(GrwlabError):
    """Warping function candidate is not positive on the sampled interval."""


class OutOfInterval(GrwlabError):
    """Height argument lies outside the warping function's interval."""


class OutOfChart(GrwlabError):
    """Point lies outside the fiber chart's coordinate domain."""


class NotSpacelike(GrwlabError):
    """Gradient bound |Du| < f(u) violated; the induced metric degenerates."""


class NotMaximal(GrwlabError):
    """Operation requires zero mean curvature at the evaluation point."""


class BoundaryNode(GrwlabError):
    """Finite-difference stencil does not fit around the requested node."""


class DegenerateMetric(GrwlabError):
    """Per-node metric field is not positive definite somewhere."""


class DisconnectedRegion(GrwlabError):
    """Geodesic-distance source cannot reach part of the grid."""


class NoConvergence(GrwlabError):
    """Newton solve hit the iteration or damping floor before the tolerance."""

    def __init__(self, message: str, report=None, grid=None):
        super().__init__(message)
        self.report = report
        self.grid = grid


class SpacelikeViolation(GrwlabError):
    """Backtracking could not keep the iterate inside the gradient constraint."""


class NotApplicable(GrwlabError):
    """Identity or check whose preconditions the supplied model fails."""


class DataFileError(GrwlabError):
    """Model or grid file missing or malformed."""
