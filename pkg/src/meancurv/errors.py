"""Exception types shared across the package."""


class MeanCurvError(Exception):
    """Base class for all package-specific errors."""


class NonPositiveSupport(MeanCurvError):
    """A support value came out non-positive: the reference point is not
    interior to the body along some direction."""


class InvalidOrder(MeanCurvError):
    """A quadrature order or count was not a positive integer."""


class NonFiniteIntegrand(MeanCurvError):
    """The integrand returned NaN or infinity at a quadrature node or
    sample point."""


class ExcisionTooLarge(MeanCurvError):
    """The excision radius reaches the pedal surface, so the excised ball
    is not contained in the pedal body."""


class ZeroAcceptance(MeanCurvError):
    """No Monte Carlo sample landed inside the pedal body, which signals a
    broken bounding box."""


class DegenerateMetric(MeanCurvError):
    """The first fundamental form is singular at the evaluation point."""


class BadDihedral(MeanCurvError):
    """A polytope edge carries a dihedral angle outside (0, pi]."""


class UnboundedBody(MeanCurvError):
    """Support values exceed the sanity cap: the body is not bounded."""


class OddExponent(MeanCurvError):
    """Superellipsoid exponents must be even integers >= 2."""


class ParseError(MeanCurvError):
    """A mesh file failed to parse; carries the offending line number."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class IndexOutOfRange(ParseError):
    """A face references a vertex index outside the vertex list."""


class NonConvexMesh(MeanCurvError):
    """Mesh vertices are not all on the convex side of every face plane."""


class NonManifoldEdge(MeanCurvError):
    """An edge is shared by a number of faces different from two."""


class NonPlanarFace(MeanCurvError):
    """A face's vertices do not lie in a common plane."""


class ShapeSpecError(MeanCurvError):
    """A shape specification (inline or file) could not be interpreted."""
