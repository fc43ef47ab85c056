"""Exception hierarchy shared by every weylgeo module."""


class ToolkitError(Exception):
    """Base class for all weylgeo errors."""


class DomainError(ToolkitError):
    """Input lies outside the domain an evaluator is defined on."""


class NonFiniteError(ToolkitError):
    """An evaluation produced NaN or infinity."""


class ToleranceError(ToolkitError):
    """Two routes to the same quantity disagree beyond the allowed bound."""


class SingularMetricError(ToolkitError):
    """Metric matrix is not invertible at the requested point."""


class DegreeOverflowError(ToolkitError):
    """Form degree would exceed the real dimension of the manifold."""


class DegenerateScalarError(ToolkitError):
    """Weighting scalar vanishes identically on the probe set."""


class StepError(ToolkitError):
    """Integrator failed its step-doubling convergence check."""


class PunctureOnCurveError(ToolkitError):
    """Winding number requested around a point lying on the curve."""


class NullVectorError(ToolkitError):
    """State vector is (numerically) the null vector."""


class ChartError(ToolkitError):
    """Projective chart is undefined because the dividing coordinate vanishes."""


class NonHermitianError(ToolkitError):
    """Matrix expected to be Hermitian is not."""


class DimensionError(ToolkitError):
    """Operands have incompatible dimensions."""


class NotProjectorError(ToolkitError):
    """Matrix is not an orthogonal projector (idempotent Hermitian)."""


class TimeOrderError(ToolkitError):
    """Event times are not strictly increasing."""


class DegeneracyError(ToolkitError):
    """Spectral gap closed below the configured threshold."""


class ParseError(ToolkitError):
    """A descriptor document failed validation.

    ``path`` names the offending key, dotted from the document root.
    """

    def __init__(self, message: str, path: str = ""):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path
