"""Exception types raised by gsigma."""


class GSigmaError(Exception):
    """Base class for all library errors."""


class DimensionError(GSigmaError, ValueError):
    """Operands have incompatible matrix dimensions."""


class NotInAlgebraError(GSigmaError, ValueError):
    """A matrix is not anti-hermitian and traceless within tolerance."""


class NotUnitaryError(GSigmaError, ValueError):
    """A matrix expected to be (special) unitary is not."""


class ConstraintError(GSigmaError, ValueError):
    """A field value or jet violates the constraint X^dagger X = 1."""


class MissingDerivativeError(GSigmaError, ValueError):
    """A jet lacks the derivative data an operation needs."""


class DegenerateMetricError(GSigmaError, ArithmeticError):
    """The induced metric is singular (or below threshold) where regularity is required."""


class BlockStructureError(GSigmaError, ArithmeticError):
    """Conjugated tangents do not have the expected off-diagonal block form."""


class SolverError(GSigmaError, ArithmeticError):
    """The characteristic solver failed (corner mismatch, retraction, divergence)."""


class GridError(GSigmaError, ValueError):
    """Invalid grid descriptor or node index."""


class CertificationError(GSigmaError, ValueError):
    """A candidate analytic solution fails the field equation on its sample grid."""


class ConfigError(GSigmaError, ValueError):
    """Invalid experiment configuration."""
