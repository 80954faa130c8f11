"""Exception hierarchy shared by all modules."""


class CVSwapError(Exception):
    """Base class for all package errors."""


class ShapeError(CVSwapError, ValueError):
    """Input matrix/vector has the wrong shape or is not symmetric."""


class DomainError(CVSwapError, ValueError):
    """Scalar argument outside its physical domain."""


class NonPhysicalError(CVSwapError, ValueError):
    """Covariance matrix violates the bona fide (uncertainty) condition."""


class NumericalError(CVSwapError, ArithmeticError):
    """Numerically degenerate input (singular determinant, bad conditioning)."""


class StandardFormError(CVSwapError, ValueError):
    """Standard form unavailable for this covariance matrix."""


class DegenerateMeasurementError(CVSwapError, ValueError):
    """Bell-measurement kernel is (near-)singular."""


class UnstableModelError(CVSwapError, ValueError):
    """Drift matrix has an eigenvalue with non-negative real part."""


class IntegrationError(CVSwapError, ArithmeticError):
    """Frequency-domain integral did not converge to tolerance."""


class SchemaError(CVSwapError, ValueError):
    """Serialized object violates the documented JSON/CSV schema."""
