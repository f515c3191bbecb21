"""
Error Types

Validation errors describe malformed or inadmissible input (CLI exit 2);
numerical errors describe failures of an otherwise valid computation (exit 3).
"""

from typing import Optional


class SpectralError(Exception):
    """Base class for all toolkit errors"""


class ValidationError(SpectralError):
    """Input violates a structural precondition"""


class DocumentError(ValidationError):
    """Malformed JSON document"""

    def __init__(self, message: str, field: Optional[str] = None, line: Optional[int] = None):
        self.field = field
        self.line = line
        location = []
        if line is not None:
            location.append(f"line {line}")
        if field:
            location.append(f"field '{field}'")
        prefix = f"{', '.join(location)}: " if location else ""
        super().__init__(f"{prefix}{message}")


class NotAdmissibleError(ValidationError):
    """Point lies on a line Re(i b_j z) = 0"""


class SectorMismatchError(ValidationError):
    """Lambda is not inside the requested sector"""


class PatternMismatchError(ValidationError):
    """Problem does not match a recognized boundary pattern"""


class Omega1UndefinedError(ValidationError):
    """Endpoint continuity flags needed by omega1 are missing"""


class ModelOrderError(ValidationError):
    """Asymptotic model requested outside its range"""


class ReductionError(ValidationError):
    """Beam model cannot be reduced to a Dirac-type system"""


class NumericalError(SpectralError):
    """Numerical procedure failed"""


class PropagationError(NumericalError):
    """Fundamental matrix integration failed"""

    def __init__(self, message: str, error_estimate: Optional[float] = None):
        self.error_estimate = error_estimate
        if error_estimate is not None:
            message = f"{message} (error estimate {error_estimate:.3e})"
        super().__init__(message)


class BoundaryZeroError(NumericalError):
    """Characteristic determinant vanishes on a contour"""


class QuadratureError(NumericalError):
    """Contour quadrature did not converge"""


class NearSpectrumError(NumericalError):
    """Lambda is too close to the spectrum for a stable solve"""

    def __init__(self, message: str, condition: Optional[float] = None):
        self.condition = condition
        if condition is not None:
            message = f"{message} (condition {condition:.3e})"
        super().__init__(message)
