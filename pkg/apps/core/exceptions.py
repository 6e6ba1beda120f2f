"""
Core Exceptions

Error hierarchy shared by every app. Management commands translate these
into exit codes (see apps.core.management.base).

Classes:
- InertialArrayError: Base class.
- InputFileError: Unreadable, unwritable or malformed files.
- GeometryError / IdentifiabilityError / TensorRankError: Array layout problems.
- DimensionError / NoiseModelError: Size or covariance mismatches.
- EstimationError / SingularInformationError / SaturatedAxisError: Solver failures.
- CrbError / UnboundedCrbError / ClosedFormPreconditionError: Bound computation failures.
"""


class InertialArrayError(Exception):
    """Base class for all errors raised by the inertial array apps."""


class InputFileError(InertialArrayError):
    """A file could not be read, parsed or written."""


class GeometryError(InertialArrayError):
    """The array geometry is invalid for the requested operation."""


class IdentifiabilityError(GeometryError):
    """
    The measurement model is not identifiable.

    Attributes:
        verdict (IdentifiabilityVerdict or None): Diagnostic from check_identifiability.
        rank (int or None): Numerical rank of the offending matrix.
    """

    def __init__(self, message, verdict=None, rank=None):
        super().__init__(message)
        self.verdict = verdict
        self.rank = rank


class TensorRankError(IdentifiabilityError):
    """The accelerometer positions do not span 3D, so rank(R) < 4."""


class DimensionError(InertialArrayError):
    """Measurement, noise and geometry dimensions disagree."""


class NoiseModelError(DimensionError):
    """The covariance matrix is not symmetric positive definite."""


class EstimationError(InertialArrayError):
    """Base class for solver failures."""


class SingularInformationError(EstimationError):
    """The Gauss-Newton normal matrix J'PJ is not positive definite."""


class SaturatedAxisError(EstimationError):
    """
    At least one rotation axis has no unsaturated gyroscope channel.

    Attributes:
        axes (tuple[int]): Indices (0=x, 1=y, 2=z) of the fully saturated axes.
    """

    def __init__(self, message, axes=()):
        super().__init__(message)
        self.axes = tuple(axes)


class CrbError(InertialArrayError):
    """Base class for Cramer-Rao bound failures."""


class UnboundedCrbError(CrbError):
    """
    The Fisher information matrix is singular.

    Attributes:
        variances (np.ndarray): Limiting per-parameter variances over theta,
            inf for parameters that carry no information.
    """

    def __init__(self, message, variances=None):
        super().__init__(message)
        self.variances = variances


class ClosedFormPreconditionError(CrbError):
    """A closed-form bound was requested outside its validity conditions."""
