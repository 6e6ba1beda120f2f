"""
Array Geometry

This module describes where the sensors of an inertial array sit and builds the
constant matrices of the measurement model.

Model Logic:
- Each accelerometer triad i sits at r_i (meters, array frame) and measures
  s + w x (w x r_i) + dw x r_i.
- Gyroscope triads measure w regardless of position, so only their count matters.
- The Euler-force design matrix G stacks -skew(r_i); H = [G | 1 (x) I3] on the
  accelerometer rows and zero on the gyro rows.
- The model is identifiable with >= 1 gyro triad and >= 3 accelerometer triads
  whose positions span at least a plane.

Contents:
- ArrayGeometry, IdentifiabilityVerdict, IdentifiabilityReason
- skew, build_G, build_H, check_identifiability, supports_tensor_method
- planar_square_array, cube_array, square_grid_parameters
"""

from dataclasses import dataclass, field

import numpy as np
from django.db import models

from apps.core.exceptions import ClosedFormPreconditionError, GeometryError
from apps.core.linalg import numerical_rank

AXES = ('x', 'y', 'z')


@dataclass(frozen=True, eq=False)
class ArrayGeometry:
    """
    Sensor layout of an inertial array.

    Attributes:
        accel_positions (np.ndarray): (N_s, 3) accelerometer triad positions in meters.
        n_gyro_triads (int): Number of gyroscope triads N_w.
        gyro_saturation (float): Gyro dynamic range gamma in rad/s; readings are
            clipped to [-gamma, gamma]. np.inf disables clipping.

    Properties:
        n_accel_triads, n_accel_channels, n_gyro_channels, n_channels

    Example:
        >>> geom = ArrayGeometry([[0, 0, 0], [0.01, 0, 0], [0, 0.01, 0]], n_gyro_triads=1)
        >>> geom.n_channels
        12
    """
    accel_positions: np.ndarray
    n_gyro_triads: int = 0
    gyro_saturation: float = np.inf

    def __post_init__(self):
        positions = np.array(self.accel_positions, dtype=float).reshape(-1, 3) \
            if np.size(self.accel_positions) else np.zeros((0, 3))
        if not np.all(np.isfinite(positions)):
            raise GeometryError("Accelerometer positions must be finite")
        if int(self.n_gyro_triads) != self.n_gyro_triads or self.n_gyro_triads < 0:
            raise GeometryError("n_gyro_triads must be a non-negative integer")
        if positions.shape[0] + int(self.n_gyro_triads) == 0:
            raise GeometryError("The array must contain at least one sensor triad")
        if not self.gyro_saturation > 0:
            raise GeometryError("gyro_saturation must be positive")
        positions.setflags(write=False)
        object.__setattr__(self, 'accel_positions', positions)
        object.__setattr__(self, 'n_gyro_triads', int(self.n_gyro_triads))
        object.__setattr__(self, 'gyro_saturation', float(self.gyro_saturation))

    @property
    def n_accel_triads(self):
        return self.accel_positions.shape[0]

    @property
    def n_accel_channels(self):
        return 3 * self.n_accel_triads

    @property
    def n_gyro_channels(self):
        return 3 * self.n_gyro_triads

    @property
    def n_channels(self):
        return self.n_accel_channels + self.n_gyro_channels

    def with_positions(self, positions):
        """Return a copy with different accelerometer positions (same gyros)."""
        return ArrayGeometry(positions, self.n_gyro_triads, self.gyro_saturation)

    def with_gyro_triads(self, n_gyro_triads):
        """Return a copy with a different number of gyro triads."""
        return ArrayGeometry(self.accel_positions, n_gyro_triads, self.gyro_saturation)


class IdentifiabilityReason(models.TextChoices):
    IDENTIFIABLE = 'identifiable', 'Identifiable'
    SIGN_AMBIGUITY = 'sign_ambiguity', 'No gyroscope triad: w and -w give identical data'
    TOO_FEW_ACCELEROMETERS = 'too_few_accelerometers', 'Fewer than three accelerometer triads'
    COLLINEAR_ACCELEROMETERS = 'collinear_accelerometers', 'Accelerometer positions do not span a plane'


@dataclass(frozen=True)
class IdentifiabilityVerdict:
    """
    Outcome of check_identifiability.

    Attributes:
        identifiable (bool): True when (N_w >= 1) and (N_s >= 3) and span >= 2.
        h_rank (int): Numerical rank of H (6 when the accelerometer conditions hold).
        position_span_dim (int): Dimension spanned by r_i - r_1, in {0, 1, 2, 3}.
        reason (IdentifiabilityReason): First failing condition, or IDENTIFIABLE.
    """
    identifiable: bool
    h_rank: int
    position_span_dim: int
    reason: IdentifiabilityReason
    details: dict = field(default_factory=dict)

    def as_dict(self):
        return {
            'identifiable': self.identifiable,
            'h_rank': self.h_rank,
            'position_span_dim': self.position_span_dim,
            'reason': str(self.reason.value),
            'reason_label': str(self.reason.label),
            **self.details,
        }


def skew(v):
    """
    Skew-symmetric matrix of a 3-vector, so that skew(v) @ b == cross(v, b).

    Example:
        >>> skew([1, 2, 3])
        array([[ 0., -3.,  2.],
               [ 3.,  0., -1.],
               [-2.,  1.,  0.]])
    """
    x, y, z = np.asarray(v, dtype=float)
    return np.array([
        [0.0, -z, y],
        [z, 0.0, -x],
        [-y, x, 0.0],
    ])


def skew_stack(positions):
    """Skew matrices of every row of an (N, 3) array, shape (N, 3, 3)."""
    positions = np.asarray(positions, dtype=float).reshape(-1, 3)
    out = np.zeros((positions.shape[0], 3, 3))
    x, y, z = positions[:, 0], positions[:, 1], positions[:, 2]
    out[:, 0, 1], out[:, 0, 2] = -z, y
    out[:, 1, 0], out[:, 1, 2] = z, -x
    out[:, 2, 0], out[:, 2, 1] = -y, x
    return out


def build_G(geom):
    """
    Euler-force design matrix, shape (3 N_s, 3), blocks -skew(r_i).

    Raises:
        GeometryError: If the array has no accelerometer triad.
    """
    if geom.n_accel_triads == 0:
        raise GeometryError("build_G needs at least one accelerometer triad")
    return -skew_stack(geom.accel_positions).reshape(-1, 3)


def build_H(geom):
    """
    Linear-part design matrix of the full array, shape (3 (N_s + N_w), 6).

    Columns 0..2 multiply the angular acceleration, columns 3..5 the specific
    force. Gyro rows are zero.
    """
    H = np.zeros((geom.n_channels, 6))
    if geom.n_accel_triads:
        H[:geom.n_accel_channels, :3] = build_G(geom)
        H[:geom.n_accel_channels, 3:] = np.tile(np.eye(3), (geom.n_accel_triads, 1))
    return H


def position_span_dim(positions):
    """Dimension of the affine span of the positions (rank of r_i - r_1)."""
    positions = np.asarray(positions, dtype=float).reshape(-1, 3)
    if positions.shape[0] < 2:
        return 0
    return numerical_rank(positions - positions[0])


def check_identifiability(geom):
    """
    Decide whether (w, dw, s) is identifiable from the noiseless model.

    Args:
        geom (ArrayGeometry): The array.

    Returns:
        IdentifiabilityVerdict: Rank diagnostics and the first failing condition.
    """
    span = position_span_dim(geom.accel_positions)
    h_rank = numerical_rank(build_H(geom)) if geom.n_accel_triads else 0

    if geom.n_gyro_triads < 1:
        reason = IdentifiabilityReason.SIGN_AMBIGUITY
    elif geom.n_accel_triads < 3:
        reason = IdentifiabilityReason.TOO_FEW_ACCELEROMETERS
    elif span < 2:
        reason = IdentifiabilityReason.COLLINEAR_ACCELEROMETERS
    else:
        reason = IdentifiabilityReason.IDENTIFIABLE

    return IdentifiabilityVerdict(
        identifiable=reason == IdentifiabilityReason.IDENTIFIABLE,
        h_rank=h_rank,
        position_span_dim=span,
        reason=reason,
        details={'tensor_capable': supports_tensor_method(geom)},
    )


def supports_tensor_method(geom):
    """True when [1; r_i] has rank 4, i.e. N_s >= 4 and the positions span 3D."""
    return geom.n_accel_triads >= 4 and position_span_dim(geom.accel_positions) == 3


# =============================================================================
# REFERENCE ARRAYS
# =============================================================================

def planar_square_array(alpha=0.01, n_per_side=2, n_gyro_triads=4, gyro_saturation=np.inf):
    """
    Accelerometers on a centred n x n grid with spacing alpha in the xy-plane.

    The default is the four-triad, 1 cm array used for the planar studies.
    """
    if n_per_side < 2 or alpha <= 0:
        raise GeometryError("A square grid needs n_per_side >= 2 and alpha > 0")
    ticks = (np.arange(n_per_side) - (n_per_side - 1) / 2.0) * alpha
    xs, ys = np.meshgrid(ticks, ticks, indexing='ij')
    positions = np.column_stack([xs.ravel(), ys.ravel(), np.zeros(xs.size)])
    return ArrayGeometry(positions, n_gyro_triads, gyro_saturation)


def cube_array(edge=0.01, n_gyro_triads=6, gyro_saturation=np.inf):
    """Six accelerometer triads at the face centres of a cube with the given edge."""
    half = edge / 2.0
    positions = np.vstack([np.eye(3) * half, -np.eye(3) * half])
    return ArrayGeometry(positions, n_gyro_triads, gyro_saturation)


def square_grid_parameters(geom, rel_tol=1e-6):
    """
    Recover (alpha, N_s) for a centred planar square grid in the xy-plane.

    Raises:
        ClosedFormPreconditionError: If the accelerometers are not such a grid.
    """
    positions = geom.accel_positions
    n_s = positions.shape[0]
    n_per_side = int(round(np.sqrt(n_s)))
    if n_per_side < 2 or n_per_side ** 2 != n_s:
        raise ClosedFormPreconditionError(f"N_s={n_s} is not a square number >= 4")

    extent = positions[:, 0].max() - positions[:, 0].min()
    alpha = extent / (n_per_side - 1)
    if alpha <= 0:
        raise ClosedFormPreconditionError("Degenerate grid spacing")
    tol = rel_tol * alpha

    expected = planar_square_array(alpha, n_per_side).accel_positions
    distances = np.linalg.norm(positions[:, None, :] - expected[None, :, :], axis=2)
    nearest = distances.argmin(axis=1)
    if np.any(distances[np.arange(n_s), nearest] > tol) or len(set(nearest.tolist())) != n_s:
        raise ClosedFormPreconditionError(
            "Accelerometers do not form a centred square grid in the xy-plane"
        )
    return float(alpha), n_s
