"""
Measurement Types

Value types flowing between the simulator, the estimators and the files.

Types:
- MotionState: True or estimated (w, dw, s).
- Measurement: Stacked accelerometer and gyro readings plus saturation flags.
- NoiseModel: Measurement error covariance Q.

Functions:
- channel_labels: (channel_id, kind, triad_index, axis) for every scalar channel.
- write_measurement / read_measurement: The measurement CSV format.
"""

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy import linalg

from apps.core.exceptions import DimensionError, InputFileError, NoiseModelError
from apps.core.files import read_csv_rows, write_csv_rows
from apps.geometry.arrays import AXES

MEASUREMENT_HEADER = ['channel_id', 'kind', 'triad_index', 'axis', 'value_SI', 'saturated']
ACCEL = 'accel'
GYRO = 'gyro'


def _vector3(value, name):
    vector = np.array(value, dtype=float).reshape(-1)
    if vector.shape != (3,):
        raise DimensionError(f"{name} must be a 3-vector")
    if not np.all(np.isfinite(vector)):
        raise DimensionError(f"{name} must be finite")
    vector.setflags(write=False)
    return vector


@dataclass(frozen=True, eq=False)
class MotionState:
    """
    Rigid-body motion of the array frame.

    Attributes:
        omega (np.ndarray): Angular velocity, rad/s.
        omega_dot (np.ndarray): Angular acceleration, rad/s^2.
        specific_force (np.ndarray): Specific force at the origin, m/s^2.

    Properties:
        phi: [omega_dot, specific_force], the linear parameters.
        theta: [omega, omega_dot, specific_force].
    """
    omega: np.ndarray
    omega_dot: np.ndarray = (0.0, 0.0, 0.0)
    specific_force: np.ndarray = (0.0, 0.0, 0.0)

    def __post_init__(self):
        object.__setattr__(self, 'omega', _vector3(self.omega, 'omega'))
        object.__setattr__(self, 'omega_dot', _vector3(self.omega_dot, 'omega_dot'))
        object.__setattr__(self, 'specific_force', _vector3(self.specific_force, 'specific_force'))

    @property
    def phi(self):
        return np.concatenate([self.omega_dot, self.specific_force])

    @property
    def theta(self):
        return np.concatenate([self.omega, self.omega_dot, self.specific_force])


@dataclass(frozen=True, eq=False)
class Measurement:
    """
    One snapshot of array readings.

    Attributes:
        accel (np.ndarray): 3 N_s accelerometer readings, m/s^2.
        gyro (np.ndarray): 3 N_w gyro readings, rad/s (clipped ones equal +/- gamma).
        saturated (np.ndarray): 3 N_w booleans, True where the gyro axis clipped.

    Properties:
        y: Full stacked measurement [accel, gyro].
        active_mask: Boolean mask over y; False on saturated gyro rows.
    """
    accel: np.ndarray
    gyro: np.ndarray
    saturated: np.ndarray = None

    def __post_init__(self):
        accel = np.array(self.accel, dtype=float).reshape(-1)
        gyro = np.array(self.gyro, dtype=float).reshape(-1)
        if self.saturated is None:
            saturated = np.zeros(gyro.shape, dtype=bool)
        else:
            saturated = np.array(self.saturated, dtype=bool).reshape(-1)
        if accel.size % 3 or gyro.size % 3:
            raise DimensionError("Readings must come in triads")
        if saturated.shape != gyro.shape:
            raise DimensionError("One saturation flag per gyro channel is required")
        for array in (accel, gyro, saturated):
            array.setflags(write=False)
        object.__setattr__(self, 'accel', accel)
        object.__setattr__(self, 'gyro', gyro)
        object.__setattr__(self, 'saturated', saturated)

    @property
    def y(self):
        return np.concatenate([self.accel, self.gyro])

    @property
    def active_mask(self):
        return np.concatenate([np.ones(self.accel.size, dtype=bool), ~self.saturated])

    @property
    def n_saturated(self):
        return int(self.saturated.sum())

    def validate(self, geom):
        """
        Check dimensions against a geometry and the clipping invariant.

        Raises:
            DimensionError: On size mismatch or a flagged channel that is not at +/- gamma.
        """
        if self.accel.size != geom.n_accel_channels or self.gyro.size != geom.n_gyro_channels:
            raise DimensionError(
                f"Measurement has {self.accel.size} accel / {self.gyro.size} gyro channels, "
                f"geometry expects {geom.n_accel_channels} / {geom.n_gyro_channels}"
            )
        clipped = np.abs(self.gyro[self.saturated])
        if clipped.size and not np.allclose(clipped, geom.gyro_saturation, rtol=1e-9, atol=0.0):
            raise DimensionError("Saturated gyro channels must read exactly +/- gamma")
        return self

    def gyro_signs(self):
        """
        Per-axis sign of the gyro readings (mean over triads), in {-1, 0, +1}.

        Saturated readings carry the most reliable sign, so when an axis has
        clipped channels only those are used.
        """
        readings = self.gyro.reshape(-1, 3)
        flags = self.saturated.reshape(-1, 3)
        signs = np.zeros(3)
        for axis in range(3):
            column = readings[:, axis]
            if flags[:, axis].any():
                column = column[flags[:, axis]]
            if column.size:
                signs[axis] = np.sign(column.mean())
        return signs


@dataclass(frozen=True, eq=False)
class NoiseModel:
    """
    Gaussian measurement error model n ~ N(0, Q).

    Attributes:
        Q (np.ndarray): Symmetric positive definite covariance over all channels.
        sigma_s2 (float or None): Accelerometer variance when built by iid_blocks.
        sigma_omega2 (float or None): Gyro variance when built by iid_blocks.

    Constructors:
        NoiseModel.iid_blocks(sigma_s2, sigma_omega2, geom)
        NoiseModel(Q) for a full matrix.
    """
    Q: np.ndarray
    sigma_s2: float = None
    sigma_omega2: float = None

    def __post_init__(self):
        Q = np.array(self.Q, dtype=float)
        if Q.ndim != 2 or Q.shape[0] != Q.shape[1]:
            raise NoiseModelError("Q must be a square matrix")
        scale = np.abs(Q).max() if Q.size else 0.0
        if not np.all(np.isfinite(Q)) or not np.allclose(Q, Q.T, rtol=0.0, atol=1e-12 * scale):
            raise NoiseModelError("Q must be finite and symmetric")
        if Q.size:
            try:
                linalg.cholesky(Q, lower=True)
            except linalg.LinAlgError as exc:
                raise NoiseModelError("Q must be positive definite") from exc
        Q.setflags(write=False)
        object.__setattr__(self, 'Q', Q)

    @classmethod
    def iid_blocks(cls, sigma_s2, sigma_omega2, geom):
        """Q = sigma_s2 I (accelerometers) (+) sigma_omega2 I (gyros)."""
        if sigma_s2 <= 0 or sigma_omega2 <= 0:
            raise NoiseModelError("Variances must be positive")
        diagonal = np.concatenate([
            np.full(geom.n_accel_channels, float(sigma_s2)),
            np.full(geom.n_gyro_channels, float(sigma_omega2)),
        ])
        return cls(np.diag(diagonal), float(sigma_s2), float(sigma_omega2))

    @property
    def dimension(self):
        return self.Q.shape[0]

    @property
    def is_iid(self):
        return self.sigma_s2 is not None and self.sigma_omega2 is not None

    @cached_property
    def cholesky(self):
        """Lower Cholesky factor L with L L' = Q."""
        return linalg.cholesky(self.Q, lower=True)

    @cached_property
    def inverse(self):
        inverse = linalg.cho_solve((self.cholesky, True), np.eye(self.dimension))
        return 0.5 * (inverse + inverse.T)

    def check_dimensions(self, geom):
        if self.dimension != geom.n_channels:
            raise DimensionError(
                f"Noise covariance is {self.dimension}x{self.dimension}, geometry has {geom.n_channels} channels"
            )
        return self

    def restrict(self, mask):
        """Covariance of the channels selected by a boolean mask."""
        mask = np.asarray(mask, dtype=bool)
        if mask.shape != (self.dimension,):
            raise DimensionError("Mask length must match the covariance dimension")
        return self.Q[np.ix_(mask, mask)]

    def drop_gyros(self, geom):
        """NoiseModel over the accelerometer channels only."""
        n_accel = geom.n_accel_channels
        sub = self.Q[:n_accel, :n_accel]
        return NoiseModel(sub, self.sigma_s2, None)


def channel_labels(geom):
    """
    Describe every scalar channel of the stacked measurement vector.

    Returns:
        list[tuple]: (channel_id, kind, triad_index, axis) in stacking order.
    """
    labels = []
    for triad in range(geom.n_accel_triads):
        for axis_index, axis in enumerate(AXES):
            labels.append((3 * triad + axis_index, ACCEL, triad, axis))
    offset = geom.n_accel_channels
    for triad in range(geom.n_gyro_triads):
        for axis_index, axis in enumerate(AXES):
            labels.append((offset + 3 * triad + axis_index, GYRO, triad, axis))
    return labels


def write_measurement(path, measurement, geom):
    """Write the measurement CSV, one row per scalar channel, SI values."""
    measurement.validate(geom)
    flags = np.concatenate([np.zeros(measurement.accel.size, dtype=bool), measurement.saturated])
    rows = [
        (channel_id, kind, triad, axis, float(value), int(flag))
        for (channel_id, kind, triad, axis), value, flag in zip(channel_labels(geom), measurement.y, flags)
    ]
    return write_csv_rows(path, MEASUREMENT_HEADER, rows)


def read_measurement(path, geom):
    """
    Read a measurement CSV written by write_measurement (rows in any order).

    Raises:
        InputFileError: Malformed rows or unknown channels.
        DimensionError: Channel count does not match the geometry.
    """
    rows = read_csv_rows(path)
    if rows and set(MEASUREMENT_HEADER) - set(rows[0].keys()):
        raise InputFileError(f"{path}: header must be {','.join(MEASUREMENT_HEADER)}")
    expected = {label[0]: label for label in channel_labels(geom)}
    if len(rows) != len(expected):
        raise DimensionError(f"{path}: {len(rows)} channels, geometry expects {len(expected)}")

    values = np.zeros(geom.n_channels)
    flags = np.zeros(geom.n_channels, dtype=bool)
    seen = set()
    for row in rows:
        try:
            channel_id = int(row['channel_id'])
            value = float(row['value_SI'])
            flag = int(row['saturated'])
            triad = int(row['triad_index'])
        except (TypeError, ValueError) as exc:
            raise InputFileError(f"{path}: malformed row {row}") from exc
        label = expected.get(channel_id)
        if label is None or channel_id in seen:
            raise InputFileError(f"{path}: unknown or duplicate channel {channel_id}")
        if (row['kind'], triad, row['axis']) != label[1:]:
            raise InputFileError(f"{path}: channel {channel_id} does not match its kind/triad/axis")
        if flag and row['kind'] != GYRO:
            raise InputFileError(f"{path}: only gyro channels can be saturated")
        seen.add(channel_id)
        values[channel_id] = value
        flags[channel_id] = bool(flag)

    n_accel = geom.n_accel_channels
    measurement = Measurement(values[:n_accel], values[n_accel:], flags[n_accel:])
    return measurement.validate(geom)
