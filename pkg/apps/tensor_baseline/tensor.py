"""
Angular Acceleration Tensor Method

Accelerometer-only baseline. Each triad reads y_i = s + W r_i with
W = skew(w)^2 + skew(dw), so [s W] is linear in the data and is fitted by
unconstrained least squares, ignoring the structure of W.

Model Logic:
- X_hat = Y R' (R R')^-1 with R = [1 ... 1; r_1 ... r_N].
- dw from the antisymmetric part of W_hat.
- w w' = (W + W')/2 - tr(W + W')/4 I, so |w| per axis from its diagonal.
- The global sign of w comes from the gyro readings (anchor: largest |w_i|,
  ties resolved x before y before z); relative signs from the off-diagonals.

Functions:
- tensor_ls: Least-squares [s W] and the derived quantities.
- extract_angular_acceleration, extract_angular_velocity: Read W_hat.
- tensor_method: tensor_ls on a Measurement with sign resolution.
"""

import logging
from dataclasses import dataclass, replace

import numpy as np
from scipy import linalg

from apps.core.exceptions import DimensionError, TensorRankError
from apps.core.linalg import numerical_rank
from apps.core.units import to_external

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class TensorEstimate:
    """
    Result of the tensor method.

    Attributes:
        s_hat (np.ndarray): Specific force, m/s^2.
        W_hat (np.ndarray): Unconstrained 3x3 tensor estimate.
        omega_dot_hat (np.ndarray): Angular acceleration, rad/s^2.
        omega_abs (np.ndarray): |w| per axis, rad/s.
        outer_product (np.ndarray): Symmetric estimate of w w'.
        omega_signed (np.ndarray or None): w with resolved signs, rad/s.
        low_confidence (bool): Anchor gyro sign was zero and + was assumed.
    """
    s_hat: np.ndarray
    W_hat: np.ndarray
    omega_dot_hat: np.ndarray
    omega_abs: np.ndarray
    outer_product: np.ndarray
    omega_signed: np.ndarray = None
    low_confidence: bool = False

    def as_dict(self, units):
        payload = {
            'units': units,
            's_hat': self.s_hat,
            'W_hat': self.W_hat,
            'omega_dot_hat': to_external(self.omega_dot_hat, units),
            'omega_abs': to_external(self.omega_abs, units),
            'outer_product': self.outer_product,
            'low_confidence': self.low_confidence,
        }
        payload['omega_signed'] = None if self.omega_signed is None else to_external(self.omega_signed, units)
        return payload


def design_matrix(geom):
    """R = [1 ... 1; r_1 ... r_N], shape (4, N_s)."""
    return np.vstack([np.ones(geom.n_accel_triads), geom.accel_positions.T])


def extract_angular_acceleration(W_hat):
    """
    dw from the antisymmetric part of W_hat.

    [w32 - w23, w13 - w31, w21 - w12] equals 2 dw for W = skew(w)^2 + skew(dw),
    hence the division by two.
    """
    W = np.asarray(W_hat, dtype=float)
    return 0.5 * np.array([W[2, 1] - W[1, 2], W[0, 2] - W[2, 0], W[1, 0] - W[0, 1]])


def outer_product_estimate(W_hat):
    """Symmetric estimate of w w' from W_hat."""
    W = np.asarray(W_hat, dtype=float)
    symmetric = W + W.T
    return 0.5 * symmetric - 0.25 * np.trace(symmetric) * np.eye(3)


def extract_angular_velocity(W_hat, gyro_signs=None):
    """
    |w| per axis and, when gyro signs are given, the signed w.

    Args:
        W_hat (np.ndarray): Tensor estimate.
        gyro_signs (array-like or None): Per-axis signs in {-1, 0, +1}.

    Returns:
        tuple: (omega_abs, omega_signed, low_confidence); omega_signed is
        None without gyro signs.
    """
    outer = outer_product_estimate(W_hat)
    omega_abs = np.sqrt(np.clip(np.diag(outer), 0.0, None))
    if gyro_signs is None:
        return omega_abs, None, False
    if not np.any(omega_abs):
        return omega_abs, np.zeros(3), False

    gyro_signs = np.sign(np.asarray(gyro_signs, dtype=float))
    anchor = int(np.argmax(omega_abs))
    anchor_sign = gyro_signs[anchor]
    low_confidence = anchor_sign == 0
    if low_confidence:
        logger.warning("Gyro sign on axis %d is zero; assuming +", anchor)
        anchor_sign = 1.0

    relative = np.where(outer[anchor] < 0, -1.0, 1.0)
    relative[anchor] = 1.0
    return omega_abs, anchor_sign * relative * omega_abs, bool(low_confidence)


def tensor_ls(y_s, geom):
    """
    Least-squares fit of [s W] to the accelerometer readings.

    Args:
        y_s (array-like): 3 N_s accelerometer readings, m/s^2.
        geom (ArrayGeometry): The array.

    Returns:
        TensorEstimate: Without sign resolution.

    Raises:
        TensorRankError: If R has rank < 4 (fewer than four triads, or a planar array).
    """
    y_s = np.asarray(y_s, dtype=float).reshape(-1)
    if y_s.size != geom.n_accel_channels:
        raise DimensionError(f"Expected {geom.n_accel_channels} accelerometer readings, got {y_s.size}")
    R = design_matrix(geom)
    rank = numerical_rank(R) if R.shape[1] else 0
    if rank < 4:
        raise TensorRankError(
            f"Tensor method needs [1; r_i] of rank 4 (positions spanning 3D), got rank {rank}",
            rank=rank,
        )

    Y = y_s.reshape(-1, 3).T
    X = linalg.cho_solve(linalg.cho_factor(R @ R.T), R @ Y.T).T
    W = X[:, 1:]
    omega_abs, _, _ = extract_angular_velocity(W)
    return TensorEstimate(
        s_hat=X[:, 0].copy(),
        W_hat=W.copy(),
        omega_dot_hat=extract_angular_acceleration(W),
        omega_abs=omega_abs,
        outer_product=outer_product_estimate(W),
    )


def tensor_method(measurement, geom):
    """Tensor estimate of a measurement, signs resolved from its gyro readings."""
    estimate = tensor_ls(measurement.accel, geom)
    signs = measurement.gyro_signs() if measurement.gyro.size else None
    _, signed, low_confidence = extract_angular_velocity(estimate.W_hat, signs)
    return replace(estimate, omega_signed=signed, low_confidence=low_confidence)
