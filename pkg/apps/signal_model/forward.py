"""
Forward Model

The array signal model y = h(w) + H phi + n and its derivatives.

Model Logic:
- h(w) stacks the centrifugal terms skew(w)^2 r_i for each accelerometer
  triad, then w once per gyro triad.
- Euler force and specific force enter linearly through H (see apps.geometry).
- Gyro readings beyond +/- gamma are clipped and flagged at simulation time.

Functions:
- h_s, h_full: Nonlinear part of the model.
- jacobian_A, jacobian_h: Derivatives with respect to w.
- predict: h(w) + H phi for a MotionState.
- draw_noise, simulate_measurement: Synthetic data.
"""

import logging

import numpy as np

from apps.core.exceptions import DimensionError
from apps.core.streams import as_generator
from apps.geometry.arrays import build_H, skew, skew_stack
from .measurements import Measurement

logger = logging.getLogger(__name__)


def h_s(omega, geom):
    """
    Centrifugal part of the accelerometer model, length 3 N_s.

    Block i is skew(w)^2 r_i = w (w . r_i) - |w|^2 r_i.
    """
    omega = np.asarray(omega, dtype=float)
    positions = geom.accel_positions
    projections = positions @ omega
    return (np.outer(projections, omega) - (omega @ omega) * positions).reshape(-1)


def h_full(omega, geom):
    """Nonlinear model for the whole array: [h_s(w); 1_{N_w} (x) w]."""
    omega = np.asarray(omega, dtype=float)
    return np.concatenate([h_s(omega, geom), np.tile(omega, geom.n_gyro_triads)])


def jacobian_A(u, v):
    """
    A(u, v) = skew(u)' skew(v) + skew(v x u).

    Equals the derivative of skew(w)^2 v with respect to w at w = u.
    """
    return skew(u).T @ skew(v) + skew(np.cross(v, u))


def jacobian_h(omega, geom):
    """
    Jacobian of h_full with respect to w, shape (3 (N_s + N_w), 3).

    Accelerometer blocks are A(w, r_i); gyro blocks are identities.
    """
    omega = np.asarray(omega, dtype=float)
    positions = geom.accel_positions
    blocks = skew(omega).T[None, :, :] @ skew_stack(positions) + skew_stack(np.cross(positions, omega))
    return np.vstack([blocks.reshape(-1, 3), np.tile(np.eye(3), (geom.n_gyro_triads, 1))])


def predict(state, geom, H=None):
    """Noiseless measurement h(w) + H phi for a motion state."""
    H = build_H(geom) if H is None else H
    return h_full(state.omega, geom) + H @ state.phi


def draw_noise(noise, rng, size=None):
    """
    Draw n ~ N(0, Q) as L z with L the Cholesky factor of Q.

    Args:
        noise (NoiseModel): Covariance model.
        rng (np.random.Generator): Source of standard normals.
        size (int or None): Number of vectors; None for a single vector.

    Returns:
        np.ndarray: (dim,) or (size, dim) samples.
    """
    if size is None:
        return noise.cholesky @ rng.standard_normal(noise.dimension)
    return rng.standard_normal((size, noise.dimension)) @ noise.cholesky.T


def clip_gyros(gyro, gamma):
    """Clip gyro readings to +/- gamma; returns (clipped, saturated_mask)."""
    saturated = np.abs(gyro) > gamma
    clipped = np.clip(gyro, -gamma, gamma)
    return clipped, saturated


def simulate_measurement(state, geom, noise, rng_seed):
    """
    Draw one noisy, clipped measurement of the array.

    Args:
        state (MotionState): True motion.
        geom (ArrayGeometry): Geometry the data is generated with.
        noise (NoiseModel): Error covariance matching geom.
        rng_seed (int, tuple or np.random.Generator): An int master seed, a
            (master_seed, run_index) pair, or a ready generator.

    Returns:
        Measurement: Readings with per-axis saturation flags.

    Raises:
        DimensionError: If the noise model does not match the geometry.
    """
    if noise.dimension != geom.n_channels:
        raise DimensionError(
            f"Noise dimension {noise.dimension} does not match {geom.n_channels} channels"
        )
    rng = as_generator(rng_seed)
    y = predict(state, geom) + draw_noise(noise, rng)

    n_accel = geom.n_accel_channels
    gyro, saturated = clip_gyros(y[n_accel:], geom.gyro_saturation)
    if saturated.any():
        logger.debug("%d of %d gyro channels saturated", saturated.sum(), saturated.size)
    return Measurement(y[:n_accel], gyro, saturated)
