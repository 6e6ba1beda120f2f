"""
Cramer-Rao Bounds

Fisher information of theta = [w, dw, s] for the Gaussian array model and
its inverse.

Model Logic:
- I(theta) = Phi' Q^-1 Phi with Phi = [J_h(w) H]; independent of dw and s.
- Gyro-saturated regime: gyro rows of Phi and Q are deleted, which is the
  sigma_w -> inf limit of the full regime.
- A singular FIM is reported through UnboundedCrbError with the limiting
  variance of every parameter (inf where no information exists).

Classes:
- CrbRegime: full / gyro_saturated.
- FisherInfo: 9x9 matrix with block views.
- CrbReport: Per-parameter CRB blocks.

Functions:
- fisher_info, crb_full, omega_information, sqrt_crb_omega, sqrt_crb_speed
- speed_grid, crb_sweep, write_crb_sweep
"""

import logging
from dataclasses import dataclass

import numpy as np
from django.db import models
from scipy import linalg

from apps.core.exceptions import UnboundedCrbError
from apps.core.files import write_csv_rows
from apps.core.linalg import rank_tolerance, symmetrize
from apps.geometry.arrays import AXES, build_H
from apps.signal_model.forward import jacobian_h

logger = logging.getLogger(__name__)

OMEGA = slice(0, 3)
OMEGA_DOT = slice(3, 6)
SPECIFIC_FORCE = slice(6, 9)

CRB_SWEEP_HEADER = ['speed_dps', 'axis', 'sqrt_crb_full', 'sqrt_crb_saturated']


class CrbRegime(models.TextChoices):
    FULL = 'full', 'All gyro channels'
    GYRO_SATURATED = 'gyro_saturated', 'Gyros carry sign only'


@dataclass(frozen=True, eq=False)
class FisherInfo:
    """
    Fisher information over theta = [w, dw, s].

    Attributes:
        matrix (np.ndarray): Symmetric 9x9 matrix.
        regime (CrbRegime): Channels the information was built from.
    """
    matrix: np.ndarray
    regime: str = CrbRegime.FULL

    @property
    def I_11(self):
        return self.matrix[OMEGA, OMEGA]

    @property
    def I_12(self):
        return self.matrix[OMEGA, OMEGA_DOT]

    @property
    def I_22(self):
        return self.matrix[OMEGA_DOT, OMEGA_DOT]

    @property
    def I_13(self):
        return self.matrix[OMEGA, SPECIFIC_FORCE]

    @property
    def I_23(self):
        return self.matrix[OMEGA_DOT, SPECIFIC_FORCE]

    @property
    def I_s(self):
        return self.matrix[SPECIFIC_FORCE, SPECIFIC_FORCE]


@dataclass(frozen=True, eq=False)
class CrbReport:
    """
    Cramer-Rao bound blocks at one angular velocity.

    Attributes:
        crb_omega (np.ndarray): 3x3 bound on Cov(w_hat), (rad/s)^2.
        crb_omega_dot (np.ndarray): 3x3 bound on Cov(dw_hat), (rad/s^2)^2.
        crb_s (np.ndarray): 3x3 bound on Cov(s_hat), (m/s^2)^2.
        regime (CrbRegime): full or gyro_saturated.
        covariance (np.ndarray): The whole 9x9 inverse.
    """
    crb_omega: np.ndarray
    crb_omega_dot: np.ndarray
    crb_s: np.ndarray
    regime: str
    covariance: np.ndarray

    @property
    def sqrt_omega(self):
        """Per-axis sqrt CRB of w, rad/s."""
        return np.sqrt(np.diag(self.crb_omega))


def fisher_info(omega, geom, noise, regime=CrbRegime.FULL):
    """
    I(theta) = Phi' Q^-1 Phi.

    Args:
        omega (array-like): Angular velocity, rad/s.
        geom (ArrayGeometry): The array.
        noise (NoiseModel): Covariance over all channels.
        regime (CrbRegime): GYRO_SATURATED drops every gyro channel.
    """
    noise.check_dimensions(geom)
    Phi = np.hstack([jacobian_h(np.asarray(omega, dtype=float), geom), build_H(geom)])
    Q_inv = noise.inverse
    if regime == CrbRegime.GYRO_SATURATED:
        n_accel = geom.n_accel_channels
        Phi = Phi[:n_accel]
        Q_inv = noise.drop_gyros(geom).inverse
    return FisherInfo(symmetrize(Phi.T @ Q_inv @ Phi), CrbRegime(regime))


def _limit_variances(matrix, directions=None):
    """
    Variance limits of linear functionals e' theta under a possibly singular information matrix.

    A functional with a component in the null space is unbounded; the others
    take e' I^+ e. directions holds one e per row (identity by default).
    """
    directions = np.eye(matrix.shape[0]) if directions is None else np.atleast_2d(directions)
    eigenvalues, vectors = linalg.eigh(matrix)
    scale = max(eigenvalues.max(), 0.0)
    null = eigenvalues <= rank_tolerance() * scale if scale > 0 else np.ones(eigenvalues.size, dtype=bool)
    variances = np.full(directions.shape[0], np.inf)
    if null.all():
        return variances
    kept = ~null
    projected = directions @ vectors[:, kept]
    norms = np.linalg.norm(directions, axis=1)
    in_null = np.linalg.norm(directions @ vectors[:, null], axis=1) > np.sqrt(rank_tolerance()) * norms
    bounded = np.sum(projected ** 2 / eigenvalues[kept], axis=1)
    variances[~in_null] = bounded[~in_null]
    return variances


def crb_full(omega, geom, noise, regime=CrbRegime.FULL):
    """
    Invert the 9x9 Fisher information.

    Raises:
        UnboundedCrbError: If the FIM is singular (e.g. the saturated regime at w = 0).
            The exception carries the limiting per-parameter variances.
    """
    fim = fisher_info(omega, geom, noise, regime)
    eigenvalues = linalg.eigvalsh(fim.matrix)
    if eigenvalues.max() <= 0 or eigenvalues.min() <= rank_tolerance() * eigenvalues.max():
        variances = _limit_variances(fim.matrix)
        unbounded = [i for i in range(9) if np.isinf(variances[i])]
        raise UnboundedCrbError(
            f"Fisher information is singular in the {regime} regime; "
            f"{len(unbounded)} parameter(s) unbounded",
            variances=variances,
        )
    covariance = symmetrize(linalg.cho_solve(linalg.cho_factor(fim.matrix), np.eye(9)))
    return CrbReport(
        crb_omega=covariance[OMEGA, OMEGA],
        crb_omega_dot=covariance[OMEGA_DOT, OMEGA_DOT],
        crb_s=covariance[SPECIFIC_FORCE, SPECIFIC_FORCE],
        regime=CrbRegime(regime),
        covariance=covariance,
    )


def omega_information(fim):
    """
    Information on w after eliminating [dw, s]: I_ww - I_wphi I_phiphi^-1 I_phiw.
    """
    matrix = fim.matrix if isinstance(fim, FisherInfo) else np.asarray(fim)
    coupling = matrix[OMEGA, 3:]
    nuisance = linalg.cho_factor(matrix[3:, 3:])
    return symmetrize(matrix[OMEGA, OMEGA] - coupling @ linalg.cho_solve(nuisance, coupling.T))


def sqrt_crb_omega(omega, geom, noise, regime=CrbRegime.FULL):
    """Per-axis sqrt CRB of w in rad/s, inf on unbounded axes."""
    try:
        return crb_full(omega, geom, noise, regime).sqrt_omega
    except UnboundedCrbError as exc:
        return np.sqrt(exc.variances[OMEGA])


def sqrt_crb_speed(omega, geom, noise, regime=CrbRegime.FULL):
    """
    sqrt CRB of the angular speed |w| (rad/s), by the gradient w / |w|.

    Returns nan at w = 0, where the speed is not differentiable.
    """
    omega = np.asarray(omega, dtype=float)
    speed = np.linalg.norm(omega)
    if speed == 0:
        return np.nan
    gradient = np.zeros(9)
    gradient[OMEGA] = omega / speed
    fim = fisher_info(omega, geom, noise, regime)
    return float(np.sqrt(_limit_variances(fim.matrix, gradient)[0]))


def speed_grid(min_speed, max_speed, per_decade=20):
    """
    Log-spaced speeds from min_speed to max_speed, both included.

    Units pass through unchanged.
    """
    if not 0 < min_speed <= max_speed or per_decade < 1:
        raise ValueError("Need 0 < min_speed <= max_speed and per_decade >= 1")
    count = int(round(per_decade * np.log10(max_speed / min_speed))) + 1
    return np.geomspace(min_speed, max_speed, count)


def crb_sweep(geom, noise, direction, speeds):
    """
    sqrt CRB of w along a fixed rotation axis for a list of speeds.

    Args:
        geom (ArrayGeometry): The array.
        noise (NoiseModel): Covariance over all channels.
        direction (array-like): Rotation axis (normalised here).
        speeds (array-like): Angular speeds, rad/s.

    Returns:
        list[tuple]: (speed, axis, sqrt_crb_full, sqrt_crb_saturated) in rad/s,
        one row per speed and axis.
    """
    direction = np.asarray(direction, dtype=float)
    norm = np.linalg.norm(direction)
    if direction.shape != (3,) or norm == 0:
        raise ValueError("direction must be a non-zero 3-vector")
    direction = direction / norm

    rows = []
    for speed in np.asarray(speeds, dtype=float):
        omega = speed * direction
        full = sqrt_crb_omega(omega, geom, noise, CrbRegime.FULL)
        saturated = sqrt_crb_omega(omega, geom, noise, CrbRegime.GYRO_SATURATED)
        for axis_index, axis in enumerate(AXES):
            rows.append((float(speed), axis, float(full[axis_index]), float(saturated[axis_index])))
    logger.debug("CRB sweep over %d speeds", len(rows) // 3)
    return rows


def write_crb_sweep(path, rows):
    """Write crb_sweep rows as CSV with speeds and bounds in deg/s."""
    converted = [
        (float(np.rad2deg(speed)), axis, float(np.rad2deg(full)), float(np.rad2deg(saturated)))
        for speed, axis, full, saturated in rows
    ]
    return write_csv_rows(path, CRB_SWEEP_HEADER, converted)
