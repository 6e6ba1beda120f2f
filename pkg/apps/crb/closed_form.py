"""
Closed-Form Bounds for Square Arrays

Valid for accelerometer triads on a centred planar square grid (spacing
alpha, N_s in {4, 9, 16, ...}) with iid errors Q = sigma_s2 I (+) sigma_w2 I.
The general routes in apps.crb.bounds serve as the oracle for these.

Functions:
- rotational_information_matrix: The 3x3 matrix multiplying the accelerometer term.
- crb_omega_square_closed_form: Information on w.
- crb_omega_saturated_closed_form: Bound on w when every gyro saturates.
- crb_omega_dot: Bound on dw through the Gamma blocks (any centred array).
- crb_omega_dot_linear_motion: Bound on dw at w = 0 for square grids.
"""

import numpy as np
from scipy import linalg

from apps.core.exceptions import ClosedFormPreconditionError, CrbError
from apps.geometry.arrays import build_G, planar_square_array
from apps.signal_model.forward import jacobian_h
from apps.signal_model.measurements import NoiseModel


def _grid_factor(alpha, n_s):
    """alpha^2 (N_s^2 - N_s), after checking the square-grid preconditions."""
    side = int(round(np.sqrt(n_s)))
    if n_s < 4 or side * side != n_s:
        raise ClosedFormPreconditionError(f"N_s={n_s} is not a square number >= 4")
    if not alpha > 0:
        raise ClosedFormPreconditionError("alpha must be positive")
    return alpha ** 2 * (n_s ** 2 - n_s)


def rotational_information_matrix(omega):
    """
    M(w) such that the accelerometers add alpha^2 (N_s^2 - N_s) / (6 sigma_s2) M(w).
    """
    x, y, z = np.asarray(omega, dtype=float)
    return np.array([
        [2 * x * x + y * y, x * y, 2 * x * z],
        [x * y, 2 * y * y + x * x, 2 * y * z],
        [2 * x * z, 2 * y * z, 4 * z * z],
    ])


def crb_omega_square_closed_form(omega, alpha, n_s, n_omega, sigma_s2, sigma_omega2):
    """
    Fisher information on w for a square grid.

    I_w = (N_w / sigma_w2) I + alpha^2 (N_s^2 - N_s) / (6 sigma_s2) M(w)

    Raises:
        ClosedFormPreconditionError: N_s not a square number >= 4, or alpha <= 0.
    """
    factor = _grid_factor(alpha, n_s)
    return n_omega / sigma_omega2 * np.eye(3) + factor / (6.0 * sigma_s2) * rotational_information_matrix(omega)


def crb_omega_saturated_closed_form(omega, alpha, n_s, sigma_s2, gamma=None):
    """
    Bound on w from the accelerometers alone (sigma_w -> inf).

    Diagonal: 6 sigma_s2 / (alpha^2 (N_s^2 - N_s)) [1/(w_x^2 + w_y^2), 1/(w_x^2 + w_y^2), 1/(2 w_z^2)].
    Off-diagonal entries come from inverting M(w) numerically.

    Args:
        gamma (float or None): Gyro range in rad/s; when given, every |w_i| must exceed it.

    Raises:
        ClosedFormPreconditionError: w_x = w_y = 0, w_z = 0, or an axis within the gyro range.
    """
    omega = np.asarray(omega, dtype=float)
    factor = _grid_factor(alpha, n_s)
    if gamma is not None and not np.all(np.abs(omega) > gamma):
        raise ClosedFormPreconditionError("Every |w_i| must exceed the gyro range")
    if omega[0] ** 2 + omega[1] ** 2 == 0 or omega[2] == 0:
        raise ClosedFormPreconditionError("Needs w_x^2 + w_y^2 > 0 and w_z != 0")
    return 6.0 * sigma_s2 / factor * linalg.inv(rotational_information_matrix(omega))


def crb_omega_dot_linear_motion(alpha, n_s, sigma_s2):
    """sigma_s2 Gamma_22^-1 = 12 sigma_s2 / (alpha^2 (N_s^2 - N_s)) diag(1, 1, 1/2)."""
    factor = _grid_factor(alpha, n_s)
    return 12.0 * sigma_s2 / factor * np.diag([1.0, 1.0, 0.5])


def gamma_blocks(omega, geom):
    """
    Gamma_11 = J_hs' J_hs, Gamma_12 = J_hs' G, Gamma_22 = G' G.
    """
    J_hs = jacobian_h(omega, geom)[:geom.n_accel_channels]
    G = build_G(geom)
    return J_hs.T @ J_hs, J_hs.T @ G, G.T @ G


def crb_omega_dot(omega, geom=None, noise=None, *, alpha=None, n_s=None, n_omega=None,
                  sigma_s2=None, sigma_omega2=None):
    """
    Bound on dw via the Gamma blocks.

    I_dw = Gamma_22 / sigma_s2 - Gamma_12' (N_w/sigma_w2 I + Gamma_11/sigma_s2)^-1 Gamma_12 / sigma_s2^2

    Pass either (geom, noise) with a centred array and iid noise, or the square
    grid parameters (alpha, n_s, n_omega, sigma_s2, sigma_omega2).

    Returns:
        np.ndarray: I_dw^-1, (rad/s^2)^2.

    Raises:
        ClosedFormPreconditionError: Array not centred, or noise not iid.
        CrbError: If I_dw is singular.
    """
    if geom is None:
        if None in (alpha, n_s, n_omega, sigma_s2, sigma_omega2):
            raise ClosedFormPreconditionError("Give a geometry and noise or all square-grid parameters")
        _grid_factor(alpha, n_s)
        geom = planar_square_array(alpha, int(round(np.sqrt(n_s))), n_omega)
        noise = NoiseModel.iid_blocks(sigma_s2, sigma_omega2, geom)
    if noise is None or not noise.is_iid:
        raise ClosedFormPreconditionError("Needs iid accelerometer and gyro noise")
    if geom.n_accel_triads == 0 or np.abs(geom.accel_positions.sum(axis=0)).max() > \
            1e-9 * max(np.abs(geom.accel_positions).max(), 1e-300):
        raise ClosedFormPreconditionError("Accelerometer positions must sum to zero")

    s2, w2 = noise.sigma_s2, noise.sigma_omega2
    gamma_11, gamma_12, gamma_22 = gamma_blocks(np.asarray(omega, dtype=float), geom)
    try:
        middle = linalg.solve(geom.n_gyro_triads / w2 * np.eye(3) + gamma_11 / s2, gamma_12, assume_a='pos')
        information = gamma_22 / s2 - gamma_12.T @ middle / s2 ** 2
        return linalg.inv(0.5 * (information + information.T))
    except linalg.LinAlgError as exc:
        raise CrbError("Angular acceleration information is singular") from exc
