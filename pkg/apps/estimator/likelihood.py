"""
Concentrated Likelihood

Everything needed to profile the linear parameters phi = [dw, s] out of the
Gaussian likelihood, for one pattern of active (unsaturated) channels.

Model Logic:
- phi_hat(w) = (H' Q^-1 H)^-1 H' Q^-1 (y - h(w))
- P = Q^-1 - Q^-1 H (H' Q^-1 H)^-1 H' Q^-1, so that
  L_c(w) = -1/2 ||y - h(w)||_P^2 + c.
- Saturated gyro rows are deleted from y, h, J, H and Q before any of this.

Classes:
- ActiveModel: Pruned matrices for one channel mask.
- ModelCache: Thread-safe ActiveModel cache keyed by the mask.

Functions:
- wls_phi, projection_P, concentrated_neg_loglik, neg_loglik
"""

import threading

import numpy as np
from scipy import linalg

from apps.core.exceptions import DimensionError, IdentifiabilityError
from apps.core.linalg import numerical_rank, spd_inverse, symmetrize
from apps.geometry.arrays import build_H
from apps.signal_model.forward import h_full, jacobian_h
from apps.signal_model.measurements import Measurement


class ActiveModel:
    """
    Measurement model restricted to the channels selected by a mask.

    Attributes:
        geom (ArrayGeometry): Full array geometry.
        mask (np.ndarray): Boolean mask over the 3 (N_s + N_w) channels.
        H (np.ndarray): Active rows of H.
        Q_inv (np.ndarray): Inverse of the active covariance block.
        P (np.ndarray): Projection-weighted matrix of the concentrated likelihood.
        noise_factor (np.ndarray): Lower Cholesky factor L of the active covariance.
        H_basis (np.ndarray): Orthonormal basis of the column space of L^-1 H.

    Raises:
        IdentifiabilityError: If H loses column rank on the active channels.
    """

    def __init__(self, geom, noise, mask=None):
        noise.check_dimensions(geom)
        mask = np.ones(geom.n_channels, dtype=bool) if mask is None else np.asarray(mask, dtype=bool)
        if mask.shape != (geom.n_channels,):
            raise DimensionError("Channel mask does not match the geometry")
        self.geom = geom
        self.mask = mask
        self.H = build_H(geom)[mask]

        rank = numerical_rank(self.H)
        if rank < 6:
            raise IdentifiabilityError(
                f"H has rank {rank} < 6 on the active channels; accelerometers must span a plane",
                rank=rank,
            )
        self.Q_inv = spd_inverse(noise.restrict(mask))
        QiH = self.Q_inv @ self.H
        self.normal_factor = linalg.cho_factor(self.H.T @ QiH, lower=True)
        self.P = symmetrize(self.Q_inv - QiH @ linalg.cho_solve(self.normal_factor, QiH.T))
        self.noise_factor = linalg.cholesky(noise.restrict(mask), lower=True)
        self.H_basis, _ = linalg.qr(self.whiten(self.H), mode='economic')

    @property
    def n_active(self):
        return int(self.mask.sum())

    def active(self, y):
        """Active part of a Measurement or a full-length vector."""
        vector = y.y if isinstance(y, Measurement) else np.asarray(y, dtype=float)
        if vector.shape == (self.n_active,):
            return vector
        if vector.shape != self.mask.shape:
            raise DimensionError("Measurement length does not match the geometry")
        return vector[self.mask]

    def h(self, omega):
        return h_full(omega, self.geom)[self.mask]

    def jacobian(self, omega):
        return jacobian_h(omega, self.geom)[self.mask]

    def residual(self, omega, y_active):
        return y_active - self.h(omega)

    def whiten(self, array):
        return linalg.solve_triangular(self.noise_factor, array, lower=True)

    def project(self, array):
        """
        L^-1 array with its component along the whitened H removed.

        For vectors u, v: project(u)' project(v) = u' P v.
        """
        whitened = self.whiten(array)
        return whitened - self.H_basis @ (self.H_basis.T @ whitened)

    def cost(self, omega, y_active):
        """1/2 ||y - h(w)||_P^2 on active channels, never negative."""
        projected = self.project(self.residual(omega, y_active))
        return 0.5 * float(projected @ projected)

    def wls(self, omega, y_active):
        """Weighted least squares phi_hat(w) = [dw_hat, s_hat]."""
        rhs = self.H.T @ (self.Q_inv @ self.residual(omega, y_active))
        return linalg.cho_solve(self.normal_factor, rhs)


class ModelCache:
    """
    Cache of ActiveModel objects for one (geometry, noise) pair.

    Saturation patterns repeat across Monte Carlo runs, so the pruned P is
    built once per pattern. Lookups are safe from several threads.
    """

    def __init__(self, geom, noise):
        self.geom = geom
        self.noise = noise
        self._models = {}
        self._lock = threading.Lock()

    def get(self, mask=None):
        mask = np.ones(self.geom.n_channels, dtype=bool) if mask is None else np.asarray(mask, dtype=bool)
        key = mask.tobytes()
        model = self._models.get(key)
        if model is None:
            with self._lock:
                model = self._models.get(key)
                if model is None:
                    model = ActiveModel(self.geom, self.noise, mask)
                    self._models[key] = model
        return model

    def __len__(self):
        return len(self._models)


def _mask_of(y, geom):
    if isinstance(y, Measurement):
        y.validate(geom)
        return y.active_mask
    return None


def wls_phi(omega, y, geom, noise):
    """
    Linear parameters maximising the likelihood for a fixed w.

    Returns:
        np.ndarray: 6-vector [dw_hat, s_hat].

    Raises:
        IdentifiabilityError: H rank deficient on the active channels.
    """
    model = ActiveModel(geom, noise, _mask_of(y, geom))
    return model.wls(np.asarray(omega, dtype=float), model.active(y))


def projection_P(geom, noise, mask=None):
    """
    P = Q^-1 - Q^-1 H (H' Q^-1 H)^-1 H' Q^-1 over the (optionally masked) channels.

    P is symmetric positive semidefinite with P H = 0.
    """
    return ActiveModel(geom, noise, mask).P


def concentrated_neg_loglik(omega, y, P, geom):
    """
    1/2 ||y - h(w)||_P^2, the concentrated negative log-likelihood without its constant.

    Args:
        omega (array-like): Angular velocity, rad/s.
        y (Measurement or np.ndarray): Readings; saturated rows are dropped
            when a Measurement is given.
        P (np.ndarray): Matrix from projection_P for the same active channels.
        geom (ArrayGeometry): The array.
    """
    mask = _mask_of(y, geom)
    vector = y.y if isinstance(y, Measurement) else np.asarray(y, dtype=float)
    prediction = h_full(np.asarray(omega, dtype=float), geom)
    if mask is not None:
        vector, prediction = vector[mask], prediction[mask]
    if P.shape != (vector.size, vector.size):
        raise DimensionError("P does not match the active measurement length")
    residual = vector - prediction
    return 0.5 * float(residual @ P @ residual)


def neg_loglik(omega, phi, y, geom, noise):
    """1/2 ||y - h(w) - H phi||_{Q^-1}^2 on active channels (unconcentrated form)."""
    model = ActiveModel(geom, noise, _mask_of(y, geom))
    residual = model.residual(np.asarray(omega, dtype=float), model.active(y)) - model.H @ np.asarray(phi)
    return 0.5 * float(residual @ model.Q_inv @ residual)
