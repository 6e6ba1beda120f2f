"""
Maximum-Likelihood Fusion

Gauss-Newton on the concentrated likelihood, with the gyro-saturation
handling that extends the measurement range beyond the gyro limit.

Model Logic:
- Saturated gyro rows are deleted from the model (ActiveModel).
- Every axis still covered by an unsaturated gyro: start from the gyro
  weighted average and run Gauss-Newton.
- Axes without unsaturated gyros: multi-start from the prior, the tensor
  estimate (3D arrays only) and a log-spaced speed grid over
  [gamma, span * gamma] with the clipped gyro signs. Among solutions whose
  signs agree with the gyros, converged ones win, then the lowest cost.

Functions:
- gyro_wls, init_omega: Gyro-only angular velocity.
- gauss_newton_solve: The iteration with step halving.
- estimate: Top-level driver.
"""

import logging
from dataclasses import dataclass, replace

import numpy as np
from scipy import linalg

from apps.core.exceptions import (
    IdentifiabilityError,
    InertialArrayError,
    SaturatedAxisError,
    SingularInformationError,
)
from apps.core.linalg import spd_inverse
from apps.core.units import to_external
from apps.geometry.arrays import AXES, check_identifiability, supports_tensor_method
from apps.signal_model.measurements import MotionState
from apps.tensor_baseline.tensor import tensor_method
from .likelihood import ActiveModel
from .options import SolverOptions

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class FusionResult:
    """
    Output of the fusion.

    Attributes:
        omega_hat (np.ndarray): Angular velocity, rad/s.
        omega_dot_hat (np.ndarray): Angular acceleration, rad/s^2.
        s_hat (np.ndarray): Specific force, m/s^2.
        iterations (int): Gauss-Newton iterations of the returned solution.
        converged (bool): Stopping rule met before max_iterations.
        final_neg_loglik (float): 1/2 ||y - h(w_hat)||_P^2.
        used_channels (np.ndarray): Boolean mask of the channels in the model.
        cost_history (tuple): Cost after every accepted iteration, start included.
        n_starts (int): Number of Gauss-Newton starts tried.
    """
    omega_hat: np.ndarray
    omega_dot_hat: np.ndarray
    s_hat: np.ndarray
    iterations: int
    converged: bool
    final_neg_loglik: float
    used_channels: np.ndarray
    cost_history: tuple = ()
    n_starts: int = 1

    @property
    def state(self):
        return MotionState(self.omega_hat, self.omega_dot_hat, self.s_hat)

    def as_dict(self, units):
        return {
            'units': units,
            'omega': to_external(self.omega_hat, units),
            'omega_dot': to_external(self.omega_dot_hat, units),
            'specific_force': self.s_hat,
            'iterations': self.iterations,
            'converged': self.converged,
            'neg_loglik': self.final_neg_loglik,
            'used_channels': np.flatnonzero(self.used_channels),
            'n_channels': int(self.used_channels.size),
            'n_starts': self.n_starts,
        }


# =============================================================================
# GYRO INITIALIZATION
# =============================================================================

def gyro_wls(y, geom, noise, axes=(0, 1, 2)):
    """
    Weighted least squares of the selected w components from the unsaturated gyros.

    Other components are treated as absent, so only gyro rows of the selected
    axes take part. For iid noise this is the per-axis mean.

    Raises:
        SaturatedAxisError: If a selected axis has no unsaturated gyro channel.
    """
    axes = tuple(axes)
    n_accel = geom.n_accel_channels
    axis_of_row = np.tile(np.arange(3), geom.n_gyro_triads)
    rows = ~y.saturated & np.isin(axis_of_row, axes)

    covered = set(axis_of_row[rows].tolist())
    missing = tuple(axis for axis in axes if axis not in covered)
    if missing:
        raise SaturatedAxisError(
            f"No unsaturated gyro channel on axis {', '.join(AXES[a] for a in missing)}",
            axes=missing,
        )

    gyro_index = n_accel + np.flatnonzero(rows)
    D = np.zeros((gyro_index.size, len(axes)))
    D[np.arange(gyro_index.size), [axes.index(a) for a in axis_of_row[rows]]] = 1.0
    weights = spd_inverse(noise.Q[np.ix_(gyro_index, gyro_index)])
    DtW = D.T @ weights
    return linalg.cho_solve(linalg.cho_factor(DtW @ D), DtW @ y.gyro[rows])


def init_omega(y, geom, noise):
    """
    Starting point from the unsaturated gyro channels.

    Raises:
        SaturatedAxisError: Axes with zero unsaturated channels (all axes when N_w = 0).
    """
    noise.check_dimensions(geom)
    return gyro_wls(y, geom, noise)


# =============================================================================
# GAUSS-NEWTON
# =============================================================================

# Cost evaluations differ by a few ulps of the cost; decreases below this are noise.
ROUNDOFF_FACTOR = 1e3


def _decrease_floor(cost, opts):
    """Predicted decreases up to this are round-off; above it a failed line search is a stall."""
    return max(opts.cost_tolerance * cost, ROUNDOFF_FACTOR * np.finfo(float).eps * max(cost, 1.0))


def _ranking(result):
    return (not result.converged, result.final_neg_loglik)


def gauss_newton_solve(y, geom, noise, init, opts=None, model=None):
    """
    Minimise the concentrated negative log-likelihood from init.

    A step is accepted only if the cost does not increase, halving it up to
    opts.line_search_halvings times. When no halving decreases the cost and
    the predicted decrease is at round-off level, the point is a minimum.
    Non-convergence (a real stall or the iteration cap) is reported through
    FusionResult.converged, not raised.

    Args:
        y (Measurement): Readings; saturated rows are excluded.
        geom (ArrayGeometry): The array.
        noise (NoiseModel): Covariance over all channels.
        init (array-like): Starting w, rad/s.
        opts (SolverOptions or None): Defaults from settings.
        model (ActiveModel or None): Prebuilt model for y's channel mask.

    Raises:
        SingularInformationError: If J' P J is not positive definite.
    """
    opts = opts or SolverOptions.from_settings()
    model = model or ActiveModel(geom, noise, y.active_mask)
    y_active = model.active(y)

    omega = np.array(init, dtype=float)
    cost = model.cost(omega, y_active)
    history = [cost]
    converged = False
    iterations = 0

    while iterations < opts.max_iterations:
        iterations += 1
        J = model.project(model.jacobian(omega))
        gradient = J.T @ model.project(model.residual(omega, y_active))
        try:
            factor = linalg.cho_factor(J.T @ J, lower=True)
        except linalg.LinAlgError as exc:
            raise SingularInformationError(
                f"J'PJ is not positive definite at w={omega.tolist()}"
            ) from exc
        step = linalg.cho_solve(factor, gradient)

        if np.linalg.norm(step) <= opts.step_tolerance:
            candidate_cost = model.cost(omega + step, y_active)
            if candidate_cost <= cost:
                omega, cost = omega + step, candidate_cost
                history.append(cost)
            converged = True
            break

        scale = 1.0
        for halving in range(opts.line_search_halvings + 1):
            candidate = omega + scale * step
            candidate_cost = model.cost(candidate, y_active)
            if candidate_cost <= cost:
                break
            scale *= 0.5
        else:
            # Predicted decrease of the full step under the linearised model.
            predicted = 0.5 * float(step @ gradient)
            converged = predicted <= _decrease_floor(cost, opts)
            if converged:
                logger.debug("Iteration %d: predicted decrease %.3e below round-off", iterations, predicted)
            else:
                logger.debug("Iteration %d: no descent after %d halvings", iterations, opts.line_search_halvings)
            break
        if halving:
            logger.debug("Iteration %d: step halved %d times", iterations, halving)

        decrease = cost - candidate_cost
        previous = cost
        omega, cost = candidate, candidate_cost
        history.append(cost)
        logger.debug("Iteration %d: cost %.6e, step %.3e", iterations, cost, scale * np.linalg.norm(step))

        if scale * np.linalg.norm(step) <= opts.step_tolerance or decrease <= opts.cost_tolerance * previous:
            converged = True
            break

    if not converged:
        logger.warning("Gauss-Newton stopped after %d iterations without converging", iterations)

    phi = model.wls(omega, y_active)
    return FusionResult(
        omega_hat=omega,
        omega_dot_hat=phi[:3],
        s_hat=phi[3:],
        iterations=iterations,
        converged=converged,
        final_neg_loglik=cost,
        used_channels=model.mask.copy(),
        cost_history=tuple(history),
    )


# =============================================================================
# DRIVER
# =============================================================================

def _saturated_seeds(y, geom, noise, axes, opts, prior_omega):
    """Starting points for the axes without unsaturated gyros."""
    signs = y.gyro_signs()
    base = np.zeros(3)
    free = tuple(axis for axis in range(3) if axis not in axes)
    if free:
        base[list(free)] = gyro_wls(y, geom, noise, free)
    axes = list(axes)

    seeds = []
    if prior_omega is not None:
        seed = base.copy()
        seed[axes] = np.asarray(prior_omega, dtype=float)[axes]
        seeds.append(seed)
    if supports_tensor_method(geom):
        tensor = tensor_method(y, geom)
        seed = base.copy()
        seed[axes] = tensor.omega_signed[axes]
        seeds.append(seed)

    direction = np.where(signs[axes] < 0, -1.0, 1.0)
    for speed in np.geomspace(geom.gyro_saturation, opts.saturated_grid_span * geom.gyro_saturation,
                              opts.saturated_grid_size):
        seed = base.copy()
        seed[axes] = direction * speed
        seeds.append(seed)
    return seeds, signs


def _signs_agree(omega, signs, axes):
    return all(signs[a] == 0 or np.sign(omega[a]) == signs[a] for a in axes)


def _solve_saturated(y, geom, noise, opts, prior_omega, model, axes):
    logger.info("Gyros saturated on axis %s; multi-start initialization",
                ', '.join(AXES[a] for a in axes))
    seeds, signs = _saturated_seeds(y, geom, noise, axes, opts, prior_omega)

    results = []
    for seed in seeds:
        try:
            results.append(gauss_newton_solve(y, geom, noise, seed, opts, model))
        except SingularInformationError:
            logger.debug("Start %s hit a singular J'PJ", seed.tolist())

    if not results:
        logger.warning("Every saturated start failed; returning the first seed unconverged")
        y_active = model.active(y)
        phi = model.wls(seeds[0], y_active)
        return FusionResult(
            omega_hat=seeds[0], omega_dot_hat=phi[:3], s_hat=phi[3:], iterations=0,
            converged=False, final_neg_loglik=model.cost(seeds[0], y_active),
            used_channels=model.mask.copy(), n_starts=len(seeds),
        )

    agreeing = [result for result in results if _signs_agree(result.omega_hat, signs, axes)]
    if agreeing:
        best = min(agreeing, key=_ranking)
        return replace(best, n_starts=len(seeds))

    logger.warning("No saturated start matched the gyro signs; result marked unconverged")
    best = min(results, key=_ranking)
    return replace(best, converged=False, n_starts=len(seeds))


def estimate(y, geom, noise, opts=None, prior_omega=None, cache=None):
    """
    Fuse one measurement into (w, dw, s).

    Args:
        y (Measurement): Readings with saturation flags.
        geom (ArrayGeometry): The array.
        noise (NoiseModel): Covariance over all channels.
        opts (SolverOptions or None): Defaults from settings.
        prior_omega (array-like or None): Extra start for saturated axes, rad/s.
        cache (ModelCache or None): Reuses pruned models across calls.

    Returns:
        FusionResult

    Raises:
        IdentifiabilityError: If the geometry, or its unsaturated part, is not identifiable.
        DimensionError: On size mismatches.
    """
    opts = opts or SolverOptions.from_settings()
    y.validate(geom)
    noise.check_dimensions(geom)
    verdict = check_identifiability(geom)
    if not verdict.identifiable:
        raise IdentifiabilityError(f"Geometry not identifiable: {verdict.reason.label}", verdict=verdict)

    model = cache.get(y.active_mask) if cache is not None else ActiveModel(geom, noise, y.active_mask)
    try:
        init = init_omega(y, geom, noise)
    except SaturatedAxisError as exc:
        return _solve_saturated(y, geom, noise, opts, prior_omega, model, exc.axes)
    return gauss_newton_solve(y, geom, noise, init, opts, model)


def estimate_or_none(y, geom, noise, opts=None, cache=None):
    """estimate, returning None instead of raising on solver failures."""
    try:
        return estimate(y, geom, noise, opts, cache=cache)
    except InertialArrayError as exc:
        logger.debug("Estimation failed: %s", exc)
        return None
