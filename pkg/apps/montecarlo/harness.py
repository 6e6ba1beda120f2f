"""
Monte Carlo Harness

Repeated simulation and estimation over a sweep of angular speeds, with the
RMSE of every method reported next to the Cramer-Rao bounds.

Study Logic:
- Grid point k, run r has the global run index k * n_runs + r. Noise and
  placement errors are drawn from separate Philox streams keyed by
  (master_seed, run_index), so results do not depend on thread scheduling.
- Placement errors (position_perturbation_std > 0) are redrawn per run and
  only affect the data; estimators always use the nominal geometry.
- A run where a method raises, or where the ML solver does not converge, is
  a failure: excluded from the RMSE and counted in the failures column.
- Besides x, y and z the report has a 'speed' pseudo-axis: the RMSE of
  |w_hat| against |w|.

Classes:
- McMethod: ml / tensor / gyro_average.
- McScenario: What to simulate.
- McRow, McReport: Results, SI units.

Functions:
- gyro_average_baseline: Gyro-only estimate.
- run_scenario: The study.
- write_report: Report CSV in deg/s.
"""

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from django.db import models

from apps.core.exceptions import IdentifiabilityError, InertialArrayError, TensorRankError
from apps.core.files import write_csv_rows
from apps.core.streams import NOISE_STREAM, PLACEMENT_STREAM, make_generator
from apps.crb.bounds import CrbRegime, sqrt_crb_omega, sqrt_crb_speed
from apps.estimator.fusion import estimate_or_none, init_omega
from apps.estimator.likelihood import ModelCache
from apps.estimator.options import SolverOptions
from apps.geometry.arrays import AXES, check_identifiability, supports_tensor_method
from apps.signal_model.forward import simulate_measurement
from apps.signal_model.measurements import MotionState
from apps.tensor_baseline.tensor import tensor_method

logger = logging.getLogger(__name__)

SPEED_AXIS = 'speed'
REPORT_AXES = AXES + (SPEED_AXIS,)
MC_REPORT_HEADER = [
    'speed_dps', 'method', 'axis', 'rmse_dps', 'sqrt_crb_dps', 'sqrt_crb_sat_dps', 'n_runs', 'failures',
]


class McMethod(models.TextChoices):
    ML = 'ml', 'Maximum likelihood'
    TENSOR = 'tensor', 'Angular acceleration tensor'
    GYRO_AVERAGE = 'gyro_average', 'Average gyroscopes'


@dataclass(frozen=True, eq=False)
class McScenario:
    """
    A Monte Carlo study.

    Attributes:
        geom (ArrayGeometry): Nominal array, also used by the estimators.
        noise (NoiseModel): Measurement covariance.
        direction (np.ndarray): Rotation axis, normalised on construction.
        speeds (np.ndarray): Angular speeds of the grid, rad/s.
        n_runs (int): Realizations per grid point.
        master_seed (int): Seed of every random stream.
        methods (tuple[McMethod]): Methods to evaluate.
        position_perturbation_std (float): Std of the per-run placement error, meters.
        omega_dot (np.ndarray): True angular acceleration, rad/s^2.
        specific_force (np.ndarray): True specific force, m/s^2.
        threads (int): Worker threads.
        name (str): Label for logs and the archive.
        opts (SolverOptions or None): ML solver options; settings when None.
        payload (dict): The scenario file content, kept for archiving.
    """
    geom: object
    noise: object
    direction: np.ndarray
    speeds: np.ndarray
    n_runs: int
    master_seed: int = 0
    methods: tuple = (McMethod.ML,)
    position_perturbation_std: float = 0.0
    omega_dot: np.ndarray = (0.0, 0.0, 0.0)
    specific_force: np.ndarray = (0.0, 0.0, 0.0)
    threads: int = 1
    name: str = ''
    opts: SolverOptions = None
    payload: dict = field(default_factory=dict)

    def __post_init__(self):
        direction = np.asarray(self.direction, dtype=float).reshape(-1)
        norm = np.linalg.norm(direction)
        if direction.shape != (3,) or not norm > 0:
            raise ValueError("direction must be a non-zero 3-vector")
        speeds = np.atleast_1d(np.asarray(self.speeds, dtype=float))
        if speeds.ndim != 1 or speeds.size == 0 or not np.all(np.isfinite(speeds)) or np.any(speeds < 0):
            raise ValueError("speeds must be a non-empty list of finite, non-negative values")
        if int(self.n_runs) != self.n_runs or self.n_runs < 1:
            raise ValueError("n_runs must be a positive integer")
        if self.master_seed < 0:
            raise ValueError("master_seed must be non-negative")
        if not self.methods:
            raise ValueError("At least one method is required")
        if self.position_perturbation_std < 0:
            raise ValueError("position_perturbation_std must be non-negative")
        if self.threads < 1:
            raise ValueError("threads must be at least 1")
        object.__setattr__(self, 'direction', direction / norm)
        object.__setattr__(self, 'speeds', speeds)
        object.__setattr__(self, 'n_runs', int(self.n_runs))
        object.__setattr__(self, 'methods', tuple(McMethod(method) for method in dict.fromkeys(self.methods)))
        object.__setattr__(self, 'omega_dot', np.asarray(self.omega_dot, dtype=float))
        object.__setattr__(self, 'specific_force', np.asarray(self.specific_force, dtype=float))

    @classmethod
    def from_state(cls, state, geom, noise, **kwargs):
        """Single grid point at a given MotionState."""
        speed = float(np.linalg.norm(state.omega))
        direction = state.omega / speed if speed > 0 else np.array([1.0, 0.0, 0.0])
        return cls(geom, noise, direction, [speed], omega_dot=state.omega_dot,
                   specific_force=state.specific_force, **kwargs)

    @property
    def n_grid(self):
        return self.speeds.size

    def grid_states(self):
        return [MotionState(speed * self.direction, self.omega_dot, self.specific_force) for speed in self.speeds]


@dataclass(frozen=True)
class McRow:
    """One (speed, method, axis) line of a report; angular values in rad/s."""
    speed: float
    method: str
    axis: str
    rmse: float
    sqrt_crb: float
    sqrt_crb_sat: float
    n_runs: int
    failures: int

    def as_csv_row(self):
        return (
            float(np.rad2deg(self.speed)), str(self.method), self.axis, float(np.rad2deg(self.rmse)),
            float(np.rad2deg(self.sqrt_crb)), float(np.rad2deg(self.sqrt_crb_sat)),
            self.n_runs, self.failures,
        )


@dataclass(frozen=True, eq=False)
class McReport:
    """
    Output of run_scenario.

    Attributes:
        rows (tuple[McRow]): Ordered by speed, then method, then axis.
        master_seed (int), n_runs (int), threads (int): Run metadata.
        wall_time_s (float): Elapsed time of the study.
        n_measurements (int): Simulated measurements (n_runs x grid size).
        name (str): Scenario label.
        scenario_payload (dict): Scenario file content.
    """
    rows: tuple
    master_seed: int
    n_runs: int
    wall_time_s: float
    threads: int = 1
    n_measurements: int = 0
    name: str = ''
    scenario_payload: dict = field(default_factory=dict)

    def select(self, method, axis):
        return [row for row in self.rows if row.method == method and row.axis == axis]

    def rmse(self, method, axis):
        """RMSE over the speed grid, rad/s."""
        return np.array([row.rmse for row in self.select(method, axis)])

    def sqrt_crb(self, axis, regime=CrbRegime.FULL):
        method = self.rows[0].method
        attribute = 'sqrt_crb_sat' if regime == CrbRegime.GYRO_SATURATED else 'sqrt_crb'
        return np.array([getattr(row, attribute) for row in self.select(method, axis)])

    def failures(self, method):
        """Failed runs of a method summed over the grid."""
        return sum(row.failures for row in self.select(method, AXES[0]))

    def csv_rows(self):
        return [row.as_csv_row() for row in self.rows]


def gyro_average_baseline(y, geom, noise):
    """
    Weighted average of the unsaturated gyro channels (the mean for iid noise).

    Raises:
        SaturatedAxisError: If an axis has no unsaturated gyro channel.
    """
    return init_omega(y, geom, noise)


def _check_methods(sc):
    sc.noise.check_dimensions(sc.geom)
    if McMethod.ML in sc.methods:
        verdict = check_identifiability(sc.geom)
        if not verdict.identifiable:
            raise IdentifiabilityError(f"ML needs an identifiable array: {verdict.reason.label}", verdict=verdict)
    if McMethod.TENSOR in sc.methods and not supports_tensor_method(sc.geom):
        raise TensorRankError("The tensor method needs >= 4 accelerometer triads spanning 3D")
    if McMethod.GYRO_AVERAGE in sc.methods and sc.geom.n_gyro_triads < 1:
        raise IdentifiabilityError("Averaging gyroscopes needs at least one gyro triad")


def _simulate_run(sc, state, run_index):
    geom = sc.geom
    if sc.position_perturbation_std > 0:
        placement = make_generator(sc.master_seed, run_index, PLACEMENT_STREAM)
        offsets = sc.position_perturbation_std * placement.standard_normal(geom.accel_positions.shape)
        geom = geom.with_positions(geom.accel_positions + offsets)
    return simulate_measurement(state, geom, sc.noise, make_generator(sc.master_seed, run_index, NOISE_STREAM))


def _run_method(method, y, sc, opts, cache):
    """Estimated w in rad/s, or None when the run fails."""
    if method == McMethod.ML:
        result = estimate_or_none(y, sc.geom, sc.noise, opts, cache=cache)
        return result.omega_hat if result is not None and result.converged else None
    try:
        if method == McMethod.TENSOR:
            return tensor_method(y, sc.geom).omega_signed
        return gyro_average_baseline(y, sc.geom, sc.noise)
    except InertialArrayError as exc:
        logger.debug("%s failed: %s", method, exc)
        return None


def _blocks(n_grid, n_runs, threads):
    size = -(-n_runs // threads)
    return [(k, start, min(start + size, n_runs)) for k in range(n_grid) for start in range(0, n_runs, size)]


def _rmse(errors):
    ok = ~np.isnan(errors)
    if not ok.any():
        return np.nan, errors.size
    return float(np.sqrt(np.mean(errors[ok] ** 2))), int(errors.size - ok.sum())


def run_scenario(sc):
    """
    Run a Monte Carlo study.

    Args:
        sc (McScenario): The study definition.

    Returns:
        McReport: One row per speed, method and axis (x, y, z, speed). The
        bound columns hold inf where the information is singular and nan for
        the speed axis at w = 0.

    Raises:
        IdentifiabilityError / TensorRankError: The array cannot support a requested method.
        DimensionError: Noise and geometry disagree.
    """
    _check_methods(sc)
    opts = sc.opts or SolverOptions.from_settings()
    cache = ModelCache(sc.geom, sc.noise)
    states = sc.grid_states()
    estimates = np.full((len(sc.methods), sc.n_grid, sc.n_runs, 3), np.nan)
    simulated = np.zeros((sc.n_grid, sc.n_runs), dtype=bool)

    logger.info("Scenario %s: %d speeds x %d runs, methods %s, %d thread(s)",
                sc.name or '<unnamed>', sc.n_grid, sc.n_runs,
                ', '.join(str(method) for method in sc.methods), sc.threads)
    started = time.perf_counter()

    def run_block(block):
        k, start, stop = block
        for r in range(start, stop):
            y = _simulate_run(sc, states[k], k * sc.n_runs + r)
            simulated[k, r] = True
            for m, method in enumerate(sc.methods):
                omega_hat = _run_method(method, y, sc, opts, cache)
                if omega_hat is not None:
                    estimates[m, k, r] = omega_hat

    blocks = _blocks(sc.n_grid, sc.n_runs, sc.threads)
    if sc.threads == 1:
        for block in blocks:
            run_block(block)
    else:
        with ThreadPoolExecutor(max_workers=sc.threads) as pool:
            list(pool.map(run_block, blocks))

    n_measurements = int(simulated.sum())
    assert n_measurements == sc.n_runs * sc.n_grid, "Every grid point must simulate n_runs measurements"

    rows = []
    for k, state in enumerate(states):
        full = sqrt_crb_omega(state.omega, sc.geom, sc.noise, CrbRegime.FULL)
        saturated = sqrt_crb_omega(state.omega, sc.geom, sc.noise, CrbRegime.GYRO_SATURATED)
        bounds = list(zip(full, saturated)) + [(
            sqrt_crb_speed(state.omega, sc.geom, sc.noise, CrbRegime.FULL),
            sqrt_crb_speed(state.omega, sc.geom, sc.noise, CrbRegime.GYRO_SATURATED),
        )]
        speed = sc.speeds[k]
        for m, method in enumerate(sc.methods):
            errors = estimates[m, k] - state.omega
            speed_errors = np.linalg.norm(estimates[m, k], axis=1) - speed
            columns = [errors[:, a] for a in range(3)] + [speed_errors]
            for axis, column, (bound, bound_sat) in zip(REPORT_AXES, columns, bounds):
                rmse, failures = _rmse(column)
                rows.append(McRow(float(speed), method, axis, rmse, float(bound), float(bound_sat),
                                  sc.n_runs, failures))
            failed = rows[-1].failures
            if failed and method != McMethod.GYRO_AVERAGE:
                logger.warning("%s: %d of %d runs failed at %.1f deg/s", method, failed, sc.n_runs,
                               np.rad2deg(speed))

    wall_time = time.perf_counter() - started
    logger.info("Scenario %s finished in %.2f s (%d measurements)", sc.name or '<unnamed>',
                wall_time, n_measurements)
    return McReport(
        rows=tuple(rows),
        master_seed=sc.master_seed,
        n_runs=sc.n_runs,
        wall_time_s=wall_time,
        threads=sc.threads,
        n_measurements=n_measurements,
        name=sc.name,
        scenario_payload=dict(sc.payload),
    )


def write_report(path, report):
    """Write the report CSV; speeds, RMSE and bounds in deg/s."""
    return write_csv_rows(path, MC_REPORT_HEADER, report.csv_rows())
