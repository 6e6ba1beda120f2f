"""
Unit Tests for the Forward Model

Coverage:
- h_s against the rigid-body acceleration formula
- Jacobians against central finite differences
- Noiseless and noisy simulation, saturation and determinism
"""

import numpy as np
from numpy.testing import assert_allclose, assert_array_equal
from django.test import SimpleTestCase

from apps.core.exceptions import DimensionError
from apps.geometry.arrays import ArrayGeometry, build_H, cube_array, planar_square_array
from apps.signal_model.forward import (
    clip_gyros,
    draw_noise,
    h_full,
    h_s,
    jacobian_A,
    jacobian_h,
    predict,
    simulate_measurement,
)
from apps.signal_model.measurements import MotionState, NoiseModel

SIGMA_S2 = 0.01
SIGMA_W2 = np.deg2rad(1.0) ** 2


def random_geometry(rng, n_accel=5, n_gyro=2):
    return ArrayGeometry(rng.normal(scale=0.02, size=(n_accel, 3)), n_gyro_triads=n_gyro)


# =============================================================================
# NONLINEAR MODEL
# =============================================================================

class ForwardModelTests(SimpleTestCase):
    """Test h_s, h_full and predict."""

    def test_h_s_matches_rigid_body_formula(self):
        """Test that each block equals w x (w x r_i)."""
        rng = np.random.default_rng(2)
        geom = random_geometry(rng)
        for _ in range(10):
            omega = rng.normal(scale=20.0, size=3)
            expected = np.cross(omega, np.cross(omega, geom.accel_positions)).reshape(-1)
            assert_allclose(h_s(omega, geom), expected, rtol=1e-12, atol=1e-12)

    def test_h_s_is_even_in_omega(self):
        """Test the sign ambiguity h_s(w) == h_s(-w)."""
        geom = cube_array()
        omega = np.array([3.0, -1.0, 7.0])
        assert_array_equal(h_s(omega, geom), h_s(-omega, geom))

    def test_h_full_repeats_omega_per_gyro(self):
        """Test that the gyro part stacks w once per triad."""
        geom = planar_square_array(n_gyro_triads=3)
        omega = np.array([1.0, 2.0, 3.0])
        assert_array_equal(h_full(omega, geom)[12:], np.tile(omega, 3))

    def test_predict_matches_point_acceleration(self):
        """Test y_i = s + dw x r_i + w x (w x r_i) and gyro = w."""
        geom = cube_array()
        state = MotionState([1.0, -2.0, 3.0], [10.0, 20.0, -5.0], [0.0, 0.0, 9.81])
        y = predict(state, geom)
        r = geom.accel_positions
        accel = state.specific_force + np.cross(state.omega_dot, r) \
            + np.cross(state.omega, np.cross(state.omega, r))
        assert_allclose(y[:18], accel.reshape(-1), atol=1e-12)
        assert_allclose(y[18:], np.tile(state.omega, 6))


# =============================================================================
# JACOBIANS
# =============================================================================

class JacobianTests(SimpleTestCase):
    """Test the analytic derivatives of h."""

    def test_jacobian_A_formula(self):
        """Test A(u, v) = (u.v) I + u v' - 2 v u'."""
        rng = np.random.default_rng(3)
        u, v = rng.normal(size=3), rng.normal(size=3)
        expected = (u @ v) * np.eye(3) + np.outer(u, v) - 2 * np.outer(v, u)
        assert_allclose(jacobian_A(u, v), expected, atol=1e-14)

    def test_jacobian_h_against_central_differences(self):
        """Test jacobian_h against central differences over random draws."""
        rng = np.random.default_rng(4)
        step = 1e-5
        for _ in range(100):
            geom = random_geometry(rng, n_accel=int(rng.integers(3, 8)), n_gyro=int(rng.integers(0, 3)))
            omega = rng.normal(scale=10.0, size=3)
            numeric = np.column_stack([
                (h_full(omega + step * e, geom) - h_full(omega - step * e, geom)) / (2 * step)
                for e in np.eye(3)
            ])
            self.assertLessEqual(np.abs(jacobian_h(omega, geom) - numeric).max(), 1e-6)

    def test_jacobian_blocks_use_jacobian_A(self):
        """Test that accelerometer block i equals A(w, r_i)."""
        geom = cube_array()
        omega = np.array([0.5, -4.0, 2.0])
        J = jacobian_h(omega, geom)
        for i, r in enumerate(geom.accel_positions):
            assert_allclose(J[3 * i:3 * i + 3], jacobian_A(omega, r), atol=1e-15)
        assert_array_equal(J[18:21], np.eye(3))


# =============================================================================
# SIMULATION
# =============================================================================

class SimulationTests(SimpleTestCase):
    """Test simulate_measurement."""

    def setUp(self):
        self.geom = planar_square_array(gyro_saturation=np.deg2rad(2000.0))
        self.noise = NoiseModel.iid_blocks(SIGMA_S2, SIGMA_W2, self.geom)

    def test_noiseless_simulation_equals_prediction(self):
        """Test that a tiny noise level reproduces h(w) + H phi."""
        noise = NoiseModel.iid_blocks(1e-30, 1e-30, self.geom)
        state = MotionState(np.deg2rad([100.0, -50.0, 20.0]), [1.0, 2.0, 3.0], [0.0, 0.0, 9.81])
        measurement = simulate_measurement(state, self.geom, noise, 0)
        expected = h_full(state.omega, self.geom) + build_H(self.geom) @ state.phi
        assert_allclose(measurement.y, expected, atol=1e-12)
        self.assertEqual(measurement.n_saturated, 0)

    def test_same_seed_same_data(self):
        """Test that (seed, run) determines the draw."""
        state = MotionState(np.deg2rad([10.0, 0.0, 0.0]))
        first = simulate_measurement(state, self.geom, self.noise, (7, 3))
        second = simulate_measurement(state, self.geom, self.noise, (7, 3))
        other = simulate_measurement(state, self.geom, self.noise, (7, 4))
        assert_array_equal(first.y, second.y)
        self.assertFalse(np.array_equal(first.y, other.y))

    def test_saturation_flags_at_2100_dps(self):
        """Test that 2100 deg/s about x clips the four x-gyros to +gamma."""
        state = MotionState(np.deg2rad([2100.0, 0.0, 0.0]))
        measurement = simulate_measurement(state, self.geom, self.noise, 1)
        flags = measurement.saturated.reshape(4, 3)
        assert_array_equal(flags[:, 0], True)
        assert_array_equal(flags[:, 1:], False)
        assert_allclose(measurement.gyro.reshape(4, 3)[:, 0], self.geom.gyro_saturation)

    def test_negative_saturation_keeps_sign(self):
        """Test that clipping below -gamma reads -gamma."""
        clipped, saturated = clip_gyros(np.array([-50.0, 10.0, 50.0]), 30.0)
        assert_array_equal(clipped, [-30.0, 10.0, 30.0])
        assert_array_equal(saturated, [True, False, True])

    def test_no_clipping_with_infinite_range(self):
        """Test that gamma = inf never flags a channel."""
        clipped, saturated = clip_gyros(np.array([-1e6, 1e6]), np.inf)
        assert_array_equal(clipped, [-1e6, 1e6])
        self.assertFalse(saturated.any())

    def test_dimension_mismatch(self):
        """Test that a noise model for another geometry is rejected."""
        noise = NoiseModel.iid_blocks(SIGMA_S2, SIGMA_W2, cube_array())
        with self.assertRaises(DimensionError):
            simulate_measurement(MotionState([0, 0, 0]), self.geom, noise, 0)

    def test_noise_covariance(self):
        """Test that 1e5 draws reproduce Q within 5% Frobenius."""
        rng = np.random.default_rng(5)
        A = rng.normal(size=(24, 24))
        Q = 0.01 * (A @ A.T / 24 + np.eye(24))
        samples = draw_noise(NoiseModel(Q), np.random.default_rng(6), size=100_000)
        empirical = np.cov(samples, rowvar=False)
        self.assertLess(np.linalg.norm(empirical - Q) / np.linalg.norm(Q), 0.05)
