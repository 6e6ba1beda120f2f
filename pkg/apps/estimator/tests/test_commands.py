"""
Tests for the estimate management command.
"""

import json
import tempfile
from io import StringIO
from pathlib import Path

import numpy as np
from numpy.testing import assert_allclose
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase

from apps.geometry.forms import load_geometry
from apps.signal_model.forward import clip_gyros, predict
from apps.signal_model.measurements import Measurement, MotionState, write_measurement

PLANAR = {'preset': 'planar_square', 'n_gyro_triads': 4, 'gyro_saturation_dps': 2000.0}
COLLINEAR = {'accel_positions_m': [[0, 0, 0], [0.01, 0, 0], [0.02, 0, 0]], 'n_gyro_triads': 1}


class EstimateCommandTests(SimpleTestCase):
    """Test `manage.py estimate` on noiseless and simulated files."""

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)
        self.dir = Path(self.tmp.name)
        self.geometry = self.write('planar.json', PLANAR)

    def write(self, name, payload):
        path = self.dir / name
        path.write_text(json.dumps(payload))
        return str(path)

    def noiseless_file(self, omega_dps, name='y.csv'):
        geom = load_geometry(self.geometry)
        state = MotionState(np.deg2rad(omega_dps), [10.0, -5.0, 2.0], [0.0, 0.0, 9.81])
        y = predict(state, geom)
        gyro, saturated = clip_gyros(y[geom.n_accel_channels:], geom.gyro_saturation)
        path = self.dir / name
        write_measurement(path, Measurement(y[:geom.n_accel_channels], gyro, saturated), geom)
        return str(path)

    def estimate(self, measurement, *extra):
        out = self.dir / 'estimate.json'
        call_command('estimate', '--geometry', self.geometry, '--measurement', measurement,
                     '--out', str(out), *extra, stdout=StringIO())
        return json.loads(out.read_text())

    def test_noiseless_recovery(self):
        """Test that noiseless data returns the true state in deg/s."""
        payload = self.estimate(self.noiseless_file([300.0, -200.0, 100.0]))
        self.assertTrue(payload['converged'])
        self.assertEqual(payload['units'], 'deg')
        assert_allclose(payload['omega'], [300.0, -200.0, 100.0], atol=1e-6)
        assert_allclose(payload['specific_force'], [0.0, 0.0, 9.81], atol=1e-8)
        self.assertEqual(payload['n_channels'], 24)

    def test_saturated_recovery(self):
        """Test that 2500 deg/s about x is recovered although the x-gyros are clipped."""
        payload = self.estimate(self.noiseless_file([2500.0, 0.0, 0.0]))
        assert_allclose(payload['omega'], [2500.0, 0.0, 0.0], atol=1e-4)
        self.assertEqual(len(payload['used_channels']), 20)

    def test_radians(self):
        """Test that --units rad reports rad/s."""
        payload = self.estimate(self.noiseless_file([90.0, 0.0, 0.0]), '--units', 'rad')
        assert_allclose(payload['omega'], [np.pi / 2, 0.0, 0.0], atol=1e-8)

    def simulated_file(self, omega_dps, seed):
        state = self.write('state.json', {'omega': omega_dps})
        measurement = str(self.dir / 'simulated.csv')
        call_command('simulate', '--geometry', self.geometry, '--state', state, '--seed', str(seed),
                     '--out', measurement, stdout=StringIO())
        return measurement

    def test_simulated_measurement(self):
        """Test the simulate then estimate pipeline against the noise level."""
        payload = self.estimate(self.simulated_file([500.0, 0.0, 0.0], 5))
        self.assertTrue(payload['converged'])
        assert_allclose(payload['omega'], [500.0, 0.0, 0.0], atol=3.0)

    def test_stdout_when_no_out(self):
        """Test that the estimate is printed as JSON without --out."""
        stdout = StringIO()
        call_command('estimate', '--geometry', self.geometry,
                     '--measurement', self.noiseless_file([10.0, 0.0, 0.0]), stdout=stdout)
        assert_allclose(json.loads(stdout.getvalue())['omega'], [10.0, 0.0, 0.0], atol=1e-6)

    def test_non_convergence_exit_code(self):
        """Test that an iteration cap that stops the solver exits with code 4 after writing."""
        measurement = self.simulated_file([500.0, 200.0, -100.0], 14)
        with self.assertRaises(CommandError) as ctx:
            self.estimate(measurement, '--max-iterations', '1')
        self.assertEqual(ctx.exception.returncode, 4)
        self.assertTrue((self.dir / 'estimate.json').exists())

    def test_collinear_geometry(self):
        """Test that a collinear array exits with code 2."""
        geom = load_geometry(self.write('collinear.json', COLLINEAR))
        path = self.dir / 'collinear.csv'
        write_measurement(path, Measurement(np.zeros(9), np.zeros(3)), geom)
        self.geometry = str(self.dir / 'collinear.json')
        with self.assertRaises(CommandError) as ctx:
            self.estimate(str(path))
        self.assertEqual(ctx.exception.returncode, 2)

    def test_missing_measurement(self):
        """Test that a missing measurement file exits with code 3."""
        with self.assertRaises(CommandError) as ctx:
            self.estimate(str(self.dir / 'missing.csv'))
        self.assertEqual(ctx.exception.returncode, 3)
