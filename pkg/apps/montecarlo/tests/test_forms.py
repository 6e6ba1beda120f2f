"""
Unit Tests for ScenarioForm and the shipped scenario files.
"""

import json
import tempfile
from pathlib import Path

import numpy as np
from numpy.testing import assert_allclose
from django import forms
from django.conf import settings
from django.test import SimpleTestCase, override_settings

from apps.core.exceptions import DimensionError, InputFileError
from apps.geometry.arrays import supports_tensor_method
from apps.montecarlo.forms import SCENARIO_DIR, ScenarioForm, load_scenario, resolve_scenario_path
from apps.montecarlo.harness import McMethod

PLANAR = {'preset': 'planar_square', 'n_gyro_triads': 4, 'gyro_saturation_dps': 2000.0}


def scenario_data(**fields):
    data = {'geometry': PLANAR, 'direction': [1, 0, 0], 'speeds': [100.0, 1000.0]}
    data.update(fields)
    return data


class ShippedScenarioTests(SimpleTestCase):
    """Test that every shipped scenario loads."""

    def test_planar_inplane(self):
        """Test the in-plane sweep: planar array, rotation about x, full grid."""
        sc = load_scenario(resolve_scenario_path('planar_inplane'))
        self.assertEqual(sc.name, 'planar_inplane')
        self.assertEqual(sc.geom.n_accel_triads, 4)
        self.assertEqual(sc.geom.n_gyro_triads, 4)
        assert_allclose(sc.direction, [1, 0, 0])
        self.assertEqual(sc.n_grid, 61)
        assert_allclose(sc.speeds[[0, -1]], np.deg2rad([10.0, 10_000.0]))
        self.assertEqual(sc.n_runs, 10_000)
        self.assertEqual(sc.methods, (McMethod.ML, McMethod.GYRO_AVERAGE))
        assert_allclose(np.diag(sc.noise.Q)[:12], 0.01)
        assert_allclose(np.diag(sc.noise.Q)[12:], np.deg2rad(1.0) ** 2)

    def test_planar_outofplane(self):
        """Test the out-of-plane sweep: rotation about z."""
        sc = load_scenario(SCENARIO_DIR / 'planar_outofplane.json')
        assert_allclose(sc.direction, [0, 0, 1])

    def test_cube_tensor(self):
        """Test the tensor comparison: cube array along (1, 1, 1) with all methods."""
        sc = load_scenario(SCENARIO_DIR / 'cube_tensor.json')
        self.assertTrue(supports_tensor_method(sc.geom))
        assert_allclose(sc.direction, np.ones(3) / np.sqrt(3))
        self.assertIn(McMethod.TENSOR, sc.methods)

    def test_planar_placement_errors(self):
        """Test the placement-error study: 0.1 mm perturbations."""
        sc = load_scenario(SCENARIO_DIR / 'planar_placement_errors.json')
        self.assertAlmostEqual(sc.position_perturbation_std, 1e-4)
        self.assertEqual(sc.payload['name'], 'planar_placement_errors')

    def test_overrides(self):
        """Test that seed, n_runs and threads overrides replace the file values."""
        sc = load_scenario(SCENARIO_DIR / 'planar_inplane.json', n_runs=12, seed=5, threads=None)
        self.assertEqual(sc.n_runs, 12)
        self.assertEqual(sc.master_seed, 5)
        self.assertEqual(sc.threads, 1)


class ScenarioFormTests(SimpleTestCase):
    """Test ScenarioForm validation rules."""

    def test_speeds_in_degrees(self):
        """Test that speeds are converted from the scenario units."""
        form = ScenarioForm(data=scenario_data())
        self.assertTrue(form.is_valid(), form.errors)
        assert_allclose(form.to_scenario().speeds, np.deg2rad([100.0, 1000.0]))

    def test_speeds_in_radians(self):
        """Test that units 'rad' leaves speeds unchanged."""
        form = ScenarioForm(data=scenario_data(units='rad', speeds=[1.0, 2.0]))
        self.assertTrue(form.is_valid(), form.errors)
        assert_allclose(form.to_scenario().speeds, [1.0, 2.0])

    def test_default_speed_grid(self):
        """Test that omitting speeds gives 10..10^4 deg/s at 20 points per decade."""
        form = ScenarioForm(data=scenario_data(speeds=None))
        self.assertTrue(form.is_valid(), form.errors)
        self.assertEqual(form.to_scenario().n_grid, 61)

    def test_speed_range(self):
        """Test that speed_range expands to a log grid."""
        form = ScenarioForm(data=scenario_data(speeds=None, speed_range={'min': 100, 'max': 1000, 'per_decade': 4}))
        self.assertTrue(form.is_valid(), form.errors)
        assert_allclose(form.to_scenario().speeds, np.deg2rad(np.geomspace(100, 1000, 5)))

    def test_speeds_and_range_together_are_rejected(self):
        """Test that speeds and speed_range are mutually exclusive."""
        form = ScenarioForm(data=scenario_data(speed_range={'min': 10, 'max': 100}))
        self.assertFalse(form.is_valid())
        self.assertIn('__all__', form.errors)

    def test_bad_speed_range(self):
        """Test that a range without max, or with min > max, is rejected."""
        self.assertFalse(ScenarioForm(data=scenario_data(speeds=None, speed_range={'min': 10})).is_valid())
        self.assertFalse(ScenarioForm(data=scenario_data(speeds=None, speed_range={'min': 10, 'max': 1})).is_valid())

    def test_zero_direction_is_rejected(self):
        """Test that the rotation axis must be non-zero."""
        form = ScenarioForm(data=scenario_data(direction=[0, 0, 0]))
        self.assertFalse(form.is_valid())
        self.assertIn('direction', form.errors)

    def test_unknown_method_is_rejected(self):
        """Test that methods must come from ml, tensor, gyro_average."""
        form = ScenarioForm(data=scenario_data(methods=['ml', 'ekf']))
        self.assertFalse(form.is_valid())
        self.assertIn('methods', form.errors)

    def test_negative_perturbation_is_rejected(self):
        """Test that the placement error std must be non-negative."""
        form = ScenarioForm(data=scenario_data(position_perturbation_std_m=-1e-4))
        self.assertFalse(form.is_valid())

    def test_missing_geometry_is_rejected(self):
        """Test that geometry is required."""
        data = scenario_data()
        del data['geometry']
        form = ScenarioForm(data=data)
        self.assertFalse(form.is_valid())
        self.assertIn('geometry', form.errors)

    def test_defaults_from_settings(self):
        """Test that n_runs, seed and threads default to the MC_DEFAULT_* settings."""
        config = dict(settings.INERTIAL_ARRAY, MC_DEFAULT_RUNS=77, MC_DEFAULT_SEED=3, MC_DEFAULT_THREADS=2)
        with override_settings(INERTIAL_ARRAY=config):
            form = ScenarioForm(data=scenario_data())
            self.assertTrue(form.is_valid(), form.errors)
            sc = form.to_scenario()
        self.assertEqual((sc.n_runs, sc.master_seed, sc.threads), (77, 3, 2))

    def test_noise_must_fit_geometry(self):
        """Test that a covariance of the wrong size raises DimensionError."""
        form = ScenarioForm(data=scenario_data(noise={'covariance': np.eye(3).tolist()}))
        self.assertTrue(form.is_valid(), form.errors)
        with self.assertRaises(DimensionError):
            form.to_scenario()


class ScenarioFileTests(SimpleTestCase):
    """Test load_scenario on files."""

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)
        self.dir = Path(self.tmp.name)

    def test_name_defaults_to_file_stem(self):
        """Test that an unnamed scenario takes the file name."""
        path = self.dir / 'quick_check.json'
        path.write_text(json.dumps(scenario_data()))
        self.assertEqual(load_scenario(path).name, 'quick_check')

    def test_missing_file(self):
        """Test that a missing file raises InputFileError."""
        with self.assertRaises(InputFileError):
            load_scenario(self.dir / 'missing.json')

    def test_invalid_content(self):
        """Test that a list payload raises ValidationError."""
        path = self.dir / 'list.json'
        path.write_text('[1, 2, 3]')
        with self.assertRaises(forms.ValidationError):
            load_scenario(path)

    def test_unknown_name_is_a_plain_path(self):
        """Test that names that are not shipped scenarios pass through."""
        self.assertEqual(resolve_scenario_path('nothing_here'), Path('nothing_here'))
        self.assertEqual(resolve_scenario_path('cube_tensor.json'), SCENARIO_DIR / 'cube_tensor.json')
