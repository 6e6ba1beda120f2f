"""
Unit Tests for GeometryForm and geometry files.
"""

import json
import tempfile
from pathlib import Path

import numpy as np
from numpy.testing import assert_allclose
from django import forms
from django.test import SimpleTestCase, override_settings
from django.conf import settings

from apps.core.exceptions import InputFileError
from apps.geometry.arrays import cube_array, planar_square_array
from apps.geometry.forms import GeometryForm, geometry_from_payload, geometry_payload, load_geometry


class GeometryFormTests(SimpleTestCase):
    """Test GeometryForm validation rules."""

    def test_valid_payload(self):
        """Test that a planar payload validates and converts deg/s to rad/s."""
        form = GeometryForm(data={
            'accel_positions_m': [[0, 0, 0], [0.01, 0, 0], [0, 0.01, 0]],
            'n_gyro_triads': 2,
            'gyro_saturation_dps': 2000.0,
        })
        self.assertTrue(form.is_valid(), form.errors)
        geom = form.to_geometry()
        self.assertEqual(geom.n_accel_triads, 3)
        self.assertEqual(geom.n_gyro_triads, 2)
        self.assertAlmostEqual(geom.gyro_saturation, np.deg2rad(2000.0))

    def test_saturation_defaults_from_settings(self):
        """Test that an omitted saturation uses GYRO_SATURATION_DPS."""
        config = dict(settings.INERTIAL_ARRAY, GYRO_SATURATION_DPS=500.0)
        with override_settings(INERTIAL_ARRAY=config):
            form = GeometryForm(data={'accel_positions_m': [[0, 0, 0]], 'n_gyro_triads': 1})
            self.assertTrue(form.is_valid(), form.errors)
            self.assertAlmostEqual(form.to_geometry().gyro_saturation, np.deg2rad(500.0))

    def test_ragged_positions_are_rejected(self):
        """Test that positions must be [x, y, z] triples."""
        form = GeometryForm(data={'accel_positions_m': [[0, 0], [1, 2]], 'n_gyro_triads': 1})
        self.assertFalse(form.is_valid())
        self.assertIn('accel_positions_m', form.errors)

    def test_non_numeric_positions_are_rejected(self):
        """Test that strings inside positions are rejected."""
        form = GeometryForm(data={'accel_positions_m': [['a', 0, 0]], 'n_gyro_triads': 1})
        self.assertFalse(form.is_valid())

    def test_negative_gyro_count_is_rejected(self):
        """Test that n_gyro_triads must be non-negative."""
        form = GeometryForm(data={'accel_positions_m': [[0, 0, 0]], 'n_gyro_triads': -1})
        self.assertFalse(form.is_valid())
        self.assertIn('n_gyro_triads', form.errors)

    def test_negative_saturation_is_rejected(self):
        """Test that gyro_saturation_dps must be positive."""
        form = GeometryForm(data={
            'accel_positions_m': [[0, 0, 0]], 'n_gyro_triads': 1, 'gyro_saturation_dps': -5,
        })
        self.assertFalse(form.is_valid())
        self.assertIn('gyro_saturation_dps', form.errors)

    def test_empty_array_is_rejected(self):
        """Test that at least one triad is required."""
        form = GeometryForm(data={'accel_positions_m': [], 'n_gyro_triads': 0})
        self.assertFalse(form.is_valid())
        self.assertIn('__all__', form.errors)


class PresetGeometryTests(SimpleTestCase):
    """Test reference arrays selected by name."""

    def test_planar_square_preset(self):
        """Test that the planar preset matches planar_square_array."""
        geom = geometry_from_payload({
            'preset': 'planar_square', 'alpha': 0.02, 'n_per_side': 3,
            'n_gyro_triads': 2, 'gyro_saturation_dps': 1000.0,
        })
        expected = planar_square_array(0.02, 3, 2)
        assert_allclose(geom.accel_positions, expected.accel_positions)
        self.assertEqual(geom.n_gyro_triads, 2)
        self.assertAlmostEqual(geom.gyro_saturation, np.deg2rad(1000.0))

    def test_cube_preset_defaults(self):
        """Test that omitted preset fields take the reference defaults."""
        geom = geometry_from_payload({'preset': 'cube'})
        assert_allclose(geom.accel_positions, cube_array().accel_positions)
        self.assertEqual(geom.n_gyro_triads, 6)
        self.assertAlmostEqual(geom.gyro_saturation, np.deg2rad(settings.INERTIAL_ARRAY['GYRO_SATURATION_DPS']))

    def test_unknown_preset(self):
        """Test that an unknown preset name is rejected."""
        with self.assertRaises(forms.ValidationError):
            geometry_from_payload({'preset': 'hexagon'})

    def test_non_positive_spacing(self):
        """Test that alpha must be positive."""
        with self.assertRaises(forms.ValidationError):
            geometry_from_payload({'preset': 'planar_square', 'alpha': 0})

    def test_payload_must_be_an_object(self):
        """Test that a list is not a geometry."""
        with self.assertRaises(forms.ValidationError):
            geometry_from_payload([[0, 0, 0]])


class GeometryFileTests(SimpleTestCase):
    """Test load_geometry on files."""

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)
        self.dir = Path(self.tmp.name)

    def test_payload_round_trip(self):
        """Test that geometry_payload output loads back to the same geometry."""
        geom = cube_array(gyro_saturation=np.deg2rad(2000.0))
        path = self.dir / 'cube.json'
        path.write_text(json.dumps(geometry_payload(geom)))
        loaded = load_geometry(path)
        assert_allclose(loaded.accel_positions, geom.accel_positions)
        self.assertEqual(loaded.n_gyro_triads, 6)
        self.assertAlmostEqual(loaded.gyro_saturation, geom.gyro_saturation)

    def test_missing_file(self):
        """Test that a missing file raises InputFileError."""
        with self.assertRaises(InputFileError):
            load_geometry(self.dir / 'missing.json')

    def test_malformed_json(self):
        """Test that broken JSON raises InputFileError."""
        path = self.dir / 'broken.json'
        path.write_text('{"accel_positions_m": [')
        with self.assertRaises(InputFileError):
            load_geometry(path)

    def test_invalid_content(self):
        """Test that invalid content raises ValidationError."""
        path = self.dir / 'bad.json'
        path.write_text(json.dumps({'accel_positions_m': [[0, 0]], 'n_gyro_triads': 1}))
        with self.assertRaises(forms.ValidationError):
            load_geometry(path)
