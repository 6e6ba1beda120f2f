"""
Tests for the check_array management command.
"""

import json
import tempfile
from io import StringIO
from pathlib import Path

from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase

COLLINEAR = {'accel_positions_m': [[0, 0, 0], [0.01, 0, 0], [0.02, 0, 0]], 'n_gyro_triads': 1}


class CheckArrayCommandTests(SimpleTestCase):
    """Test `manage.py check_array`."""

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)
        self.dir = Path(self.tmp.name)
        self.planar = self.write('planar.json', {'preset': 'planar_square'})
        self.cube = self.write('cube.json', {'preset': 'cube'})
        self.collinear = self.write('collinear.json', COLLINEAR)

    def write(self, name, payload):
        path = self.dir / name
        path.write_text(json.dumps(payload))
        return str(path)

    def check(self, *args):
        stdout, stderr = StringIO(), StringIO()
        call_command('check_array', *args, stdout=stdout, stderr=stderr)
        return stdout.getvalue(), stderr.getvalue()

    def test_verdicts(self):
        """Test that both reference arrays are identifiable and only the cube supports the tensor method."""
        out = self.dir / 'verdicts.json'
        self.check('--geometry', self.planar, '--geometry', self.cube, '--out', str(out))
        planar, cube = json.loads(out.read_text())
        self.assertEqual(planar['geometry'], self.planar)
        self.assertTrue(planar['identifiable'])
        self.assertEqual(planar['position_span_dim'], 2)
        self.assertFalse(planar['tensor_capable'])
        self.assertTrue(cube['identifiable'])
        self.assertEqual(cube['position_span_dim'], 3)
        self.assertTrue(cube['tensor_capable'])

    def test_collinear_is_reported(self):
        """Test that a collinear array gets a verdict and a warning but exits 0."""
        stdout, stderr = self.check('--geometry', self.collinear)
        (verdict,) = json.loads(stdout)
        self.assertFalse(verdict['identifiable'])
        self.assertEqual(verdict['reason'], 'collinear_accelerometers')
        self.assertIn('collinear.json', stderr)

    def test_strict(self):
        """Test that --strict turns an unidentifiable array into exit code 2."""
        with self.assertRaises(CommandError) as ctx:
            self.check('--geometry', self.planar, '--geometry', self.collinear, '--strict')
        self.assertEqual(ctx.exception.returncode, 2)

    def test_invalid_file(self):
        """Test that malformed JSON exits with code 3."""
        broken = self.dir / 'broken.json'
        broken.write_text('{"preset": ')
        with self.assertRaises(CommandError) as ctx:
            self.check('--geometry', str(broken))
        self.assertEqual(ctx.exception.returncode, 3)
