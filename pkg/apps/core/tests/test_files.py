"""
Unit Tests for the JSON and CSV file helpers.
"""

import json
import tempfile
from pathlib import Path

import numpy as np
from django.test import SimpleTestCase

from apps.core.exceptions import InputFileError
from apps.core.files import dumps_json, read_csv_rows, read_json, write_csv_rows, write_json


class FileHelperTests(SimpleTestCase):
    """Test read_json, write_json and the CSV helpers."""

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)
        self.dir = Path(self.tmp.name)

    def test_numpy_values_are_serialised(self):
        """Test that arrays and numpy scalars become plain JSON."""
        path = write_json(self.dir / 'nested' / 'out.json', {'a': np.arange(3), 'b': np.float64(0.5), 'c': np.bool_(True)})
        self.assertEqual(read_json(path), {'a': [0, 1, 2], 'b': 0.5, 'c': True})

    def test_non_finite_values(self):
        """Test that inf survives a JSON round trip."""
        self.assertEqual(json.loads(dumps_json({'v': np.inf}))['v'], float('inf'))

    def test_missing_file(self):
        """Test that a missing file raises InputFileError."""
        with self.assertRaises(InputFileError):
            read_json(self.dir / 'missing.json')
        with self.assertRaises(InputFileError):
            read_csv_rows(self.dir / 'missing.csv')

    def test_malformed_json(self):
        """Test that invalid JSON raises InputFileError."""
        path = self.dir / 'bad.json'
        path.write_text('{"a": ')
        with self.assertRaises(InputFileError):
            read_json(path)

    def test_unwritable_path(self):
        """Test that writing below a regular file raises InputFileError."""
        blocker = self.dir / 'file'
        blocker.write_text('')
        with self.assertRaises(InputFileError):
            write_json(blocker / 'out.json', {})
        with self.assertRaises(InputFileError):
            write_csv_rows(blocker / 'out.csv', ['a'], [(1,)])

    def test_csv_floats_round_trip(self):
        """Test that floats are written at full precision."""
        value = 0.1 + 0.2
        path = write_csv_rows(self.dir / 'out.csv', ['name', 'value'], [('x', value), ('y', np.float64(np.nan))])
        rows = read_csv_rows(path)
        self.assertEqual(float(rows[0]['value']), value)
        self.assertEqual(rows[1]['value'], 'nan')
