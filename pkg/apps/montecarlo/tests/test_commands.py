"""
Tests for the montecarlo management command.

Coverage:
- Report CSV and the --save archive
- Seed, run-count and thread overrides
- Shipped scenario names
- Exit codes
"""

import json
import tempfile
from io import StringIO
from pathlib import Path

from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import TestCase

from apps.core.files import read_csv_rows
from apps.montecarlo.models import MonteCarloReport

PLANAR = {'preset': 'planar_square', 'n_gyro_triads': 4, 'gyro_saturation_dps': 2000.0}
SCENARIO = {
    'geometry': PLANAR,
    'direction': [1, 0, 0],
    'speeds': [100.0, 2500.0],
    'n_runs': 5,
    'seed': 3,
    'methods': ['ml', 'gyro_average'],
}


class MonteCarloCommandTests(TestCase):
    """Test `manage.py montecarlo`."""

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)
        self.dir = Path(self.tmp.name)
        self.scenario = self.dir / 'quick_check.json'
        self.scenario.write_text(json.dumps(SCENARIO))

    def montecarlo(self, out, *extra, scenario=None):
        stdout = StringIO()
        call_command('montecarlo', str(scenario or self.scenario), '--out', str(self.dir / out),
                     *extra, stdout=stdout)
        return stdout.getvalue()

    def test_report_file(self):
        """Test one row per speed, method and axis, speed axis included."""
        output = self.montecarlo('report.csv')
        rows = read_csv_rows(self.dir / 'report.csv')
        self.assertEqual(len(rows), 2 * 2 * 4)
        self.assertEqual({row['axis'] for row in rows}, {'x', 'y', 'z', 'speed'})
        self.assertEqual({row['n_runs'] for row in rows}, {'5'})
        self.assertIn('seed 3', output)

    def test_gyro_average_fails_above_saturation(self):
        """Test that every gyro-average run at 2500 deg/s is counted as failed."""
        self.montecarlo('report.csv')
        rows = read_csv_rows(self.dir / 'report.csv')
        saturated = [row for row in rows if row['method'] == 'gyro_average' and float(row['speed_dps']) > 2000]
        self.assertEqual({row['failures'] for row in saturated}, {'5'})
        self.assertEqual({row['rmse_dps'] for row in saturated}, {'nan'})

    def test_same_seed_same_report(self):
        """Test that the CSV is reproducible and independent of the thread count."""
        self.montecarlo('a.csv')
        self.montecarlo('b.csv', '--threads', '3')
        self.montecarlo('c.csv', '--seed', '4')
        first = (self.dir / 'a.csv').read_text()
        self.assertEqual(first, (self.dir / 'b.csv').read_text())
        self.assertNotEqual(first, (self.dir / 'c.csv').read_text())

    def test_save(self):
        """Test that --save archives the report under the file name."""
        output = self.montecarlo('report.csv', '--save', '--seed', '9', '--n-runs', '4')
        record = MonteCarloReport.objects.get()
        self.assertEqual(record.name, 'quick_check')
        self.assertEqual((record.master_seed, record.n_runs), (9, 4))
        self.assertEqual(record.rows.count(), 16)
        self.assertEqual(record.scenario['speeds'], [100.0, 2500.0])
        self.assertIn(f'Saved report #{record.pk}', output)

    def test_without_save_nothing_is_stored(self):
        """Test that the database is untouched by default."""
        self.montecarlo('report.csv')
        self.assertFalse(MonteCarloReport.objects.exists())

    def test_shipped_scenario_by_name(self):
        """Test that a shipped scenario runs by name with a reduced run count."""
        self.montecarlo('outofplane.csv', '--n-runs', '1', scenario='planar_outofplane')
        rows = read_csv_rows(self.dir / 'outofplane.csv')
        self.assertEqual(len(rows), 61 * 2 * 4)

    def test_tensor_on_planar_array(self):
        """Test that requesting the tensor method on a planar array exits with code 2."""
        self.scenario.write_text(json.dumps(dict(SCENARIO, methods=['tensor'])))
        with self.assertRaises(CommandError) as ctx:
            self.montecarlo('report.csv')
        self.assertEqual(ctx.exception.returncode, 2)

    def test_missing_scenario(self):
        """Test that a missing scenario file exits with code 3."""
        with self.assertRaises(CommandError) as ctx:
            self.montecarlo('report.csv', scenario=self.dir / 'missing.json')
        self.assertEqual(ctx.exception.returncode, 3)
