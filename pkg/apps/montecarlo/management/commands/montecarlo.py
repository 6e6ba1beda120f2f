"""
Run a Monte Carlo scenario and write its RMSE / CRB report.

Usage:
    python manage.py montecarlo planar_inplane --out inplane.csv
    python manage.py montecarlo my_scenario.json --n-runs 500 --threads 4 --out quick.csv --save
"""

from apps.core.management.base import InertialArrayCommand
from apps.montecarlo.forms import load_scenario, resolve_scenario_path
from apps.montecarlo.harness import run_scenario, write_report
from apps.montecarlo.models import MonteCarloReport


class Command(InertialArrayCommand):
    help = "Monte Carlo RMSE of the estimators against the Cramer-Rao bound"

    def add_arguments(self, parser):
        parser.add_argument('scenario', help="Scenario JSON file or the name of a shipped scenario")
        parser.add_argument('--seed', type=int, default=None, help="Override the scenario master seed")
        parser.add_argument('--n-runs', type=int, default=None, help="Override runs per speed")
        parser.add_argument('--threads', type=int, default=None, help="Override worker threads")
        self.add_out_argument(parser, required=True, help_text="Report CSV to write (deg/s)")
        parser.add_argument('--save', action='store_true', help="Also archive the report in the database")

    def run(self, **options):
        path = resolve_scenario_path(options['scenario'])
        scenario = load_scenario(path, seed=options['seed'], n_runs=options['n_runs'], threads=options['threads'])

        report = run_scenario(scenario)
        write_report(options['out'], report)

        failures = {method: report.failures(method) for method in scenario.methods}
        self.stdout.write(self.style.SUCCESS(
            f"Wrote {len(report.rows)} rows to {options['out']} in {report.wall_time_s:.2f} s "
            f"({report.n_measurements} measurements, seed {report.master_seed})"
        ))
        for method, count in failures.items():
            if count and method != 'gyro_average':
                self.stdout.write(self.style.WARNING(f"{method}: {count} failed runs excluded from RMSE"))

        if options['save']:
            record = MonteCarloReport.objects.from_report(report)
            self.stdout.write(self.style.SUCCESS(f"Saved report #{record.pk}: {record}"))
