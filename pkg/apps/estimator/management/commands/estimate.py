"""
Fuse a measurement CSV into the maximum-likelihood (w, dw, s) and write it as JSON.

Usage:
    python manage.py estimate --geometry planar.json --measurement y.csv --out estimate.json
"""

import numpy as np

from apps.core.management.base import InertialArrayCommand, NonConvergenceError
from apps.core.units import to_internal
from apps.estimator.fusion import estimate
from apps.estimator.options import SolverOptions
from apps.geometry.forms import load_geometry
from apps.signal_model.forms import load_noise
from apps.signal_model.measurements import read_measurement


class Command(InertialArrayCommand):
    help = "Maximum-likelihood fusion of one array measurement"

    def add_arguments(self, parser):
        parser.add_argument('--geometry', required=True, help="Geometry JSON file")
        parser.add_argument('--measurement', required=True, help="Measurement CSV file")
        self.add_noise_arguments(parser)
        parser.add_argument('--prior-omega', type=float, nargs=3, default=None, metavar=('X', 'Y', 'Z'),
                            help="Extra start for saturated axes, in --units")
        parser.add_argument('--max-iterations', type=int, default=None)
        self.add_units_argument(parser)
        self.add_out_argument(parser, help_text="Estimate JSON (stdout when omitted)")

    def run(self, **options):
        units = self.units(options)
        geom = load_geometry(options['geometry'])
        measurement = read_measurement(options['measurement'], geom)
        noise = load_noise(options['noise'], geom, units=units, **self.noise_overrides(options))
        opts = SolverOptions.from_settings(max_iterations=options['max_iterations'])
        prior = options['prior_omega']
        prior = None if prior is None else to_internal(np.asarray(prior), units)

        result = estimate(measurement, geom, noise, opts, prior_omega=prior)
        self.emit_json(result.as_dict(units), options['out'])
        if not result.converged:
            raise NonConvergenceError(f"Gauss-Newton did not converge after {result.iterations} iterations")
