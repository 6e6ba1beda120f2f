"""
Simulate one noisy, clipped measurement of an array and write the measurement CSV.

Usage:
    python manage.py simulate --geometry planar.json --state state.json --seed 7 --out y.csv
"""

from django.conf import settings

from apps.core.management.base import InertialArrayCommand
from apps.geometry.forms import load_geometry
from apps.signal_model.forms import load_noise, load_state
from apps.signal_model.forward import simulate_measurement
from apps.signal_model.measurements import write_measurement


class Command(InertialArrayCommand):
    help = "Draw a synthetic measurement for a geometry, motion state and noise model"

    def add_arguments(self, parser):
        parser.add_argument('--geometry', required=True, help="Geometry JSON file")
        parser.add_argument('--state', required=True, help="Motion state JSON file")
        self.add_noise_arguments(parser)
        parser.add_argument('--seed', type=int, default=None, help="Master seed (default: MC_DEFAULT_SEED)")
        parser.add_argument('--run-index', type=int, default=0, help="Realization index within the seed")
        self.add_units_argument(parser)
        self.add_out_argument(parser, required=True, help_text="Measurement CSV to write")

    def run(self, **options):
        units = self.units(options)
        geom = load_geometry(options['geometry'])
        state = load_state(options['state'], units=units)
        noise = load_noise(options['noise'], geom, units=units, **self.noise_overrides(options))
        seed = options['seed'] if options['seed'] is not None else settings.INERTIAL_ARRAY['MC_DEFAULT_SEED']

        measurement = simulate_measurement(state, geom, noise, (seed, options['run_index']))
        write_measurement(options['out'], measurement, geom)

        summary = (f"Wrote {geom.n_accel_channels} accelerometer and {geom.n_gyro_channels} gyro rows "
                   f"to {options['out']}")
        self.stdout.write(self.style.SUCCESS(summary))
        if measurement.n_saturated:
            self.stdout.write(self.style.WARNING(
                f"{measurement.n_saturated} of {geom.n_gyro_channels} gyro channels saturated"
            ))
