"""
Cramer-Rao bounds of an array: a speed sweep as CSV, or one angular velocity as JSON.

Usage:
    python manage.py crb --geometry planar.json --direction 1 0 0 --out crb.csv
    python manage.py crb --geometry planar.json --speeds 0 500 2500 --out crb.csv
    python manage.py crb --geometry cube.json --omega 1000 1000 1000
"""

import numpy as np
from django.core.management.base import CommandError

from apps.core.exceptions import UnboundedCrbError
from apps.core.management.base import EXIT_VALIDATION, InertialArrayCommand
from apps.core.units import to_external, to_internal
from apps.crb.bounds import (
    OMEGA, OMEGA_DOT, SPECIFIC_FORCE, CrbRegime, crb_full, crb_sweep, speed_grid, write_crb_sweep,
)
from apps.geometry.forms import load_geometry
from apps.signal_model.forms import load_noise


def bound_payload(omega, geom, noise, regime, units):
    """sqrt CRB per parameter block in one regime; unbounded entries are inf."""
    try:
        variances = np.diag(crb_full(omega, geom, noise, regime).covariance)
        bounded = True
    except UnboundedCrbError as exc:
        variances = exc.variances
        bounded = False
    std = np.sqrt(variances)
    return {
        'bounded': bounded,
        'sqrt_crb_omega': to_external(std[OMEGA], units),
        'sqrt_crb_omega_dot': to_external(std[OMEGA_DOT], units),
        'sqrt_crb_specific_force': std[SPECIFIC_FORCE],
    }


class Command(InertialArrayCommand):
    help = "Cramer-Rao bounds for the full and gyro-saturated regimes"

    def add_arguments(self, parser):
        parser.add_argument('--geometry', required=True, help="Geometry JSON file")
        self.add_noise_arguments(parser)
        parser.add_argument('--direction', type=float, nargs=3, default=[1.0, 0.0, 0.0], metavar=('X', 'Y', 'Z'),
                            help="Rotation axis of the sweep")
        parser.add_argument('--min-speed', type=float, default=10.0, help="Sweep start in --units")
        parser.add_argument('--max-speed', type=float, default=10_000.0, help="Sweep end in --units")
        parser.add_argument('--per-decade', type=int, default=20, help="Log-grid points per decade")
        parser.add_argument('--speeds', type=float, nargs='+', default=None,
                            help="Explicit speeds in --units instead of the log grid")
        parser.add_argument('--omega', type=float, nargs=3, default=None, metavar=('X', 'Y', 'Z'),
                            help="Single angular velocity in --units; writes JSON instead of the sweep")
        self.add_units_argument(parser)
        self.add_out_argument(parser, help_text="CSV for the sweep, JSON for --omega (stdout when omitted)")

    def run(self, **options):
        units = self.units(options)
        geom = load_geometry(options['geometry'])
        noise = load_noise(options['noise'], geom, units=units, **self.noise_overrides(options))

        if options['omega'] is not None:
            omega = to_internal(np.asarray(options['omega']), units)
            payload = {'units': units, 'omega': options['omega']}
            for regime in CrbRegime:
                payload[regime.value] = bound_payload(omega, geom, noise, regime, units)
            self.emit_json(payload, options['out'])
            return

        if options['speeds'] is not None:
            speeds = np.asarray(options['speeds'])
            if (speeds < 0).any():
                raise CommandError("Speeds must be non-negative", returncode=EXIT_VALIDATION)
        else:
            speeds = speed_grid(options['min_speed'], options['max_speed'], options['per_decade'])
        if not options['out']:
            raise CommandError("--out is required for a sweep", returncode=EXIT_VALIDATION)

        rows = crb_sweep(geom, noise, options['direction'], to_internal(speeds, units))
        write_crb_sweep(options['out'], rows)
        self.stdout.write(self.style.SUCCESS(f"Wrote {len(speeds)} speeds to {options['out']} (deg/s)"))
