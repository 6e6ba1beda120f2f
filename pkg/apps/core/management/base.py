"""
Management Command Base

Shared flags and error handling for the inertial array commands.

Exit codes:
- 0: Success.
- 2: Invalid input, geometry, dimensions or an unidentifiable model.
- 3: Missing, unreadable, unwritable or malformed file.
- 4: The solver did not converge or hit a singular information matrix.

Classes:
- InertialArrayCommand: BaseCommand with the mapping above and helpers.
"""

import logging

from django.conf import settings
from django.core.exceptions import ValidationError
from django.core.management.base import BaseCommand, CommandError

from apps.core.exceptions import EstimationError, InertialArrayError, InputFileError
from apps.core.files import dumps_json, write_json
from apps.core.units import UNIT_CHOICES

logger = logging.getLogger(__name__)

EXIT_VALIDATION = 2
EXIT_IO = 3
EXIT_NON_CONVERGENCE = 4


class NonConvergenceError(CommandError):
    """Raised by commands that finished but whose solver did not converge."""

    def __init__(self, message):
        super().__init__(message, returncode=EXIT_NON_CONVERGENCE)


class InertialArrayCommand(BaseCommand):
    """
    Base class for the commands.

    Subclasses implement run(**options) instead of handle(); exceptions from
    the apps are translated into CommandError with the exit codes above.
    """

    def handle(self, *args, **options):
        try:
            return self.run(*args, **options)
        except CommandError:
            raise
        except InputFileError as exc:
            raise CommandError(str(exc), returncode=EXIT_IO) from exc
        except EstimationError as exc:
            raise CommandError(str(exc), returncode=EXIT_NON_CONVERGENCE) from exc
        except ValidationError as exc:
            raise CommandError('; '.join(exc.messages), returncode=EXIT_VALIDATION) from exc
        except (InertialArrayError, ValueError) as exc:
            raise CommandError(str(exc), returncode=EXIT_VALIDATION) from exc

    def run(self, *args, **options):
        raise NotImplementedError('subclasses of InertialArrayCommand must provide a run() method')

    # Shared arguments

    def add_units_argument(self, parser):
        parser.add_argument(
            '--units', choices=UNIT_CHOICES, default=None,
            help="Angular unit of files and flags (default: settings DEFAULT_UNITS)",
        )

    def add_noise_arguments(self, parser):
        parser.add_argument('--noise', default=None, help="Noise JSON file (defaults from settings)")
        parser.add_argument('--sigma-s2', type=float, default=None,
                            help="Accelerometer noise, a variance unless --accel-noise-interpretation std")
        parser.add_argument('--accel-noise-interpretation', choices=['variance', 'std'], default=None)
        parser.add_argument('--sigma-omega', type=float, default=None,
                            help="Gyro noise standard deviation in --units")

    def add_out_argument(self, parser, required=False, help_text="Output file"):
        parser.add_argument('--out', required=required, default=None, help=help_text)

    # Helpers

    def units(self, options):
        return options.get('units') or settings.INERTIAL_ARRAY['DEFAULT_UNITS']

    def noise_overrides(self, options):
        return {
            'accel_noise': options.get('sigma_s2'),
            'accel_noise_interpretation': options.get('accel_noise_interpretation'),
            'gyro_noise': options.get('sigma_omega'),
        }

    def emit_json(self, payload, out=None):
        """Write payload to --out, or to stdout when no file is given."""
        if out:
            write_json(out, payload)
            self.stdout.write(self.style.SUCCESS(f"Wrote {out}"))
        else:
            self.stdout.write(dumps_json(payload))
