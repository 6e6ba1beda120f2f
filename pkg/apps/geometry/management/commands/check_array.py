"""
Identifiability verdicts for one or more geometry files.

Usage:
    python manage.py check_array --geometry planar.json --geometry cube.json --out verdicts.json
"""

from django.core.management.base import CommandError

from apps.core.management.base import EXIT_VALIDATION, InertialArrayCommand
from apps.geometry.arrays import check_identifiability
from apps.geometry.forms import load_geometry


class Command(InertialArrayCommand):
    help = "Check whether arrays identify (w, dw, s) and support the tensor method"

    def add_arguments(self, parser):
        parser.add_argument('--geometry', action='append', required=True,
                            help="Geometry JSON file (repeatable)")
        parser.add_argument('--strict', action='store_true',
                            help="Exit with code 2 when any array is not identifiable")
        self.add_out_argument(parser, help_text="Verdict JSON (stdout when omitted)")

    def run(self, **options):
        verdicts = []
        for path in options['geometry']:
            geom = load_geometry(path)
            verdict = check_identifiability(geom)
            verdicts.append({'geometry': path, **verdict.as_dict()})
            if not verdict.identifiable:
                self.stderr.write(self.style.WARNING(f"{path}: {verdict.reason.label}"))

        self.emit_json(verdicts, options['out'])
        rejected = [entry['geometry'] for entry in verdicts if not entry['identifiable']]
        if rejected and options['strict']:
            raise CommandError(f"Not identifiable: {', '.join(rejected)}", returncode=EXIT_VALIDATION)
