"""
Angular acceleration tensor estimate of a measurement, written as JSON.

Usage:
    python manage.py tensor --geometry cube.json --measurement y.csv --out tensor.json
"""

from apps.core.management.base import InertialArrayCommand
from apps.geometry.forms import load_geometry
from apps.signal_model.measurements import read_measurement
from apps.tensor_baseline.tensor import tensor_method


class Command(InertialArrayCommand):
    help = "Estimate (s, dw, w) with the angular acceleration tensor method"

    def add_arguments(self, parser):
        parser.add_argument('--geometry', required=True, help="Geometry JSON file")
        parser.add_argument('--measurement', required=True, help="Measurement CSV file")
        self.add_units_argument(parser)
        self.add_out_argument(parser, help_text="Tensor estimate JSON (stdout when omitted)")

    def run(self, **options):
        geom = load_geometry(options['geometry'])
        result = tensor_method(read_measurement(options['measurement'], geom), geom)
        self.emit_json(result.as_dict(self.units(options)), options['out'])
        if result.low_confidence:
            self.stderr.write(self.style.WARNING("Sign anchor component is zero; signs are low confidence"))
