"""
Monte Carlo Forms

Validates scenario JSON files.

File format (angular values in the scenario's units, deg by default):
    {
      "name": "planar_inplane",
      "units": "deg",
      "geometry": {"preset": "planar_square", ...} or {"accel_positions_m": [...], ...},
      "noise": {"accel_noise": 0.01, "gyro_noise": 1.0},
      "direction": [1, 0, 0],
      "speeds": [500, 1000] or "speed_range": {"min": 10, "max": 10000, "per_decade": 20},
      "omega_dot": [0, 0, 0], "specific_force": [0, 0, 0],
      "n_runs": 10000, "seed": 0, "threads": 1,
      "methods": ["ml", "gyro_average"],
      "position_perturbation_std_m": 0.0
    }

Forms:
- ScenarioForm: Validation plus conversion to McScenario.

Functions:
- load_scenario: Read + validate a scenario file.
- resolve_scenario_path: Shipped scenario names to files under scenarios/.
"""

from pathlib import Path

import numpy as np
from django import forms
from django.conf import settings

from apps.core.exceptions import InertialArrayError
from apps.core.files import read_json
from apps.core.units import UNIT_CHOICES, to_internal
from apps.crb.bounds import speed_grid
from apps.estimator.options import SolverOptions
from apps.geometry.forms import geometry_from_payload
from apps.signal_model.forms import noise_form
from .harness import McMethod, McScenario

DEFAULT_SPEED_RANGE = {'min': 10.0, 'max': 10_000.0, 'per_decade': 20}
SCENARIO_DIR = Path(__file__).resolve().parent / 'scenarios'


def _vector(raw, label, nonzero=False):
    try:
        vector = np.asarray(raw, dtype=float).reshape(-1)
    except (TypeError, ValueError):
        raise forms.ValidationError(f"{label} must be three numbers")
    if vector.shape != (3,) or not np.all(np.isfinite(vector)):
        raise forms.ValidationError(f"{label} must be three finite numbers")
    if nonzero and not np.linalg.norm(vector) > 0:
        raise forms.ValidationError(f"{label} must not be the zero vector")
    return vector


class ScenarioForm(forms.Form):
    """
    Form for a Monte Carlo scenario.

    Validation:
        - geometry is required (explicit positions or a preset).
        - direction is a non-zero 3-vector.
        - Either speeds or speed_range; neither means 10..10^4 deg/s, 20 per decade.
        - methods are a non-empty subset of ml, tensor, gyro_average.
        - n_runs, seed and threads default to the MC_DEFAULT_* settings.
    """
    name = forms.CharField(required=False, max_length=200)
    units = forms.ChoiceField(choices=[(unit, unit) for unit in UNIT_CHOICES], required=False)
    geometry = forms.JSONField()
    noise = forms.JSONField(required=False)
    direction = forms.JSONField()
    speeds = forms.JSONField(required=False)
    speed_range = forms.JSONField(required=False)
    omega_dot = forms.JSONField(required=False)
    specific_force = forms.JSONField(required=False)
    n_runs = forms.IntegerField(min_value=1, required=False)
    seed = forms.IntegerField(min_value=0, required=False)
    threads = forms.IntegerField(min_value=1, required=False)
    methods = forms.JSONField(required=False)
    position_perturbation_std_m = forms.FloatField(min_value=0.0, required=False)

    def clean_units(self):
        return self.cleaned_data.get('units') or settings.INERTIAL_ARRAY['DEFAULT_UNITS']

    def clean_geometry(self):
        return geometry_from_payload(self.cleaned_data.get('geometry'))

    def clean_noise(self):
        payload = self.cleaned_data.get('noise')
        if payload is None:
            return {}
        if not isinstance(payload, dict):
            raise forms.ValidationError("noise must be a JSON object")
        return payload

    def clean_direction(self):
        return _vector(self.cleaned_data.get('direction'), 'direction', nonzero=True)

    def clean_speeds(self):
        raw = self.cleaned_data.get('speeds')
        if raw is None:
            return None
        try:
            speeds = np.atleast_1d(np.asarray(raw, dtype=float))
        except (TypeError, ValueError):
            raise forms.ValidationError("speeds must be a list of numbers")
        if speeds.ndim != 1 or not np.all(np.isfinite(speeds)) or np.any(speeds < 0):
            raise forms.ValidationError("speeds must be finite and non-negative")
        return speeds

    def clean_speed_range(self):
        """Expand {"min", "max", "per_decade"} into a log-spaced grid."""
        raw = self.cleaned_data.get('speed_range')
        if raw is None:
            return None
        if not isinstance(raw, dict) or not {'min', 'max'} <= set(raw):
            raise forms.ValidationError("speed_range needs 'min' and 'max'")
        try:
            return speed_grid(float(raw['min']), float(raw['max']), int(raw.get('per_decade', 20)))
        except (TypeError, ValueError) as exc:
            raise forms.ValidationError(f"Invalid speed_range: {exc}")

    def clean_omega_dot(self):
        raw = self.cleaned_data.get('omega_dot')
        return np.zeros(3) if raw is None else _vector(raw, 'omega_dot')

    def clean_specific_force(self):
        raw = self.cleaned_data.get('specific_force')
        return np.zeros(3) if raw is None else _vector(raw, 'specific_force')

    def clean_methods(self):
        raw = self.cleaned_data.get('methods')
        if raw is None:
            return (McMethod.ML,)
        if isinstance(raw, str) or not isinstance(raw, list) or not raw:
            raise forms.ValidationError("methods must be a non-empty list")
        unknown = [method for method in raw if method not in McMethod.values]
        if unknown:
            raise forms.ValidationError(f"Unknown method(s): {', '.join(map(str, unknown))}")
        return tuple(McMethod(method) for method in raw)

    def clean_position_perturbation_std_m(self):
        value = self.cleaned_data.get('position_perturbation_std_m')
        return 0.0 if value is None else value

    def clean(self):
        """Reject a scenario that gives both speeds and speed_range."""
        cleaned_data = super().clean()
        if cleaned_data.get('speeds') is not None and cleaned_data.get('speed_range') is not None:
            raise forms.ValidationError("Give either speeds or speed_range, not both")
        config = settings.INERTIAL_ARRAY
        for key, setting in (('n_runs', 'MC_DEFAULT_RUNS'), ('seed', 'MC_DEFAULT_SEED'),
                             ('threads', 'MC_DEFAULT_THREADS')):
            if cleaned_data.get(key) is None and key not in self.errors:
                cleaned_data[key] = config[setting]
        return cleaned_data

    def to_scenario(self, payload=None, opts=None, **overrides):
        """
        Build the McScenario, applying non-None overrides of n_runs, seed and threads.

        Raises:
            InertialArrayError: If called on an invalid form.
            ValidationError / DimensionError: The noise block does not fit the geometry.
        """
        if not self.is_valid():
            raise InertialArrayError(f"Invalid scenario: {self.errors.as_text()}")
        data = dict(self.cleaned_data)
        data.update({key: value for key, value in overrides.items() if value is not None})
        units = data['units']
        geom = data['geometry']
        noise = noise_form(data['noise'], units=units).to_noise(geom)

        speeds = data['speeds'] if data['speeds'] is not None else data['speed_range']
        if speeds is None:
            speeds = speed_grid(DEFAULT_SPEED_RANGE['min'], DEFAULT_SPEED_RANGE['max'],
                                DEFAULT_SPEED_RANGE['per_decade'])

        return McScenario(
            geom=geom,
            noise=noise,
            direction=data['direction'],
            speeds=to_internal(speeds, units),
            n_runs=data['n_runs'],
            master_seed=data['seed'],
            methods=data['methods'],
            position_perturbation_std=data['position_perturbation_std_m'],
            omega_dot=to_internal(data['omega_dot'], units),
            specific_force=data['specific_force'],
            threads=data['threads'],
            name=data['name'],
            opts=opts or SolverOptions.from_settings(),
            payload=dict(payload or {}),
        )


def load_scenario(path, opts=None, **overrides):
    """
    Read and validate a scenario JSON file.

    The scenario name defaults to the file stem.

    Raises:
        InputFileError: Missing or malformed file.
        ValidationError: Content fails ScenarioForm validation.
    """
    payload = read_json(path)
    if not isinstance(payload, dict):
        raise forms.ValidationError("A scenario must be a JSON object")
    form = ScenarioForm(data=payload)
    if not form.is_valid():
        raise forms.ValidationError(form.errors.as_text())
    if not form.cleaned_data['name']:
        form.cleaned_data['name'] = Path(path).stem
    return form.to_scenario(payload=payload, opts=opts, **overrides)


def resolve_scenario_path(value):
    """
    Map a shipped scenario name (e.g. 'planar_inplane') to its file.

    Anything that is not a shipped name is returned as a Path unchanged.
    """
    path = Path(value)
    shipped = SCENARIO_DIR / f"{path.stem}.json"
    if not path.exists() and path.parent == Path('.') and shipped.exists():
        return shipped
    return path
