"""
Signal Model Forms

Validates motion-state and noise JSON files.

File formats:
    state: {"omega": [..], "omega_dot": [..], "specific_force": [..]}
           omega in the boundary angular unit (deg/s by default), omega_dot
           in unit/s, specific_force in m/s^2.
    noise: {"accel_noise": 0.01, "accel_noise_interpretation": "variance",
            "gyro_noise": 1.0}
           or {"covariance": [[...], ...]} in SI units (rad/s for gyros).

Forms:
- StateForm: Motion state payload.
- NoiseForm: Noise payload, iid blocks or full covariance.
"""

import numpy as np
from django import forms
from django.conf import settings

from apps.core.exceptions import InertialArrayError
from apps.core.files import read_json
from apps.core.units import RADIANS, UNIT_CHOICES, to_internal
from .measurements import MotionState, NoiseModel

INTERPRETATION_CHOICES = [
    ('variance', 'Value is sigma_s^2 in (m/s^2)^2'),
    ('std', 'Value is sigma_s in m/s^2'),
]


def _triple(raw, label):
    try:
        vector = np.asarray(raw, dtype=float).reshape(-1)
    except (TypeError, ValueError):
        raise forms.ValidationError(f"{label} must be three numbers")
    if vector.shape != (3,) or not np.all(np.isfinite(vector)):
        raise forms.ValidationError(f"{label} must be three finite numbers")
    return vector


class UnitsFormMixin:
    """Stores the boundary angular unit passed in by the caller."""

    def __init__(self, *args, units=None, **kwargs):
        self.units = units or settings.INERTIAL_ARRAY['DEFAULT_UNITS']
        if self.units not in UNIT_CHOICES:
            raise ValueError(f"Unknown units '{self.units}'")
        super().__init__(*args, **kwargs)


class StateForm(UnitsFormMixin, forms.Form):
    """
    Form for a motion state.

    Validation:
        - omega is required; omega_dot and specific_force default to zero.
        - Every vector must hold three finite numbers.
    """
    omega = forms.JSONField()
    omega_dot = forms.JSONField(required=False)
    specific_force = forms.JSONField(required=False)

    def clean_omega(self):
        return _triple(self.cleaned_data.get('omega'), 'omega')

    def clean_omega_dot(self):
        raw = self.cleaned_data.get('omega_dot')
        return np.zeros(3) if raw is None else _triple(raw, 'omega_dot')

    def clean_specific_force(self):
        raw = self.cleaned_data.get('specific_force')
        return np.zeros(3) if raw is None else _triple(raw, 'specific_force')

    def to_state(self):
        """Return the MotionState in SI units."""
        if not self.is_valid():
            raise InertialArrayError(f"Invalid state: {self.errors.as_text()}")
        data = self.cleaned_data
        return MotionState(
            omega=to_internal(data['omega'], self.units),
            omega_dot=to_internal(data['omega_dot'], self.units),
            specific_force=data['specific_force'],
        )


class NoiseForm(UnitsFormMixin, forms.Form):
    """
    Form for the measurement noise.

    Validation:
        - accel_noise and gyro_noise must be positive (defaults from settings).
        - covariance, when given, overrides the iid parameters and must be square.
    """
    accel_noise = forms.FloatField(required=False)
    accel_noise_interpretation = forms.ChoiceField(choices=INTERPRETATION_CHOICES, required=False)
    gyro_noise = forms.FloatField(required=False)
    covariance = forms.JSONField(required=False)

    def clean_accel_noise(self):
        value = self.cleaned_data.get('accel_noise')
        if value is None:
            value = settings.INERTIAL_ARRAY['ACCEL_NOISE']
        if not value > 0:
            raise forms.ValidationError("Accelerometer noise must be positive")
        return value

    def clean_accel_noise_interpretation(self):
        return self.cleaned_data.get('accel_noise_interpretation') or \
            settings.INERTIAL_ARRAY['ACCEL_NOISE_INTERPRETATION']

    def clean_gyro_noise(self):
        """Gyro standard deviation in the boundary unit; settings default is in deg/s."""
        value = self.cleaned_data.get('gyro_noise')
        if value is None:
            default_dps = settings.INERTIAL_ARRAY['GYRO_NOISE_STD_DPS']
            value = default_dps if self.units != RADIANS else float(np.deg2rad(default_dps))
        if not value > 0:
            raise forms.ValidationError("Gyro noise must be positive")
        return value

    def clean_covariance(self):
        raw = self.cleaned_data.get('covariance')
        if raw is None:
            return None
        try:
            matrix = np.asarray(raw, dtype=float)
        except (TypeError, ValueError):
            raise forms.ValidationError("Covariance must be a numeric matrix")
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise forms.ValidationError("Covariance must be a square matrix")
        return matrix

    @property
    def sigma_s2(self):
        value = self.cleaned_data['accel_noise']
        if self.cleaned_data['accel_noise_interpretation'] == 'std':
            return value ** 2
        return value

    @property
    def sigma_omega2(self):
        return float(to_internal(self.cleaned_data['gyro_noise'], self.units)) ** 2

    def to_noise(self, geom):
        """
        Return the NoiseModel for a geometry.

        Raises:
            NoiseModelError / DimensionError: Covariance invalid or wrong size.
        """
        if not self.is_valid():
            raise InertialArrayError(f"Invalid noise: {self.errors.as_text()}")
        covariance = self.cleaned_data['covariance']
        if covariance is not None:
            return NoiseModel(covariance).check_dimensions(geom)
        return NoiseModel.iid_blocks(self.sigma_s2, self.sigma_omega2, geom)


def _validated(form):
    if not form.is_valid():
        raise forms.ValidationError(form.errors.as_text())
    return form


def load_state(path, units=None):
    """Read and validate a motion-state JSON file."""
    return _validated(StateForm(data=read_json(path), units=units)).to_state()


def noise_form(payload=None, units=None, **overrides):
    """
    Build a validated NoiseForm from a payload plus non-None overrides.

    Overrides take the form field names (accel_noise, gyro_noise, ...).
    """
    data = dict(payload or {})
    data.update({key: value for key, value in overrides.items() if value is not None})
    return _validated(NoiseForm(data=data, units=units))


def load_noise(path, geom, units=None, **overrides):
    """Read a noise JSON file (or defaults when path is None) into a NoiseModel."""
    payload = read_json(path) if path else {}
    return noise_form(payload, units=units, **overrides).to_noise(geom)
