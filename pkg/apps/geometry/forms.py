"""
Geometry Forms

Validates geometry JSON files before they become ArrayGeometry objects.

File format:
    {"accel_positions_m": [[x, y, z], ...], "n_gyro_triads": k, "gyro_saturation_dps": g}

Forms:
- GeometryForm: Field validation plus conversion to ArrayGeometry.
- PresetGeometryForm: Reference arrays by name (planar_square, cube).

Functions:
- geometry_from_payload: Either form, chosen by the "preset" key.
- load_geometry: Read + validate a geometry file.
"""

import numpy as np
from django import forms
from django.conf import settings

from apps.core.exceptions import GeometryError
from apps.core.files import read_json
from .arrays import ArrayGeometry, cube_array, planar_square_array


class GeometryForm(forms.Form):
    """
    Form for a geometry payload.

    Validation:
        - accel_positions_m must be a list of finite 3-vectors (may be empty).
        - n_gyro_triads is a non-negative integer.
        - gyro_saturation_dps is positive; defaults to settings when omitted.
        - At least one sensor triad overall.
    """
    accel_positions_m = forms.JSONField(required=False)
    n_gyro_triads = forms.IntegerField(min_value=0, required=False)
    gyro_saturation_dps = forms.FloatField(required=False)

    def clean_accel_positions_m(self):
        """
        Check the shape and finiteness of the position list.

        Returns:
            np.ndarray: (N_s, 3) positions in meters.

        Raises:
            ValidationError: On ragged, non-numeric or non-finite entries.
        """
        raw = self.cleaned_data.get('accel_positions_m')
        if raw in (None, ''):
            return np.zeros((0, 3))
        try:
            positions = np.asarray(raw, dtype=float)
        except (TypeError, ValueError):
            raise forms.ValidationError("Positions must be numeric [x, y, z] triples")
        if positions.size == 0:
            return np.zeros((0, 3))
        if positions.ndim != 2 or positions.shape[1] != 3:
            raise forms.ValidationError("Positions must be a list of [x, y, z] triples")
        if not np.all(np.isfinite(positions)):
            raise forms.ValidationError("Positions must be finite")
        return positions

    def clean_n_gyro_triads(self):
        value = self.cleaned_data.get('n_gyro_triads')
        return 0 if value is None else value

    def clean_gyro_saturation_dps(self):
        """Default to settings and reject non-positive ranges."""
        value = self.cleaned_data.get('gyro_saturation_dps')
        if value is None:
            value = settings.INERTIAL_ARRAY['GYRO_SATURATION_DPS']
        if not value > 0:
            raise forms.ValidationError("Gyro saturation must be positive")
        return value

    def clean(self):
        """Require at least one sensor triad in total."""
        cleaned_data = super().clean()
        positions = cleaned_data.get('accel_positions_m')
        n_gyro = cleaned_data.get('n_gyro_triads')
        if positions is not None and n_gyro is not None and len(positions) + n_gyro == 0:
            raise forms.ValidationError("The array must contain at least one sensor triad")
        return cleaned_data

    def to_geometry(self):
        """
        Build the validated ArrayGeometry (saturation converted to rad/s).

        Raises:
            GeometryError: If called on an invalid form.
        """
        if not self.is_valid():
            raise GeometryError(f"Invalid geometry: {self.errors.as_text()}")
        data = self.cleaned_data
        return ArrayGeometry(
            accel_positions=data['accel_positions_m'],
            n_gyro_triads=data['n_gyro_triads'],
            gyro_saturation=np.deg2rad(data['gyro_saturation_dps']),
        )


def geometry_payload(geom):
    """Serialise an ArrayGeometry into the file format."""
    return {
        'accel_positions_m': geom.accel_positions.tolist(),
        'n_gyro_triads': geom.n_gyro_triads,
        'gyro_saturation_dps': float(np.rad2deg(geom.gyro_saturation)),
    }



class PresetGeometryForm(forms.Form):
    """
    Form for a reference array by name.

    Payload:
        {"preset": "planar_square", "alpha": 0.01, "n_per_side": 2, "n_gyro_triads": 4}
        {"preset": "cube", "edge": 0.01, "n_gyro_triads": 6}
    """
    PRESET_CHOICES = [
        ('planar_square', 'Centred square grid in the xy-plane'),
        ('cube', 'Face centres of a cube'),
    ]

    preset = forms.ChoiceField(choices=PRESET_CHOICES)
    alpha = forms.FloatField(required=False)
    n_per_side = forms.IntegerField(min_value=2, required=False)
    edge = forms.FloatField(required=False)
    n_gyro_triads = forms.IntegerField(min_value=0, required=False)
    gyro_saturation_dps = forms.FloatField(required=False)

    def clean_alpha(self):
        value = self.cleaned_data.get('alpha')
        if value is not None and not value > 0:
            raise forms.ValidationError("Grid spacing must be positive")
        return value

    def clean_edge(self):
        value = self.cleaned_data.get('edge')
        if value is not None and not value > 0:
            raise forms.ValidationError("Cube edge must be positive")
        return value

    def clean_gyro_saturation_dps(self):
        value = self.cleaned_data.get('gyro_saturation_dps')
        if value is None:
            value = settings.INERTIAL_ARRAY['GYRO_SATURATION_DPS']
        if not value > 0:
            raise forms.ValidationError("Gyro saturation must be positive")
        return value

    def to_geometry(self):
        if not self.is_valid():
            raise GeometryError(f"Invalid geometry preset: {self.errors.as_text()}")
        data = self.cleaned_data
        options = {'gyro_saturation': np.deg2rad(data['gyro_saturation_dps'])}
        if data['n_gyro_triads'] is not None:
            options['n_gyro_triads'] = data['n_gyro_triads']
        if data['preset'] == 'cube':
            if data['edge'] is not None:
                options['edge'] = data['edge']
            return cube_array(**options)
        if data['alpha'] is not None:
            options['alpha'] = data['alpha']
        if data['n_per_side'] is not None:
            options['n_per_side'] = data['n_per_side']
        return planar_square_array(**options)


def geometry_from_payload(payload):
    """
    Validate a geometry payload, explicit or preset, into an ArrayGeometry.

    Raises:
        ValidationError: Content fails form validation.
    """
    if not isinstance(payload, dict):
        raise forms.ValidationError("Geometry must be a JSON object")
    form_class = PresetGeometryForm if 'preset' in payload else GeometryForm
    form = form_class(data=payload)
    if not form.is_valid():
        raise forms.ValidationError(form.errors.as_text())
    return form.to_geometry()


def load_geometry(path):
    """
    Read and validate a geometry JSON file.

    Raises:
        InputFileError: Missing or malformed file.
        ValidationError: Content fails validation.
    """
    return geometry_from_payload(read_json(path))
