"""
Angular unit conversion at the file and CLI boundary.

Everything inside the apps works in rad/s (and rad/s^2); degrees only appear
when reading or writing user-facing files and flags.
"""

import numpy as np

DEGREES = 'deg'
RADIANS = 'rad'
UNIT_CHOICES = (DEGREES, RADIANS)


def _check(units):
    if units not in UNIT_CHOICES:
        raise ValueError(f"Unknown angular unit '{units}', expected one of {UNIT_CHOICES}")


def to_internal(value, units):
    """
    Convert an angular quantity from the boundary unit to radians.

    Args:
        value (float or array-like): Angle, rate or angular acceleration.
        units (str): 'deg' or 'rad'.

    Returns:
        float or np.ndarray: Value in radians (same shape as the input).
    """
    _check(units)
    if units == DEGREES:
        return np.deg2rad(value)
    return np.asarray(value, dtype=float) if np.ndim(value) else float(value)


def to_external(value, units):
    """Inverse of to_internal."""
    _check(units)
    if units == DEGREES:
        return np.rad2deg(value)
    return np.asarray(value, dtype=float) if np.ndim(value) else float(value)
