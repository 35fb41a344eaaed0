# Core modules
from numbers import Number

# Third party modules
import numpy as np

# Local modules
from .exceptions import InvalidParameterError


def is_number(value):
    return coerce_number(value) is not None


def coerce_number(value):
    """
    Accept ints and floats (not booleans) and numeric strings, which
    YAML produces for exponents written without a decimal point
    (e.g. 25e-6).
    """

    if isinstance(value, bool):
        return None
    if isinstance(value, Number):
        return value
    if isinstance(value, str):
        try:
            return float(value)
        except ValueError:
            return None

    return None


def frequency_grid(start, stop, points):
    """
    Linearly spaced frequencies, both ends included
    """

    if not 0 < start <= stop or points < 1:
        raise InvalidParameterError(
            'needs 0 < start <= stop and at least one point',
            key='frequency grid'
        )

    return np.linspace(start, stop, int(points))
