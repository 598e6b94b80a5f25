from ._core import *  # noqa: F401,F403
from ._core import SpectralField

import numpy as np


def field(coeffs=None, *, cos=None, sin=None, n_modes=None):
    """Build a field from coefficients c_{-n..n}, or from dicts {k: amplitude} of cosines and sines."""
    if coeffs is not None:
        return SpectralField.from_coeffs(np.asarray(coeffs, dtype=complex))
    cos = cos or {}
    sin = sin or {}
    n = n_modes or max([*cos, *sin, 0])
    f = SpectralField(n)
    for k in set(cos) | set(sin):
        f.set(k, 0.5 * cos.get(k, 0.0) - 0.5j * sin.get(k, 0.0))
    return f
