"""Standard normal functions and tail-accurate differences."""

import math

import numpy as np
from scipy import special

SQRT_2PI = math.sqrt(2.0 * math.pi)


def norm_pdf(x):
    x = np.asarray(x, dtype=float)
    return np.exp(-0.5 * x * x) / SQRT_2PI


def norm_cdf(x):
    """Phi(x) through scipy's erfc-based ndtr, accurate in the lower tail."""
    return special.ndtr(np.asarray(x, dtype=float))


def norm_sf(x):
    """1 - Phi(x) without cancellation in the upper tail."""
    return special.ndtr(-np.asarray(x, dtype=float))


def norm_cdf_diff(a, b):
    """
    Phi(a) - Phi(b), elementwise.

    When both arguments are positive the difference is taken between upper
    tail probabilities, so that differences far out in the upper tail keep
    their relative precision instead of cancelling against 1.
    """
    a, b = np.broadcast_arrays(np.asarray(a, dtype=float), np.asarray(b, dtype=float))
    upper = (a > 0) & (b > 0)
    lower_form = special.ndtr(a) - special.ndtr(b)
    upper_form = norm_sf(b) - norm_sf(a)
    return np.where(upper, upper_form, lower_form)
