"""Numerically stable scalar/array helpers used by the bound envelopes."""

import numpy as np

SERIES_THRESHOLD = 1e-10


def log2cosh(x):
    """log(2 cosh x) evaluated as |x| + log1p(exp(-2|x|))."""
    ax = np.abs(x)
    return ax + np.log1p(np.exp(-2.0 * ax))


def dls_deficit(u):
    """Return 1 - (1 - exp(-u))/u, the Dyson-Lieb-Simon correction.

    Below ``SERIES_THRESHOLD`` the two-term series u/2 - u^2/6 is used.
    """
    u = float(u)
    if u < SERIES_THRESHOLD:
        return u / 2.0 - u * u / 6.0
    return 1.0 + np.expm1(-u) / u


def tanh_deficit(x):
    """Return 1 - tanh(x)/x, with the series x^2/3 for tiny x."""
    x = float(x)
    if x < SERIES_THRESHOLD:
        return x * x / 3.0
    return 1.0 - np.tanh(x) / x


def fb_argument(beta, b):
    """The Falk-Bruch argument u = 2 beta b tanh(beta b)."""
    return 2.0 * beta * b * np.tanh(beta * b)


def lower_correction(beta, b):
    """Correction subtracted inside the lower envelopes (Phi_L, Psi_L)."""
    return dls_deficit(fb_argument(beta, b))


def upper_correction(beta, b):
    """Per-unit-overlap correction of the upper envelopes: 1 - tanh(bb)/bb."""
    return tanh_deficit(beta * b)


def logcosh_strip(beta, b):
    """Distance from the real axis to the nearest complex singularity of
    w -> log 2cosh(beta*sqrt(w^2 + b^2)).

    Quadrature rules are clustered on this scale around the point where the
    integrand bends.
    """
    return float(np.hypot(b, np.pi / (2.0 * beta)))
