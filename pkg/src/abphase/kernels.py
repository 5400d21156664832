"""Smooth stand-ins for the Heaviside step and Dirac delta.

The kernels are Gaussian: ``delta`` is a normalized Gaussian of width
``eps``, ``step`` its error-function antiderivative and ``delta_prime`` its
analytic derivative.  All three are truncated beyond ``CUTOFF * eps`` so that
"zero outside the support" holds exactly; the Gaussian tail there is below
1e-14 so the derivative chain is unaffected at any tolerance we test.
"""

import math

import numpy as np
from scipy.special import erfc

CUTOFF = 8.0

_SQRT2 = math.sqrt(2.0)
_SQRT2PI = math.sqrt(2.0 * math.pi)


def step(u, eps):
    """Smoothed Heaviside step with ``step(0) == 0.5``."""
    u = np.asarray(u, dtype=float)
    # built from the tail on both sides so step(u) + step(-u) == 1 exactly
    tail = 0.5 * erfc(np.abs(u) / (eps * _SQRT2))
    s = np.where(u >= 0, 1.0 - tail, tail)
    s = np.where(u > CUTOFF * eps, 1.0, s)
    s = np.where(u < -CUTOFF * eps, 0.0, s)
    return s[()] if s.ndim == 0 else s


def delta(u, eps):
    """Gaussian nascent delta, the exact derivative of :func:`step`."""
    u = np.asarray(u, dtype=float)
    d = np.exp(-0.5 * (u / eps) ** 2) / (eps * _SQRT2PI)
    d = np.where(np.abs(u) > CUTOFF * eps, 0.0, d)
    return d[()] if d.ndim == 0 else d


def delta_prime(u, eps):
    """Derivative of :func:`delta` with respect to ``u``."""
    u = np.asarray(u, dtype=float)
    return -u / eps**2 * delta(u, eps)


def delta_second(u, eps):
    # needed for second time derivatives of the sources
    u = np.asarray(u, dtype=float)
    return (u**2 / eps**4 - 1.0 / eps**2) * delta(u, eps)


def window(u, a, b, eps):
    """Smoothed indicator of ``a < u < b``: ``step(u - a) - step(u - b)``."""
    return step(np.subtract(u, a), eps) - step(np.subtract(u, b), eps)


def window_d(u, a, b, eps):
    return delta(np.subtract(u, a), eps) - delta(np.subtract(u, b), eps)


def window_dd(u, a, b, eps):
    return delta_prime(np.subtract(u, a), eps) - delta_prime(np.subtract(u, b), eps)


def window_ddd(u, a, b, eps):
    return delta_second(np.subtract(u, a), eps) - delta_second(np.subtract(u, b), eps)
