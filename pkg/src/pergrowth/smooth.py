"""Polynomial smooth steps used for cutoffs and plateau bumps."""

import numpy as np


def smoothstep7(u):
    """C^3 step: 0 for u <= 0, 1 for u >= 1, u^4 (35 - 84u + 70u^2 - 20u^3) between."""
    u = np.clip(np.asarray(u, dtype=float), 0.0, 1.0)
    return u**4 * (35.0 - 84.0 * u + 70.0 * u**2 - 20.0 * u**3)


def smoothstep7_d1(u):
    u = np.asarray(u, dtype=float)
    v = np.clip(u, 0.0, 1.0)
    return np.where((u > 0.0) & (u < 1.0), 140.0 * v**3 * (1.0 - v) ** 3, 0.0)


def smoothstep7_d2(u):
    u = np.asarray(u, dtype=float)
    v = np.clip(u, 0.0, 1.0)
    return np.where((u > 0.0) & (u < 1.0), 420.0 * v**2 * (1.0 - v) ** 2 * (1.0 - 2.0 * v), 0.0)


SMOOTHSTEP7_MAX_SLOPE = 2.1875


def plateau(s, half, width):
    """Even cutoff: 1 on |s| <= half, 0 on |s| >= half + width.

    Returns value and first two derivatives with respect to s.
    """
    s = np.asarray(s, dtype=float)
    u = (np.abs(s) - half) / width
    sign = np.sign(s)
    val = 1.0 - smoothstep7(u)
    d1 = -smoothstep7_d1(u) / width * sign
    d2 = -smoothstep7_d2(u) / width**2
    return val, d1, d2
