"""The C^1 cubic cutoff eta and its derivative.

eta is 1 left of -1, 0 right of 1 and the cubic x^3/4 - 3x/4 + 1/2 between,
so eta(x) + eta(-x) = 1 and eta' is even.
"""
import numpy as np


def eta(x):
    x = np.asarray(x, dtype=float)
    xc = np.clip(x, -1.0, 1.0)
    out = 0.25 * xc ** 3 - 0.75 * xc + 0.5
    out = np.where(x <= -1.0, 1.0, np.where(x >= 1.0, 0.0, out))
    return out[()] if out.ndim == 0 else out


def eta_prime(x):
    x = np.asarray(x, dtype=float)
    out = np.where(np.abs(x) <= 1.0, 0.75 * x * x - 0.75, 0.0)
    return out[()] if out.ndim == 0 else out


# int_0^1 eta = int_{-1}^0 (1 - eta) = 3/16
ETA_HALF_INTEGRAL = 3.0 / 16.0
