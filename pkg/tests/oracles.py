"""Independent reference implementations used to check the package.

Nothing here imports the code under test.
"""
import math

import numpy as np
from scipy.special import ellipe, ellipk

MU0 = 4e-7 * math.pi


def coaxial_mutual(r1, r2, d):
    """Maxwell's formula for two coaxial circular filaments (H)."""
    k2 = 4 * r1 * r2 / ((r1 + r2) ** 2 + d ** 2)
    k = math.sqrt(k2)
    return MU0 * math.sqrt(r1 * r2) * ((2 / k - k) * ellipk(k2) - 2 / k * ellipe(k2))


def circle_self(r, a):
    """Thin circular loop of radius r, conductor GMD a."""
    return MU0 * r * (math.log(8 * r / a) - 2)


def skin_depth(f, sigma, mu_r=1.0):
    return 1.0 / math.sqrt(math.pi * f * MU0 * mu_r * sigma)


def harmonic_by_projection(theta, err, order):
    """Amplitude and phase of cos(order*theta + phase) by direct summation."""
    c = 2 * np.mean(err * np.cos(order * theta))
    s = 2 * np.mean(err * np.sin(order * theta))
    return math.hypot(c, s), math.atan2(-s, c)


def distorted_error(distortions, p, samples_per_period=512):
    """Brute-force angle error of a signal pair carrying relative harmonics.

    Returns mechanical angles and the electrical-radian error, zero-mean.
    """
    n = samples_per_period * p
    theta = 2 * math.pi * np.arange(n) / n
    x = p * theta
    a = np.cos(x)
    b = np.sin(x)
    for k, eps, ph in distortions:
        a = a + eps * np.cos(k * x + ph)
        b = b + eps * np.cos(k * (x - math.pi / 2) + ph)
    est = np.arctan2(b, a)
    err = np.angle(np.exp(1j * (est - x)))
    return theta, err - np.mean(err)


def uniform_angles(n):
    return 2 * math.pi * np.arange(n) / n


ARCSEC = math.pi / (180 * 3600)
