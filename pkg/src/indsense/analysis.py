"""Angle-error curves, their harmonic decomposition and summary metrics.

Harmonic orders are mechanical: electrical order ``k`` of a sensor with
periodicity ``p`` appears at mechanical order ``k p``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import AnalysisError, ParameterError
from .signalchain import SignalFrame, angle_electrical, wrap

ARCSEC = math.pi / (180 * 3600)


@dataclass(frozen=True)
class ErrorCurve:
    angles_mech: np.ndarray
    error: np.ndarray
    p: int = 1

    def __len__(self):
        return self.error.size


def _check_uniform(angles):
    if angles.size < 2:
        return
    d = np.diff(angles)
    if not np.allclose(d, d[0], rtol=1e-9, atol=1e-12) or d[0] == 0:
        raise AnalysisError("angle grid is not uniformly spaced")


def angle_error(frames: SignalFrame, p, *, remove_offset=True):
    """Wrapped mechanical angle error of reconstructed vs true angle.

    The sector ambiguity is resolved against the ground truth, so any grid
    spacing works.  With ``remove_offset`` the constant zero-position offset
    (circular mean) is calibrated out first, as an end-of-line zero
    calibration would.
    """
    if p < 1:
        raise ParameterError("p must be >= 1")
    theta = np.atleast_1d(frames.angle_mech)
    _check_uniform(theta)
    el = angle_electrical(frames.a, frames.b)
    err_el = wrap(el - p * theta)
    if remove_offset:
        offset = float(np.angle(np.mean(np.exp(1j * err_el))))
        err_el = wrap(err_el - offset)
    return ErrorCurve(theta.copy(), wrap(err_el / p), int(p))


@dataclass(frozen=True)
class HarmonicSpectrum:
    """Cosine-series amplitudes: ``e(t) = mean + sum A_k cos(k t + phi_k)``."""

    orders: np.ndarray
    amplitude: np.ndarray
    phase: np.ndarray
    mean: float
    p: int = 1
    n_samples: int = 0

    def amplitude_of(self, order):
        idx = np.nonzero(self.orders == order)[0]
        if idx.size == 0:
            raise AnalysisError(f"order {order} not in spectrum")
        return float(self.amplitude[idx[0]])

    def dominant_order(self):
        return int(self.orders[int(np.argmax(self.amplitude))])

    @property
    def has_nyquist(self):
        return self.n_samples % 2 == 0 and self.orders.size and self.orders[-1] == self.n_samples // 2

    def mean_square(self):
        """Power carried by the listed orders (Parseval)."""
        amp2 = self.amplitude ** 2 / 2
        if self.has_nyquist:
            amp2 = amp2.copy()
            amp2[-1] *= 2
        return self.mean ** 2 + float(np.sum(amp2))

    def synthesize(self, angles):
        t = np.asarray(angles, dtype=float)
        out = np.full(t.shape, self.mean)
        for k, a, ph in zip(self.orders, self.amplitude, self.phase):
            out = out + a * np.cos(k * t + ph)
        return out

    def table(self):
        return [{"order": int(k), "order_electrical": k / self.p,
                 "amplitude_rad": float(a), "amplitude_arcsec": float(a / ARCSEC),
                 "phase_deg": math.degrees(ph)}
                for k, a, ph in zip(self.orders, self.amplitude, self.phase)]


def harmonic_spectrum(curve: ErrorCurve, max_order):
    """DFT of an error curve covering exactly one mechanical revolution."""
    n = len(curve)
    theta = curve.angles_mech
    _check_uniform(theta)
    if n < 2 or not math.isclose(n * (theta[1] - theta[0]), 2 * math.pi, rel_tol=1e-9):
        raise AnalysisError("error curve must cover exactly one revolution")
    if max_order < 1:
        raise AnalysisError("max_order must be >= 1")
    if max_order > n / 2:
        raise AnalysisError(f"max_order {max_order} aliases with {n} samples")
    X = np.fft.rfft(curve.error) / n
    k = np.arange(1, max_order + 1)
    amp = 2 * np.abs(X[k])
    if n % 2 == 0 and max_order == n // 2:
        amp[-1] /= 2
    phase = np.angle(X[k]) - k * theta[0]
    phase = wrap(phase)
    return HarmonicSpectrum(orders=k, amplitude=amp, phase=phase,
                            mean=float(X[0].real), p=curve.p, n_samples=n)


def synthesize_quadrature(distortions, p, samples_per_period=256):
    """Quadrature pair over one revolution with odd/even signal harmonics.

    ``a(x) = cos x + sum eps_k cos(k x + phi_k)``; ``b`` is the same coil
    shifted by a quarter electrical period, ``b(x) = a(x - pi/2)``.
    """
    n = samples_per_period * p
    theta = 2 * math.pi * np.arange(n) / n
    x = p * theta

    def signal(t):
        s = np.cos(t)
        for order, amp, phase in distortions:
            s = s + amp * np.cos(order * t + phase)
        return s

    return SignalFrame(theta, signal(x), signal(x - math.pi / 2))


def predict_error_harmonics(distortions, p, *, samples_per_period=256, max_order=None):
    """Angle-error spectrum produced by relative signal harmonics.

    Evaluated numerically through the same arctan/decomposition path the
    full pipeline uses.  Amplitudes are mechanical radians; multiply by ``p``
    for electrical.
    """
    distortions = [(int(k), float(a), float(ph)) for k, a, ph in distortions]
    for k, a, _ in distortions:
        if abs(a) >= 1:
            raise ParameterError(f"relative amplitude of order {k} must be < 1")
        if k < 0:
            raise ParameterError("harmonic order must be >= 0")
    frames = synthesize_quadrature(distortions, p, samples_per_period)
    curve = angle_error(frames, p)
    if max_order is None:
        max_order = min(len(curve) // 2, 16 * p)
    return harmonic_spectrum(curve, max_order)


def error_metrics(curve: ErrorCurve, max_order=None):
    """Peak-to-peak, peak and rms error plus the per-order table."""
    e = curve.error
    out = {
        "peak_to_peak_deg": math.degrees(float(np.ptp(e))) if e.size else 0.0,
        "peak_abs_deg": math.degrees(float(np.max(np.abs(e)))) if e.size else 0.0,
        "rms_deg": math.degrees(float(np.sqrt(np.mean(e ** 2)))) if e.size else 0.0,
    }
    for key in list(out):
        out[key.replace("_deg", "_arcsec")] = out[key] * 3600
    if max_order is None:
        max_order = len(curve) // 2
    if max_order >= 1 and len(curve) >= 2:
        spec = harmonic_spectrum(curve, max_order)
        out["mean_arcsec"] = spec.mean / ARCSEC
        out["orders"] = spec.table()
        out["dominant_order"] = spec.dominant_order() if np.any(spec.amplitude > 0) else 0
        out["dominant_order_electrical"] = out["dominant_order"] / curve.p
    return out
