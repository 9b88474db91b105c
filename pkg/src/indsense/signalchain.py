"""Behavioural model of the sensor ASIC signal path.

Works on phasors: synchronous demodulation is a projection onto a reference
phase, the AGC a static normalisation.  A ``SignalFrame`` carries either one
sample or equal-length arrays of samples.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (DegenerateInputError, InsufficientDataError, ParameterError,
                     TrackingLossError, UndefinedAngleError)

TWO_PI = 2 * math.pi
# The induced EMF lags the tank current by 90 degrees.
DEFAULT_CALIBRATION_PHASE = -math.pi / 2
# Demodulator bandwidth around the carrier; only used by the noise utility.
DEFAULT_BANDWIDTH = 5e3


@dataclass(frozen=True)
class SignalFrame:
    angle_mech: np.ndarray
    a: np.ndarray
    b: np.ndarray

    def __post_init__(self):
        for name in ("angle_mech", "a", "b"):
            v = np.asarray(getattr(self, name), dtype=float)
            if not np.all(np.isfinite(v)):
                raise ParameterError(f"SignalFrame.{name} must be finite")
            object.__setattr__(self, name, v)
        if not (self.a.shape == self.b.shape == self.angle_mech.shape):
            raise ParameterError("SignalFrame fields must share one shape")

    def __len__(self):
        return self.a.size

    @property
    def radius(self):
        return np.hypot(self.a, self.b)

    def scaled(self, gain):
        return SignalFrame(self.angle_mech, self.a * gain, self.b * gain)


@dataclass(frozen=True)
class CompensationParams:
    """Forward distortion model, applied to an ideal pair ``(a, b)``::

        a' = a + offset_a
        b' = gain_ratio * (b cos(e) + a sin(e)) + offset_b

    with ``e`` the orthogonality error.
    """

    offset_a: float = 0.0
    offset_b: float = 0.0
    gain_ratio: float = 1.0
    orthogonality_error: float = 0.0

    def __post_init__(self):
        if not self.gain_ratio > 0:
            raise ParameterError("gain_ratio must be > 0")
        if not abs(self.orthogonality_error) < math.pi / 2:
            raise ParameterError("|orthogonality_error| must be < pi/2")


def reference_phase(I_lc, calibration=DEFAULT_CALIBRATION_PHASE):
    """Demodulation reference: tank current phase plus a calibration offset."""
    return float(np.angle(I_lc)) + calibration


def demodulate(v_rx, reference_phase):
    """In-phase component ``Re(v e^{-j ref})``."""
    return np.real(np.asarray(v_rx) * np.exp(-1j * reference_phase))


def clarke(u, v, w):
    """Amplitude-invariant Clarke transform of a three-phase set."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    w = np.asarray(w, dtype=float)
    a = (2.0 / 3.0) * (u - 0.5 * (v + w))
    b = (2.0 / 3.0) * (math.sqrt(3) / 2) * (v - w)
    return a, b


def demodulate_sweep(solutions, calibration=DEFAULT_CALIBRATION_PHASE):
    """Turn coupling solutions into raw (a, b) frames.

    Two phases map directly to (a, b); three phases go through ``clarke``.
    """
    if not solutions:
        raise DegenerateInputError("empty sweep")
    V = np.array([s.V_rx for s in solutions])
    ref = reference_phase(solutions[0].I_lc, calibration)
    sig = demodulate(V, ref)
    angles = np.array([s.angle for s in solutions])
    if sig.shape[1] == 2:
        return SignalFrame(angles, sig[:, 0], sig[:, 1])
    if sig.shape[1] == 3:
        a, b = clarke(sig[:, 0], sig[:, 1], sig[:, 2])
        return SignalFrame(angles, a, b)
    raise ParameterError("expected 2 or 3 receiver phases")


def agc(frames: SignalFrame):
    """Static gain mapping the largest signal radius to 1."""
    peak = float(np.max(frames.radius)) if len(frames) else 0.0
    if peak == 0.0:
        raise DegenerateInputError("all-zero frames: gain undefined")
    return 1.0 / peak


def distort(frames: SignalFrame, params: CompensationParams):
    e = params.orthogonality_error
    a = frames.a + params.offset_a
    b = params.gain_ratio * (frames.b * math.cos(e) + frames.a * math.sin(e)) + params.offset_b
    return SignalFrame(frames.angle_mech, a, b)


def compensate(frames: SignalFrame, params: CompensationParams):
    """Undo ``distort``: remove offsets, rescale b, shear back to orthogonal."""
    e = params.orthogonality_error
    a = frames.a - params.offset_a
    s = (frames.b - params.offset_b) / params.gain_ratio
    b = (s - a * math.sin(e)) / math.cos(e)
    return SignalFrame(frames.angle_mech, a, b)


def fit_compensation(frames: SignalFrame, min_frames=8):
    """Least-squares conic fit of the Lissajous ellipse (Heydemann correction).

    Raises
    ------
    InsufficientDataError
        Fewer than ``min_frames`` samples, a rank-deficient design matrix, or
        a conic that is not an ellipse.
    """
    x = np.ravel(frames.a)
    y = np.ravel(frames.b)
    if x.size < min_frames:
        raise InsufficientDataError(f"need at least {min_frames} frames, got {x.size}")
    mx, my = x.mean(), y.mean()
    scale = math.sqrt(np.mean((x - mx) ** 2 + (y - my) ** 2))
    if scale == 0.0:
        raise InsufficientDataError("frames do not span an ellipse")
    u = (x - mx) / scale
    v = (y - my) / scale
    D = np.column_stack([u * u, u * v, v * v, u, v, np.ones_like(u)])
    _, sv, vt = np.linalg.svd(D, full_matrices=False)
    if sv[-2] < 1e-9 * sv[0]:
        raise InsufficientDataError("rank-deficient conic fit")
    coef = vt[-1] if vt[-1][0] >= 0 else -vt[-1]   # the null vector's sign is arbitrary
    A, B, C, Du, Ev, _ = coef
    if 4 * A * C - B * B <= 0:
        raise InsufficientDataError("fitted conic is not an ellipse")
    u0, v0 = np.linalg.solve([[2 * A, B], [B, 2 * C]], [-Du, -Ev])
    gain = math.sqrt(A / C)
    sin_e = -B / (2 * math.sqrt(A * C))
    return CompensationParams(offset_a=float(mx + scale * u0),
                              offset_b=float(my + scale * v0),
                              gain_ratio=gain,
                              orthogonality_error=math.asin(sin_e))


def angle_electrical(a, b):
    """``atan2(b, a)`` mapped to ``[0, 2 pi)``."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if np.any((a == 0.0) & (b == 0.0)):
        raise UndefinedAngleError("angle undefined at a = b = 0")
    phi = np.arctan2(b, a)
    phi = np.where(phi < 0.0, phi + TWO_PI, phi)
    # -0.0 and rounding of tiny negatives can land exactly on 2 pi
    return np.where(phi >= TWO_PI, 0.0, phi)


def wrap(x):
    """Map angles to ``(-pi, pi]``."""
    y = np.mod(np.asarray(x, dtype=float) + math.pi, TWO_PI) - math.pi
    return np.where(y == -math.pi, math.pi, y)


def electrical_to_mechanical(angle_el, p, initial_sector=0, max_step=0.9 * math.pi):
    """Unwrap a sequence of electrical angles into mechanical angles.

    The sector counter moves whenever the electrical angle wraps.  Steps
    whose wrapped size reaches ``max_step`` (electrical) are ambiguous in
    direction and abort tracking.
    """
    if p < 1:
        raise ParameterError("p must be >= 1")
    el = np.atleast_1d(np.asarray(angle_el, dtype=float))
    sector = int(initial_sector)
    out = np.empty_like(el)
    for i, phi in enumerate(el):
        if i:
            step = phi - el[i - 1]
            wrapped = float(wrap(step))
            if abs(wrapped) >= max_step:
                raise TrackingLossError(
                    f"step {math.degrees(wrapped):.3g} deg electrical at sample {i} "
                    "exceeds the tracking range")
            if step - wrapped > math.pi:
                sector -= 1
            elif wrapped - step > math.pi:
                sector += 1
        out[i] = (phi + TWO_PI * sector) / p
    return out


def add_noise(frames: SignalFrame, sigma, seed=0, bandwidth=DEFAULT_BANDWIDTH,
              reference_bandwidth=DEFAULT_BANDWIDTH):
    """Gaussian noise on (a, b), rms ``sigma`` scaled by sqrt(bandwidth ratio)."""
    rng = np.random.default_rng(seed)
    s = sigma * math.sqrt(bandwidth / reference_bandwidth)
    return SignalFrame(frames.angle_mech,
                       frames.a + rng.normal(0.0, s, frames.a.shape),
                       frames.b + rng.normal(0.0, s, frames.b.shape))
