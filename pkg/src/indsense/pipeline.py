"""End-to-end evaluation: geometry -> tank -> sweep -> signal chain -> error."""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .analysis import ErrorCurve, HarmonicSpectrum, angle_error, harmonic_spectrum
from .circuit import LcDesign, resistance_at_temperature, T_REF
from .emsolver import make_drive, sweep_rotation
from .errors import ParameterError
from .geometry import RxShapeSpec, SensorGeometry, TargetSpec, TxCoilSpec, build_geometry
from .signalchain import (DEFAULT_CALIBRATION_PHASE, CompensationParams, SignalFrame, agc,
                          compensate, demodulate_sweep, fit_compensation)

OBJECTIVES = ("peak_to_peak", "H_4p", "weighted")


@dataclass(frozen=True)
class SensorDesign:
    tx: TxCoilSpec
    rx: RxShapeSpec
    target: TargetSpec
    V_tx: float = 20.0
    R_tx: float = 2.0
    f0_target: float = 5e6
    e_series: str = "E12"
    T_op: float = T_REF
    calibration_phase: float = DEFAULT_CALIBRATION_PHASE

    @property
    def p(self):
        return self.rx.p

    def validate(self):
        self.tx.validate()
        self.rx.validate()
        self.target.validate()
        if self.target.p != self.rx.p:
            raise ParameterError("target wing count must equal the RX periodicity")
        if not self.V_tx > 0:
            raise ParameterError("V_tx must be > 0")
        if self.R_tx < 0:
            raise ParameterError("R_tx must be >= 0")

    def geometry(self) -> SensorGeometry:
        self.validate()
        return build_geometry(self.tx, self.rx)

    def R_operating(self):
        return resistance_at_temperature(self.R_tx, self.T_op)

    def drive(self, geometry=None, *, backend=None) -> LcDesign:
        geometry = geometry or self.geometry()
        return make_drive(geometry, self.V_tx, self.R_operating(), self.f0_target,
                          self.e_series, backend=backend)


@dataclass(frozen=True)
class SweepResult:
    design: SensorDesign
    drive: LcDesign
    solutions: list
    raw: SignalFrame
    frames: SignalFrame
    compensation: CompensationParams | None
    gain: float
    curve: ErrorCurve

    @property
    def V(self):
        return np.array([s.V_rx for s in self.solutions])

    def transfer_ratio(self):
        return float(np.max(np.abs(self.V))) / self.drive.V_tx


def revolution(count, start=0.0):
    return start + 2 * math.pi * np.arange(count) / count


def process_frames(raw: SignalFrame, p, *, compensate_signals=True):
    """AGC, optional Heydemann compensation, then the error curve."""
    params = None
    frames = raw
    if compensate_signals:
        params = fit_compensation(frames)
        frames = compensate(frames, params)
    gain = agc(frames)
    frames = frames.scaled(gain)
    return frames, params, gain, angle_error(frames, p)


def spans_electrical_period(angles, p, min_frames=8):
    """True when a uniform sweep has enough points around one electrical period
    to fit the Lissajous ellipse."""
    angles = np.asarray(angles, dtype=float)
    if angles.size < min_frames:
        return False
    step = abs(angles[1] - angles[0])
    return angles.size * step >= 2 * math.pi / p * (1 - 1e-9)


def run_sweep(design: SensorDesign, angles, *, compensate_signals=True, threads=1,
              backend=None, geometry=None, drive=None):
    geometry = geometry or design.geometry()
    drive = drive or design.drive(geometry, backend=backend)
    sols = sweep_rotation(geometry, design.target, angles, drive, threads=threads,
                          backend=backend)
    raw = demodulate_sweep(sols, design.calibration_phase)
    frames, params, gain, curve = process_frames(raw, design.p,
                                                 compensate_signals=compensate_signals)
    return SweepResult(design, drive, sols, raw, frames, params, gain, curve)


def periodic_error_curve(design: SensorDesign, points_per_period, *, threads=1, backend=None,
                         geometry=None, drive=None):
    """Error over one revolution from a sweep of one electrical period.

    Valid for a centred rotor, whose response repeats every ``2 pi / p``.
    """
    if any(design.target.center_offset):
        raise ParameterError("periodic sweep needs a centred target")
    p = design.p
    angles = 2 * math.pi / p * np.arange(points_per_period) / points_per_period
    res = run_sweep(design, angles, threads=threads, backend=backend, geometry=geometry,
                    drive=drive)
    n = points_per_period * p
    curve = ErrorCurve(revolution(n), np.tile(res.curve.error, p), p)
    return res, curve


def objective_value(spectrum: HarmonicSpectrum, curve: ErrorCurve, objective, weight=0.5):
    """Scalar design score in radians (mechanical)."""
    if objective == "peak_to_peak":
        return float(np.ptp(curve.error))
    h = spectrum.amplitude_of(4 * spectrum.p)
    if objective == "H_4p":
        return h
    if objective == "weighted":
        return weight * float(np.ptp(curve.error)) + (1 - weight) * h
    raise ParameterError(f"unknown objective {objective!r}; choose from {OBJECTIVES}")


def evaluate_design(design: SensorDesign, objective="H_4p", points_per_period=24, *,
                    threads=1, backend=None):
    _, curve = periodic_error_curve(design, points_per_period, threads=threads,
                                    backend=backend)
    spec = harmonic_spectrum(curve, min(len(curve) // 2, 8 * design.p))
    return objective_value(spec, curve, objective)


def with_air_gap(design: SensorDesign, air_gap):
    return replace(design, target=replace(design.target, air_gap=air_gap))
