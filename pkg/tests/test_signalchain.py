import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from indsense.analysis import angle_error
from indsense.errors import (DegenerateInputError, InsufficientDataError, ParameterError,
                             TrackingLossError, UndefinedAngleError)
from indsense.pipeline import run_sweep, with_air_gap
from indsense.signalchain import (CompensationParams, SignalFrame, add_noise, agc,
                                  angle_electrical, clarke, compensate, demodulate,
                                  demodulate_sweep, distort, electrical_to_mechanical,
                                  fit_compensation, reference_phase, wrap)

import oracles


def _circle(n=64, p=1, radius=1.0):
    theta = oracles.uniform_angles(n)
    return SignalFrame(theta, radius * np.cos(p * theta), radius * np.sin(p * theta))


def test_demodulation_projects_onto_reference():
    v = 0.3 * np.exp(1j * 0.7)
    assert demodulate(v, 0.7) == pytest.approx(0.3, rel=1e-15)
    assert demodulate(v, 0.7 + math.pi / 2) == pytest.approx(0.0, abs=1e-15)
    assert demodulate(v, 0.7 + math.pi) == pytest.approx(-0.3, rel=1e-15)


def test_reference_phase_follows_tank_current():
    assert reference_phase(1j, 0.0) == pytest.approx(math.pi / 2)
    assert reference_phase(1.0) == pytest.approx(-math.pi / 2)


def test_demodulate_sweep_empty():
    with pytest.raises(DegenerateInputError):
        demodulate_sweep([])


class TestClarke:
    def test_balanced_set(self):
        x = np.linspace(0, 2 * math.pi, 50)
        u, v, w = (np.cos(x - k * 2 * math.pi / 3) for k in range(3))
        a, b = clarke(u, v, w)
        assert np.allclose(a, np.cos(x), atol=1e-12)
        assert np.allclose(b, np.sin(x), atol=1e-12)

    def test_common_mode_rejected(self):
        a, b = clarke(0.4, 0.4, 0.4)
        assert a == pytest.approx(0.0, abs=1e-15) and b == pytest.approx(0.0, abs=1e-15)

    @settings(max_examples=50)
    @given(u=st.floats(-1, 1), v=st.floats(-1, 1), w=st.floats(-1, 1), c=st.floats(-10, 10))
    def test_common_mode_property(self, u, v, w, c):
        a0, b0 = clarke(u, v, w)
        a1, b1 = clarke(u + c, v + c, w + c)
        assert abs(a1 - a0) < 1e-12 * max(1, abs(c)) and abs(b1 - b0) < 1e-12 * max(1, abs(c))


class TestAgc:
    def test_normalises_peak_radius(self):
        frames = _circle(radius=3.5e-2)
        g = agc(frames)
        assert np.max(frames.scaled(g).radius) == pytest.approx(1.0, rel=1e-15)

    def test_all_zero(self):
        with pytest.raises(DegenerateInputError):
            agc(SignalFrame(np.zeros(3), np.zeros(3), np.zeros(3)))

    def test_frames_validate(self):
        with pytest.raises(ParameterError):
            SignalFrame([0.0], [np.nan], [0.0])
        with pytest.raises(ParameterError):
            SignalFrame([0.0, 1.0], [0.0], [0.0])


class TestCompensation:
    params = CompensationParams(offset_a=0.02, offset_b=-0.01, gain_ratio=1.05,
                                orthogonality_error=math.radians(2))

    def test_round_trip(self):
        frames = _circle()
        back = compensate(distort(frames, self.params), self.params)
        assert np.allclose(back.a, frames.a, atol=1e-12)
        assert np.allclose(back.b, frames.b, atol=1e-12)

    def test_fit_recovers_parameters(self):
        fit = fit_compensation(distort(_circle(), self.params))
        assert fit.offset_a == pytest.approx(0.02, abs=1e-6)
        assert fit.offset_b == pytest.approx(-0.01, abs=1e-6)
        assert fit.gain_ratio == pytest.approx(1.05, abs=1e-6)
        assert fit.orthogonality_error == pytest.approx(math.radians(2), abs=1e-6)

    @settings(max_examples=50, deadline=None)
    @given(oa=st.floats(-0.2, 0.2), ob=st.floats(-0.2, 0.2), g=st.floats(0.7, 1.4),
           e=st.floats(-0.3, 0.3), r=st.floats(1e-3, 1e3))
    def test_fit_inverts_any_distortion(self, oa, ob, g, e, r):
        p = CompensationParams(oa * r, ob * r, g, e)
        frames = _circle(48, radius=r)
        fixed = compensate(distort(frames, p), fit_compensation(distort(frames, p)))
        assert np.allclose(fixed.a, frames.a, atol=1e-8 * r)
        assert np.allclose(fixed.b, frames.b, atol=1e-8 * r)

    def test_too_few_frames(self):
        theta = oracles.uniform_angles(5)
        with pytest.raises(InsufficientDataError):
            fit_compensation(SignalFrame(theta, np.cos(theta), np.sin(theta)))

    def test_degenerate_frames(self):
        n = 16
        with pytest.raises(InsufficientDataError):
            fit_compensation(SignalFrame(np.arange(n), np.ones(n), np.ones(n)))
        line = np.linspace(-1, 1, n)
        with pytest.raises(InsufficientDataError):
            fit_compensation(SignalFrame(np.arange(n), line, 2 * line))

    def test_invalid_params(self):
        with pytest.raises(ParameterError):
            CompensationParams(gain_ratio=0.0)
        with pytest.raises(ParameterError):
            CompensationParams(orthogonality_error=math.pi / 2)

    def test_compensation_reduces_error_on_sample_sweep(self, coarse_design, coarse_geometry,
                                                        coarse_drive):
        angles = 2 * math.pi / 5 * np.arange(24) / 24
        res = run_sweep(coarse_design, angles, geometry=coarse_geometry, drive=coarse_drive,
                        compensate_signals=False)
        scale = np.max(res.raw.radius)
        # front-end imperfections on top of the solved signals
        front = CompensationParams(0.01 * scale, -0.008 * scale, 1.03, math.radians(1.0))
        raw = distort(res.raw, front)
        before = angle_error(raw, 5)
        after = angle_error(compensate(raw, fit_compensation(raw)), 5)
        assert np.max(np.abs(after.error)) < np.max(np.abs(before.error))
        assert np.max(np.abs(after.error)) < 1.1 * np.max(np.abs(res.curve.error))


class TestAngle:
    def test_quadrants(self):
        got = angle_electrical([1, 0, -1, 0, 1], [0, 1, 0, -1, -1])
        assert got == pytest.approx([0, math.pi / 2, math.pi, 3 * math.pi / 2, 7 * math.pi / 4])

    def test_range(self):
        got = angle_electrical([1.0, 1.0], [-0.0, -1e-300])
        assert np.all((got >= 0) & (got < 2 * math.pi))

    @settings(max_examples=50)
    @given(x=st.floats(0, 2 * math.pi), g=st.floats(1e-6, 1e6))
    def test_gain_invariance(self, x, g):
        a, b = math.cos(x), math.sin(x)
        ref = float(angle_electrical(a, b))
        got = float(angle_electrical(g * a, g * b))
        assert abs(wrap(got - ref)) < 1e-12

    def test_undefined(self):
        with pytest.raises(UndefinedAngleError):
            angle_electrical(0.0, 0.0)

    @settings(max_examples=100)
    @given(x=st.floats(-100, 100))
    def test_wrap_range(self, x):
        y = float(wrap(x))
        assert -math.pi < y <= math.pi
        assert math.isclose(math.cos(y), math.cos(x), abs_tol=1e-9)


class TestTracking:
    def test_sawtooth_unwraps_to_a_ramp(self):
        p = 5
        theta = oracles.uniform_angles(200)
        el = angle_electrical(np.cos(p * theta), np.sin(p * theta))
        assert np.allclose(electrical_to_mechanical(el, p), theta, atol=1e-12)

    def test_p1_identity(self):
        theta = np.linspace(0, 2 * math.pi, 40, endpoint=False)
        assert np.allclose(electrical_to_mechanical(theta, 1), theta, atol=1e-12)

    def test_reversal(self):
        p = 4
        theta = np.concatenate([np.linspace(0, 3, 80), np.linspace(3, -1, 100)[1:]])
        el = angle_electrical(np.cos(p * theta), np.sin(p * theta))
        assert np.allclose(electrical_to_mechanical(el, p), theta, atol=1e-12)

    def test_large_step_loses_track(self):
        el = np.array([0.0, 0.1, 0.1 + 0.95 * math.pi])
        with pytest.raises(TrackingLossError):
            electrical_to_mechanical(el, 3)

    def test_invalid_p(self):
        with pytest.raises(ParameterError):
            electrical_to_mechanical([0.0], 0)

    @settings(max_examples=50, deadline=None)
    @given(p=st.integers(1, 12), start=st.floats(-3, 3), step=st.floats(-0.1, 0.1),
           n=st.integers(2, 300))
    def test_tracks_any_slow_motion(self, p, start, step, n):
        assume(abs(step) * p < 0.8 * math.pi)
        theta = start + step * np.arange(n)
        el = angle_electrical(np.cos(p * theta), np.sin(p * theta))
        sector = round((p * theta[0] - el[0]) / (2 * math.pi))
        got = electrical_to_mechanical(el, p, initial_sector=sector)
        assert np.allclose(got, theta, atol=1e-9)


def test_noise_is_seeded_and_scaled():
    frames = _circle(4000)
    a = add_noise(frames, 1e-3, seed=1)
    b = add_noise(frames, 1e-3, seed=1)
    assert np.array_equal(a.a, b.a)
    assert np.std(a.a - frames.a) == pytest.approx(1e-3, rel=0.05)
    wide = add_noise(frames, 1e-3, seed=1, bandwidth=20e3)
    assert np.std(wide.a - frames.a) == pytest.approx(2e-3, rel=0.05)


class TestSampleSignals:
    def test_lissajous_is_nearly_a_circle(self, coarse_periodic):
        res, _ = coarse_periodic
        r = res.raw.radius
        assert (r.max() - r.min()) / r.mean() < 0.02

    def test_signals_follow_cosine_and_sine(self, coarse_periodic):
        res, _ = coarse_periodic
        x = 5 * res.raw.angle_mech
        A = np.mean(res.raw.radius)
        # a = -A cos(p theta), b = -A sin(p theta) with the default calibration
        assert np.max(np.abs(res.raw.a + A * np.cos(x))) < 0.02 * A
        assert np.max(np.abs(res.raw.b + A * np.sin(x))) < 0.02 * A

    def test_agc_equalises_air_gaps(self, coarse_design, coarse_geometry, coarse_drive):
        angles = 2 * math.pi / 5 * np.arange(12) / 12
        near = run_sweep(coarse_design, angles, geometry=coarse_geometry, drive=coarse_drive)
        far = run_sweep(with_air_gap(coarse_design, 2e-3), angles, geometry=coarse_geometry,
                        drive=coarse_drive)
        assert far.gain > 1.5 * near.gain
        assert np.max(near.frames.radius) == pytest.approx(1.0, rel=1e-12)
        assert np.max(far.frames.radius) == pytest.approx(1.0, rel=1e-12)
