import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from indsense import kernels
from indsense.geometry import circular_loop

needs_numba = pytest.mark.skipif(not kernels.HAVE_NUMBA, reason="numba not installed")


def _brute(a0, a1, b0, b1, n=400):
    """Midpoint double sum with n sub-points per segment (slow, independent)."""
    t = (np.arange(n) + 0.5) / n
    total = 0.0
    for i in range(len(a0)):
        da = a1[i] - a0[i]
        pa = a0[i] + t[:, None] * da
        for j in range(len(b0)):
            db = b1[j] - b0[j]
            pb = b0[j] + t[:, None] * db
            r = np.linalg.norm(pa[:, None] - pb[None], axis=2)
            total += np.dot(da, db) * np.mean(1.0 / r)
    return total


def test_against_brute_force_double_sum():
    a = circular_loop(10e-3, 12)
    b = circular_loop(8e-3, 12, z=3e-3)
    a0, a1 = a.segments()
    b0, b1 = b.segments()
    for backend in ("numpy",) + (("numba",) if kernels.HAVE_NUMBA else ()):
        s, _ = kernels.segment_sum(a0, a1, b0, b1, backend=backend)
        assert s == pytest.approx(_brute(a0, a1, b0, b1), rel=1e-4)


@needs_numba
@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**31 - 1), skip=st.booleans(), soft=st.sampled_from([0.0, 1e-4]))
def test_numba_matches_numpy(seed, skip, soft):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(3, 40))
    a0 = rng.normal(size=(n, 3)) * 1e-2
    a1 = a0 + rng.normal(size=(n, 3)) * 2e-3
    b0 = rng.normal(size=(n, 3)) * 1e-2 + [0, 0, 5e-3]
    b1 = b0 + rng.normal(size=(n, 3)) * 2e-3
    if skip:
        b0, b1 = a0, a1
    s_np, d_np = kernels.segment_sum(a0, a1, b0, b1, skip, backend="numpy", soft=soft)
    s_nb, d_nb = kernels.segment_sum(a0, a1, b0, b1, skip, backend="numba", soft=soft)
    if math.isinf(s_np):
        assert math.isinf(s_nb)
        return
    scale = _abs_scale(a0, a1, b0, b1)
    assert abs(s_np - s_nb) <= 1e-12 * scale
    assert d_np == pytest.approx(d_nb, rel=1e-12)


def _abs_scale(a0, a1, b0, b1):
    da, db = a1 - a0, b1 - b0
    r = np.linalg.norm((a0 + da / 2)[:, None] - (b0 + db / 2)[None], axis=2)
    return float(np.sum(np.abs(da @ db.T) / np.maximum(r, 1e-9)))


def test_touching_segments_are_infinite():
    a0 = np.array([[0.0, 0, 0]])
    a1 = np.array([[1.0, 0, 0]])
    for backend in ("numpy",) + (("numba",) if kernels.HAVE_NUMBA else ()):
        s, d = kernels.segment_sum(a0, a1, a0, a1, backend=backend)
        assert math.isinf(s) and d == 0.0


def test_perpendicular_segments_contribute_nothing():
    a0 = np.array([[0.0, 0, 0]])
    a1 = np.array([[1.0, 0, 0]])
    b0 = np.array([[0.0, 1, 0]])
    b1 = np.array([[0.0, 2, 0]])
    assert kernels.segment_sum(a0, a1, b0, b1, backend="numpy")[0] == 0.0


def test_unknown_backend():
    z = np.zeros((1, 3))
    with pytest.raises(ValueError):
        kernels.segment_sum(z, z + 1, z, z + 1, backend="cuda")


def test_softened_diagonal_matches_partial_inductance():
    # splitting a straight wire must not change its softened self term
    g = 1e-4
    n = 16
    pts = np.linspace(0, 1e-2, n + 1)[:, None] * [1.0, 0.0, 0.0]
    s, _ = kernels.segment_sum(pts[:-1], pts[1:], pts[:-1], pts[1:], skip_diagonal=True,
                               soft=g, backend="numpy")
    diag = kernels.straight_self_inductance(np.full(n, 1e-2 / n), g).sum()
    whole = kernels.straight_self_inductance(1e-2, g)
    assert 1e-7 * s + diag == pytest.approx(whole, rel=1e-3)


def test_straight_self_inductance_long_wire_limit():
    length, g = 1.0, 1e-4
    # leading terms of the exact expression for length >> g
    expected = 2e-7 * length * (math.log(2 * length / g) - 1 + g / length)
    assert kernels.straight_self_inductance(length, g) == pytest.approx(expected, rel=1e-8)
