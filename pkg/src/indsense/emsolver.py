"""Quasi-static coupled-circuit solver for TX, target eddy loops and RX.

Inductances come from the Neumann formula over filament polylines.  Each
target wing carries one (or ``n_sub``) closed eddy loop whose resistance is
the skin-limited surface resistance ``1/(sigma delta)`` over an effective
strip width.  The TX windings share one series current set by the tank; RX
windings are open-circuit and only sense.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import kernels
from .circuit import LcDesign, Material, design_lc, skin_depth
from .errors import ParameterError, SingularConfigurationError, SolverError
from .geometry import (RECT_GMD_FACTOR, FilamentLoop, SensorGeometry, TargetSpec,
                       make_target, rx_lobe, target_strip_width, _z_ref)

MU0_4PI = 1e-7
MIN_DISTANCE = 1e-6           # m, closest allowed approach of two filaments
SKIN_WIDTH_CAP = 10.0         # effective eddy strip width cap, in skin depths
CONDITION_LIMIT = 1e14


def _check_distance(min_dist, total, limit):
    if not np.isfinite(total) or min_dist < limit:
        raise SingularConfigurationError(
            f"filaments overlap (closest approach {min_dist:.3g} m < {limit:.3g} m)")


def mutual_inductance(a: FilamentLoop, b: FilamentLoop, *, min_distance=MIN_DISTANCE,
                      backend=None):
    """Mutual inductance (H) of two distinct closed filaments.

    The result is the average of the two one-sided quadratures, so swapping
    the arguments returns the identical float.
    """
    a0, a1 = a.segments()
    b0, b1 = b.segments()
    sab, dab = kernels.segment_sum(a0, a1, b0, b1, backend=backend)
    sba, dba = kernels.segment_sum(b0, b1, a0, a1, backend=backend)
    _check_distance(min(dab, dba), sab + sba, min_distance)
    return MU0_4PI * 0.5 * (sab + sba)


def self_inductance(loop: FilamentLoop, wire_radius, *, backend=None):
    """Self-inductance (H) of a closed filament with an equivalent wire radius.

    Every segment pair, the diagonal included, integrates the kernel
    ``1/sqrt(r^2 + g^2)`` with ``g = wire_radius``; on the diagonal this is
    the partial inductance of a straight conductor with that geometric mean
    distance.
    """
    if not wire_radius > 0:
        raise ParameterError("wire_radius must be > 0")
    p0, p1 = loop.segments()
    s, _ = kernels.segment_sum(p0, p1, p0, p1, skip_diagonal=True, backend=backend,
                               soft=wire_radius)
    if not np.isfinite(s):
        raise SingularConfigurationError("loop intersects itself")
    lengths = np.linalg.norm(p1 - p0, axis=1)
    return MU0_4PI * s + float(np.sum(kernels.straight_self_inductance(lengths, wire_radius)))


def loop_resistance(loop: FilamentLoop, material: Material, f, conductor_width):
    """Skin-limited resistance ``perimeter / (sigma delta w)`` (ohm)."""
    if not conductor_width > 0:
        raise ParameterError("conductor_width must be > 0")
    d = skin_depth(f, material)
    return loop.perimeter / (material.sigma * d * conductor_width)


def target_effective_width(spec: TargetSpec, f):
    d = skin_depth(f, spec.material)
    return min(target_strip_width(spec), SKIN_WIDTH_CAP * d)


def target_wire_radius(spec: TargetSpec, f):
    d = skin_depth(f, spec.material)
    return RECT_GMD_FACTOR * (target_effective_width(spec, f) + d)


def tx_inductance(geometry: SensorGeometry, *, backend=None):
    """Series inductance of all TX windings (H)."""
    tx = geometry.tx
    if not tx:
        raise ParameterError("geometry has no TX windings")
    radius = geometry.tx_spec.wire_radius
    total = sum(self_inductance(w, radius, backend=backend) for w in tx)
    for i in range(len(tx)):
        for j in range(i + 1, len(tx)):
            total += 2 * mutual_inductance(tx[i], tx[j], backend=backend)
    return total


def _tx_coupling(geometry, loop, backend):
    return sum(mutual_inductance(w, loop, backend=backend) for w in geometry.tx)


def _rx_coupling(geometry, loop, backend):
    """Coupling of ``loop`` to each RX phase (series windings summed)."""
    return np.array([sum(mutual_inductance(w, loop, backend=backend) for w in phase)
                     for phase in geometry.rx])


@dataclass(frozen=True)
class LoopCircuit:
    """Inductance model of one sensor pose.

    Unknown 0 is the series TX current, unknowns ``1..`` the target loops.
    ``M`` covers those unknowns; ``M_rx`` holds the coupling of each RX phase
    to them.  RX windings carry no current, so their own inductances are not
    needed.
    """

    loops: tuple
    self_L: np.ndarray
    R: np.ndarray
    M: np.ndarray
    M_rx: np.ndarray
    f0: float
    angle: float = 0.0

    @property
    def n_target(self):
        return self.M.shape[0] - 1


@dataclass(frozen=True)
class _StaticPart:
    L_tx: float
    M_rx_tx: np.ndarray


def _static_part(geometry, backend):
    L_tx = tx_inductance(geometry, backend=backend)
    M_rx_tx = np.zeros(len(geometry.rx))
    for w in geometry.tx:
        M_rx_tx = M_rx_tx + _rx_coupling(geometry, w, backend)
    return _StaticPart(L_tx, M_rx_tx)


def assemble(geometry: SensorGeometry, target: TargetSpec | None, f0, *,
             R_tx=0.0, backend=None, _static=None):
    """Build the inductance/resistance model at one target pose."""
    if not f0 > 0:
        raise ParameterError("f0 must be > 0")
    static = _static if _static is not None else _static_part(geometry, backend)
    t_loops = make_target(target, _z_ref(geometry)) if target is not None else []
    n = 1 + len(t_loops)
    M = np.zeros((n, n))
    M[0, 0] = static.L_tx
    R = np.zeros(n)
    R[0] = R_tx
    M_rx = np.zeros((len(geometry.rx), n))
    M_rx[:, 0] = static.M_rx_tx
    if t_loops:
        radius = target_wire_radius(target, f0)
        width = target_effective_width(target, f0)
        for k, loop in enumerate(t_loops, start=1):
            M[k, k] = self_inductance(loop, radius, backend=backend)
            R[k] = loop_resistance(loop, target.material, f0, width)
            M[0, k] = M[k, 0] = _tx_coupling(geometry, loop, backend)
            M_rx[:, k] = _rx_coupling(geometry, loop, backend)
            for j in range(1, k):
                M[j, k] = M[k, j] = mutual_inductance(t_loops[j - 1], loop, backend=backend)
    angle = target.angle if target is not None else 0.0
    return LoopCircuit(loops=tuple(geometry.tx) + tuple(t_loops), self_L=np.diag(M).copy(),
                       R=R, M=M, M_rx=M_rx, f0=float(f0), angle=angle)


@dataclass(frozen=True)
class CouplingSolution:
    angle: float
    V_rx: np.ndarray
    I_target: np.ndarray
    I_lc: complex
    f0: float
    target_power: float


def solve_coupling(circuit: LoopCircuit, drive: LcDesign):
    """Target currents and open-circuit RX voltages for an imposed tank current."""
    if not drive.f0 > 0:
        raise ParameterError("drive.f0 must be > 0")
    w = 2 * math.pi * drive.f0
    I_lc = complex(drive.I_lc)
    n_t = circuit.n_target
    if n_t:
        Z = np.diag(circuit.R[1:]).astype(complex) + 1j * w * circuit.M[1:, 1:]
        rhs = -1j * w * circuit.M[1:, 0] * I_lc
        cond = np.linalg.cond(Z)
        if not np.isfinite(cond) or cond > CONDITION_LIMIT:
            raise SolverError(f"singular target system (condition {cond:.3g})",
                              angle=circuit.angle, condition=cond)
        I_t = np.linalg.solve(Z, rhs)
    else:
        I_t = np.zeros(0, dtype=complex)
    V = -1j * w * (circuit.M_rx[:, 0] * I_lc + circuit.M_rx[:, 1:] @ I_t)
    power = float(np.sum(circuit.R[1:] * np.abs(I_t) ** 2))
    return CouplingSolution(angle=circuit.angle, V_rx=V, I_target=I_t, I_lc=I_lc,
                            f0=drive.f0, target_power=power)


def make_drive(geometry: SensorGeometry, V_tx, R_tx, f0_target, series="E12", *,
               backend=None, L_tx=None):
    """Tank design around the solver-computed TX inductance."""
    if L_tx is None:
        L_tx = tx_inductance(geometry, backend=backend)
    return design_lc(L_tx, R_tx, V_tx, f0_target, series)


def sweep_rotation(geometry: SensorGeometry, target_spec: TargetSpec, angles, drive: LcDesign,
                   *, threads=1, backend=None):
    """Solve one pose per mechanical angle; order of evaluation never matters."""
    static = _static_part(geometry, backend)
    angles = [float(a) for a in angles]

    def one(angle):
        try:
            circuit = assemble(geometry, target_spec.at(angle), drive.f0, R_tx=drive.R_tx,
                               backend=backend, _static=static)
            return solve_coupling(circuit, drive)
        except (SolverError, SingularConfigurationError) as exc:
            raise SolverError(f"at angle {math.degrees(angle):.6g} deg: {exc}",
                              angle=angle) from exc

    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(one, angles))
    return [one(a) for a in angles]


def vector_area(loop: FilamentLoop):
    """``0.5 * sum r_i x r_{i+1}``; the z component is the projected area."""
    a, b = loop.segments()
    return 0.5 * np.sum(np.cross(a, b), axis=0)


def external_field_response(geometry: SensorGeometry, B_uniform, f):
    """EMF of each RX phase in a uniform field ``B`` (scalar = axial, or 3-vector)."""
    B = np.asarray(B_uniform, dtype=complex)
    if B.ndim == 0:
        B = np.array([0.0, 0.0, complex(B)])
    w = 2 * math.pi * f
    return np.array([-1j * w * sum(np.dot(B, vector_area(loop)) for loop in phase)
                     for phase in geometry.rx])


def tx_field_response(geometry: SensorGeometry, B_uniform, f):
    """EMF induced in the (non-differential) TX coil by the same field."""
    B = np.asarray(B_uniform, dtype=complex)
    if B.ndim == 0:
        B = np.array([0.0, 0.0, complex(B)])
    w = 2 * math.pi * f
    return -1j * w * sum(np.dot(B, vector_area(loop)) for loop in geometry.tx)


def single_lobe_voltage(geometry: SensorGeometry, drive: LcDesign, *, backend=None):
    """|EMF| the TX would induce in one isolated RX lobe (reference scale)."""
    lobe = rx_lobe(geometry.rx_spec, 0, 0, 0)
    M = _tx_coupling(geometry, lobe, backend)
    return 2 * math.pi * drive.f0 * abs(M) * abs(drive.I_lc)
