"""Parametric coil and target geometry as closed filament polylines.

All lengths are metres, angles radians.  The PCB coil layers sit at
``z >= 0`` and the target hangs below them (negative ``z``).
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace

import numpy as np

from .circuit import Material
from .errors import ParameterError

# GMD of a w x t rectangle is ~0.2235 (w + t) (Rosa).
RECT_GMD_FACTOR = 0.2235
COPPER_THICKNESS = 35e-6


def area_preserving_radius(r, step):
    """Vertex radius for which a regular polygon with angular ``step`` keeps
    the swept area of the true arc of radius ``r``."""
    if step <= 0:
        return r
    return r * math.sqrt(step / math.sin(step))


@dataclass(frozen=True, eq=False)
class FilamentLoop:
    """Closed polyline; the last vertex connects back to the first.

    ``orientation`` multiplies the current sense: a loop with orientation
    ``-1`` is traversed in reverse order of its vertices.
    """

    vertices: np.ndarray
    orientation: int = 1
    role: str = ""
    phase: int = 0
    winding: int = 0

    def __post_init__(self):
        v = np.array(self.vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 3:
            raise ParameterError("vertices must have shape (n, 3)")
        if v.shape[0] < 3:
            raise ParameterError("a loop needs at least 3 vertices")
        if not np.all(np.isfinite(v)):
            raise ParameterError("vertices must be finite")
        step = np.roll(v, -1, axis=0) - v
        if np.any(np.all(step == 0.0, axis=1)):
            raise ParameterError("consecutive vertices must differ")
        if self.orientation not in (1, -1):
            raise ParameterError("orientation must be +1 or -1")
        v.setflags(write=False)
        object.__setattr__(self, "vertices", v)

    def __len__(self):
        return self.vertices.shape[0]

    def segments(self):
        """Start and end points of each segment in traversal order."""
        v = self.vertices if self.orientation == 1 else self.vertices[::-1]
        return v, np.roll(v, -1, axis=0)

    @property
    def perimeter(self):
        a, b = self.segments()
        return float(np.sum(np.linalg.norm(b - a, axis=1)))

    def signed_area(self):
        """Signed area of the z-projection (shoelace), including orientation."""
        a, b = self.segments()
        return 0.5 * float(np.sum(a[:, 0] * b[:, 1] - b[:, 0] * a[:, 1]))

    def rotated(self, angle):
        c, s = math.cos(angle), math.sin(angle)
        v = self.vertices
        out = np.column_stack([c * v[:, 0] - s * v[:, 1],
                               s * v[:, 0] + c * v[:, 1], v[:, 2]])
        return replace(self, vertices=out)

    def scaled(self, factor):
        return replace(self, vertices=self.vertices * factor)

    def reversed(self):
        return replace(self, orientation=-self.orientation)


def _dedupe(points):
    """Drop consecutive duplicates (cyclically)."""
    keep = np.any(points != np.roll(points, 1, axis=0), axis=1)
    if not np.any(keep):
        return points[:1]
    return points[keep]


@dataclass(frozen=True)
class TxCoilSpec:
    r_start: float
    N: int = 1
    pitch: float = 0.3e-3
    trace_width: float = 0.2e-3
    layer_z: float = 0.0
    segments: int = 360
    copper_thickness: float = COPPER_THICKNESS

    def validate(self):
        if self.N < 1:
            raise ParameterError("TxCoilSpec.N must be >= 1")
        if self.r_start <= 0:
            raise ParameterError("TxCoilSpec.r_start must be > 0")
        if self.N > 1 and self.pitch <= 0:
            raise ParameterError("TxCoilSpec.pitch must be > 0")
        if self.trace_width <= 0 or self.copper_thickness <= 0:
            raise ParameterError("TxCoilSpec.trace_width and copper_thickness must be > 0")
        if self.segments < 8:
            raise ParameterError("TxCoilSpec.segments must be >= 8")

    @property
    def wire_radius(self):
        """Equivalent filament radius: GMD of the trace cross-section."""
        return RECT_GMD_FACTOR * (self.trace_width + self.copper_thickness)

    def radii(self):
        return [self.r_start + k * self.pitch for k in range(self.N)]


@dataclass(frozen=True)
class RxShapeSpec:
    """Differential receiver coil with a cosine centerline.

    ``interleave`` is the electrical angle between adjacent series windings
    of one phase; ``None`` picks ``2 pi / (3 n_w)``, which cancels the third
    harmonic of the summed phase signal.
    """

    p: int
    r_inner: float
    r_outer: float
    n_w: int = 1
    n_phases: int = 2
    points_per_electrical_period: int = 64
    layer_z: tuple = (0.0, 0.1e-3)
    interleave: float | None = None

    def validate(self):
        if not isinstance(self.p, (int, np.integer)) or self.p < 1:
            raise ParameterError("RxShapeSpec.p must be a positive integer")
        if not 0 < self.r_inner < self.r_outer:
            raise ParameterError("RxShapeSpec requires 0 < r_inner < r_outer")
        if self.n_w < 1:
            raise ParameterError("RxShapeSpec.n_w must be >= 1")
        if self.n_phases not in (2, 3):
            raise ParameterError("RxShapeSpec.n_phases must be 2 or 3")
        m = self.points_per_electrical_period
        if m < 16 or m % 2:
            raise ParameterError(
                "RxShapeSpec.points_per_electrical_period must be an even integer >= 16")
        if len(self.layer_z) != 2:
            raise ParameterError("RxShapeSpec.layer_z needs two z-offsets")

    @property
    def r_mid(self):
        return 0.5 * (self.r_inner + self.r_outer)

    @property
    def amplitude(self):
        return 0.5 * (self.r_outer - self.r_inner)

    @property
    def phase_shift(self):
        """Electrical shift between adjacent phases."""
        return math.pi / 2 if self.n_phases == 2 else 2 * math.pi / 3

    @property
    def winding_spacing(self):
        if self.interleave is not None:
            return float(self.interleave)
        return 2 * math.pi / (3 * self.n_w)

    def rotation(self, phase_index, winding_index):
        """Mechanical rotation of one winding relative to phase 0's centre."""
        centred = winding_index - (self.n_w - 1) / 2
        return (phase_index * self.phase_shift
                + centred * self.winding_spacing) / self.p


@dataclass(frozen=True)
class TargetSpec:
    """Rotor with ``p`` annular-sector wings.

    ``duty`` is the metal fraction of each ``2 pi / p`` pitch; ``n_sub``
    concentric eddy loops are placed per wing; ``center_offset`` shifts the
    rotor axis (eccentricity).
    """

    p: int
    d_outer: float
    d_inner: float
    thickness: float
    material: Material
    air_gap: float
    angle: float = 0.0
    duty: float = 0.5
    n_sub: int = 1
    center_offset: tuple = (0.0, 0.0)
    arc_points: int = 48

    def validate(self):
        if self.p < 1:
            raise ParameterError("TargetSpec.p must be >= 1")
        if not 0 < self.d_inner < self.d_outer:
            raise ParameterError("TargetSpec requires 0 < d_inner < d_outer")
        if self.thickness <= 0:
            raise ParameterError("TargetSpec.thickness must be > 0")
        if self.air_gap <= 0:
            raise ParameterError("TargetSpec.air_gap must be > 0")
        if not 0 < self.duty < 1:
            raise ParameterError("TargetSpec.duty must lie in (0, 1)")
        if self.n_sub < 1:
            raise ParameterError("TargetSpec.n_sub must be >= 1")
        if self.arc_points < 4:
            raise ParameterError("TargetSpec.arc_points must be >= 4")
        self.material.validate()
        if self.d_outer - self.d_inner < 1e-6:
            raise ParameterError("TargetSpec wings are degenerate (zero radial depth)")

    @property
    def radial_depth(self):
        return 0.5 * (self.d_outer - self.d_inner)

    def at(self, angle):
        return replace(self, angle=angle)


@dataclass(frozen=True)
class SensorGeometry:
    tx: tuple = ()
    rx: tuple = ()            # one tuple of loops per phase
    target: tuple = ()
    tx_spec: TxCoilSpec | None = None
    rx_spec: RxShapeSpec | None = None

    @property
    def layer_z(self):
        zs = []
        if self.rx_spec is not None:
            zs.extend(self.rx_spec.layer_z)
        if self.tx_spec is not None:
            zs.append(self.tx_spec.layer_z)
        return tuple(sorted(set(zs)))

    def all_loops(self):
        loops = list(self.tx)
        for phase in self.rx:
            loops.extend(phase)
        loops.extend(self.target)
        return loops


def circular_loop(radius, segments, z=0.0, role="", winding=0, phase0=0.0):
    """Regular polygon with the area of the circle of ``radius``."""
    step = 2 * math.pi / segments
    r = area_preserving_radius(radius, step)
    t = phase0 + step * np.arange(segments)
    v = np.column_stack([r * np.cos(t), r * np.sin(t), np.full(segments, z)])
    return FilamentLoop(v, role=role, winding=winding)


def make_tx_coil(spec: TxCoilSpec):
    """Concentric circular windings, all with the same sense."""
    spec.validate()
    return [circular_loop(r, spec.segments, spec.layer_z, role="tx", winding=k)
            for k, r in enumerate(spec.radii())]


def _rx_traces(spec, phase_index, winding_index):
    """Sampled outer/inner traces: (theta, r1, r2, layer index per half period)."""
    m = spec.points_per_electrical_period
    p = spec.p
    u = math.pi / 2 + 2 * math.pi * np.arange(p * m + 1) / m
    theta = u / p + spec.rotation(phase_index, winding_index)
    cu = np.cos(u)
    r1 = spec.r_mid + spec.amplitude * cu
    r2 = spec.r_mid - spec.amplitude * cu
    return theta, r1, r2


def _half_period_points(theta, r, z, k, m, reverse=False):
    j = np.arange(k * m // 2, (k + 1) * m // 2 + 1)
    if reverse:
        j = j[::-1]
    return np.column_stack([r[j] * np.cos(theta[j]), r[j] * np.sin(theta[j]),
                            np.full(j.size, z)])


def rx_centerline(spec: RxShapeSpec, phase_index: int, winding_index: int):
    """One series winding of one receiver phase.

    Trace 1 follows ``r_mid + A cos(p theta + phi)`` once around, trace 2
    returns along ``r_mid - A cos(...)``.  The two traces cross every half
    electrical period; there both change layer, so the outer trace always
    lies on ``layer_z[0]`` and the inner one on ``layer_z[1]``.  The enclosed
    lobes alternate in sign.
    """
    spec.validate()
    if not 0 <= phase_index < spec.n_phases:
        raise ParameterError("phase_index out of range")
    if not 0 <= winding_index < spec.n_w:
        raise ParameterError("winding_index out of range")
    theta, r1, r2 = _rx_traces(spec, phase_index, winding_index)
    m = spec.points_per_electrical_period
    z_outer, z_inner = spec.layer_z
    parts = []
    # half period k starts at u = pi/2 + k pi: cos <= 0 for even k
    for k in range(2 * spec.p):
        z1 = z_inner if k % 2 == 0 else z_outer
        parts.append(_half_period_points(theta, r1, z1, k, m))
    for k in reversed(range(2 * spec.p)):
        z2 = z_outer if k % 2 == 0 else z_inner
        parts.append(_half_period_points(theta, r2, z2, k, m, reverse=True))
    v = _dedupe(np.vstack(parts))
    return FilamentLoop(v, role="rx", phase=phase_index, winding=winding_index)


def rx_lobe(spec: RxShapeSpec, phase_index: int, winding_index: int, lobe: int):
    """Closed outline of a single lobe (half electrical period) of a winding."""
    spec.validate()
    theta, r1, r2 = _rx_traces(spec, phase_index, winding_index)
    m = spec.points_per_electrical_period
    z_outer, z_inner = spec.layer_z
    k = lobe % (2 * spec.p)
    z1 = z_inner if k % 2 == 0 else z_outer
    z2 = z_outer if k % 2 == 0 else z_inner
    v = np.vstack([_half_period_points(theta, r1, z1, k, m),
                   _half_period_points(theta, r2, z2, k, m, reverse=True)])
    return FilamentLoop(_dedupe(v), role="rx", phase=phase_index, winding=winding_index)


def rx_lobe_areas(spec: RxShapeSpec, phase_index: int, winding_index: int):
    """Signed projected areas of the ``2 p`` lobes of one winding."""
    return np.array([rx_lobe(spec, phase_index, winding_index, k).signed_area()
                     for k in range(2 * spec.p)])


def make_rx_coils(spec: RxShapeSpec):
    """``n_phases`` tuples of ``n_w`` series-connected windings."""
    spec.validate()
    return tuple(tuple(rx_centerline(spec, ph, w) for w in range(spec.n_w))
                 for ph in range(spec.n_phases))


def target_z(spec: TargetSpec, z_ref=0.0):
    """Height of the target eddy filaments.

    Currents are confined to a skin depth at the wing face nearest to the
    coils, so the filaments sit on that face.
    """
    return z_ref - spec.air_gap


def _sector_outline(r_in, r_out, center, half_width, arc_points, z):
    step = 2 * half_width / arc_points
    ro = area_preserving_radius(r_out, step)
    ri = area_preserving_radius(r_in, step)
    t = center - half_width + step * np.arange(arc_points + 1)
    outer = np.column_stack([ro * np.cos(t), ro * np.sin(t)])
    inner = np.column_stack([ri * np.cos(t[::-1]), ri * np.sin(t[::-1])])
    seg = r_out * step
    n_rad = max(1, int(math.ceil((r_out - r_in) / seg)))
    s = np.arange(1, n_rad)[:, None] / n_rad
    down = outer[-1] + s * (inner[0] - outer[-1])
    up = inner[-1] + s * (outer[0] - inner[-1])
    xy = np.vstack([outer, down, inner, up])
    return np.column_stack([xy, np.full(len(xy), z)])


def make_target(spec: TargetSpec, z_ref=0.0):
    """Wing outline loops, ``n_sub`` concentric per wing, rotated by ``spec.angle``."""
    spec.validate()
    r_in, r_out = spec.d_inner / 2, spec.d_outer / 2
    half = spec.duty * math.pi / spec.p
    h = (r_out - r_in) / (2 * spec.n_sub)
    r_c = 0.5 * (r_in + r_out)
    z = target_z(spec, z_ref)
    ox, oy = spec.center_offset
    loops = []
    for k in range(spec.p):
        center = spec.angle + 2 * math.pi * k / spec.p
        for j in range(spec.n_sub):
            hw = half - j * h / r_c
            if hw <= 0:
                raise ParameterError("TargetSpec.n_sub too large for the wing width")
            v = _sector_outline(r_in + j * h, r_out - j * h, center, hw,
                                spec.arc_points, z)
            v[:, 0] += ox
            v[:, 1] += oy
            loops.append(FilamentLoop(v, role="target", phase=k, winding=j))
    return loops


def target_strip_width(spec: TargetSpec):
    """Radial width of the band each sub-loop represents."""
    return spec.radial_depth / spec.n_sub


def build_geometry(tx_spec: TxCoilSpec, rx_spec: RxShapeSpec, target=()):
    """Assemble TX and RX; the TX must surround the receiver envelope."""
    tx_spec.validate()
    rx_spec.validate()
    if tx_spec.r_start <= rx_spec.r_outer:
        raise ParameterError("TxCoilSpec.r_start must exceed RxShapeSpec.r_outer")
    return SensorGeometry(tx=tuple(make_tx_coil(tx_spec)),
                          rx=make_rx_coils(rx_spec),
                          target=tuple(target),
                          tx_spec=tx_spec, rx_spec=rx_spec)


def with_target(geometry: SensorGeometry, target_spec: TargetSpec):
    return replace(geometry, target=tuple(make_target(target_spec, _z_ref(geometry))))


def _z_ref(geometry):
    zs = geometry.layer_z
    return min(zs) if zs else 0.0


# ---------------------------------------------------------------------------
# Export

ROLES = ("tx", "rx", "target")
_SVG_STYLE = """
    path { fill: none; stroke-width: 0.1; }
    .tx { stroke: #b22222; }
    .rx.phase-0 { stroke: #1f5fbf; }
    .rx.phase-1 { stroke: #2ca02c; }
    .rx.phase-2 { stroke: #ff7f0e; }
    .target { stroke: #7f7f7f; fill: #7f7f7f; fill-opacity: 0.15; }
"""


def _loop_record(loop):
    return {"role": loop.role, "phase": int(loop.phase), "winding": int(loop.winding),
            "orientation": int(loop.orientation),
            "vertices": [[float(c) for c in v] for v in loop.vertices]}


def _layer_classes(loop, layer_z):
    """``layer-i`` for every PCB layer the loop has vertices on."""
    z = loop.vertices[:, 2]
    return [f"layer-{i}" for i, lz in enumerate(layer_z) if np.any(np.abs(z - lz) < 1e-9)]


def _svg_path(loop):
    xy = loop.vertices[:, :2] * 1e3
    pts = " L ".join(f"{x:.6f} {-y:.6f}" for x, y in xy)
    return f"M {pts} Z"


def export_geometry(geometry: SensorGeometry, format="json", *, timestamp=None):
    """Serialise the loops of ``geometry`` to bytes.

    Parameters
    ----------
    format : {"json", "svg"}
        JSON lists every loop with its vertices in metres.  SVG is a top view
        in millimetres (y up), one ``<path>`` per loop, with the role and
        copper layer as CSS classes.
    timestamp : str, optional
        Written into an SVG comment when given.  Leave it out for
        reproducible output.
    """
    loops = geometry.all_loops()
    if format == "json":
        doc = {"unit": "m", "loops": [_loop_record(lp) for lp in loops]}
        return (json.dumps(doc, indent=1) + "\n").encode("utf-8")
    if format != "svg":
        raise ParameterError(f"unknown export format {format!r}")
    if not loops:
        raise ParameterError("geometry has no loops to export")
    xy = np.vstack([lp.vertices[:, :2] for lp in loops]) * 1e3
    lo = xy.min(axis=0) - 1.0
    hi = xy.max(axis=0) + 1.0
    w, h = hi - lo
    layers = geometry.layer_z
    out = ['<?xml version="1.0" encoding="UTF-8"?>']
    if timestamp:
        out.append(f"<!-- generated {timestamp} -->")
    out.append(f'<svg xmlns="http://www.w3.org/2000/svg" width="{w:.3f}mm" height="{h:.3f}mm" '
               f'viewBox="{lo[0]:.3f} {-hi[1]:.3f} {w:.3f} {h:.3f}">')
    out.append(f"<style>{_SVG_STYLE}</style>")
    for lp in loops:
        cls = [lp.role or "loop"]
        if lp.role == "rx":
            cls.append(f"phase-{lp.phase}")
        cls = " ".join(cls + _layer_classes(lp, layers))
        out.append(f'<path class="{cls}" data-phase="{lp.phase}" data-winding="{lp.winding}" '
                   f'd="{_svg_path(lp)}"/>')
    out.append("</svg>")
    return ("\n".join(out) + "\n").encode("utf-8")


def import_geometry(data):
    """Inverse of the JSON export.  Specs are not stored, only loops."""
    try:
        doc = json.loads(data)
    except (TypeError, ValueError) as exc:
        raise ParameterError(f"geometry JSON is malformed: {exc}") from exc
    if not isinstance(doc, dict) or doc.get("unit") != "m" or "loops" not in doc:
        raise ParameterError("geometry JSON needs unit 'm' and a loops list")
    groups = {r: [] for r in ROLES}
    for i, rec in enumerate(doc["loops"]):
        role = rec.get("role")
        if role not in ROLES:
            raise ParameterError(f"loops[{i}].role must be one of {ROLES}")
        groups[role].append(FilamentLoop(np.array(rec["vertices"], dtype=float),
                                         orientation=int(rec.get("orientation", 1)),
                                         role=role, phase=int(rec.get("phase", 0)),
                                         winding=int(rec.get("winding", 0))))
    n_ph = max((lp.phase for lp in groups["rx"]), default=-1) + 1
    rx = tuple(tuple(lp for lp in groups["rx"] if lp.phase == ph) for ph in range(n_ph))
    return SensorGeometry(tx=tuple(groups["tx"]), rx=rx, target=tuple(groups["target"]))
