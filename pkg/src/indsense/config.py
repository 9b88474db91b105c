"""Project configuration: strict JSON schema and conversion to design objects.

All lengths are metres, frequencies hertz, resistances ohms; sweep angles
are degrees and say so in their key names.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from importlib import resources

import jsonschema

from .circuit import COPPER, MATERIALS, E_SERIES, Material, estimate_trace_resistance
from .errors import ConfigError, ParameterError
from .geometry import RxShapeSpec, TargetSpec, TxCoilSpec
from .optimize import PARAMETERS
from .pipeline import OBJECTIVES, SensorDesign

_num = {"type": "number"}
_pos = {"type": "number", "exclusiveMinimum": 0}
_int1 = {"type": "integer", "minimum": 1}


def _obj(props, required=()):
    return {"type": "object", "properties": props, "required": list(required),
            "additionalProperties": False}


_MATERIAL = {"oneOf": [
    {"type": "string", "enum": sorted(MATERIALS)},
    _obj({"name": {"type": "string"}, "sigma": _pos, "mu_r": _pos, "alpha_T": _num},
         ["sigma"]),
]}

SCHEMA = _obj({
    "geometry": _obj({
        "tx": _obj({"r_start": _pos, "N": _int1, "pitch": _pos, "trace_width": _pos,
                    "layer_z": _num, "segments": {"type": "integer", "minimum": 8},
                    "copper_thickness": _pos}, ["r_start", "N"]),
        "rx": _obj({"p": _int1, "r_inner": _pos, "r_outer": _pos, "n_w": _int1,
                    "n_phases": {"enum": [2, 3]},
                    "points_per_electrical_period": {"type": "integer", "minimum": 16},
                    "layer_z": {"type": "array", "items": _num, "minItems": 2, "maxItems": 2},
                    "interleave": {"type": ["number", "null"]}},
                   ["p", "r_inner", "r_outer"]),
        "target": _obj({"d_outer": _pos, "d_inner": _pos, "thickness": _pos,
                        "material": _MATERIAL, "air_gap": _pos,
                        "duty": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
                        "n_sub": _int1,
                        "center_offset": {"type": "array", "items": _num,
                                          "minItems": 2, "maxItems": 2},
                        "arc_points": {"type": "integer", "minimum": 4}},
                       ["d_outer", "d_inner", "thickness", "material", "air_gap"]),
    }, ["tx", "rx", "target"]),
    "circuit": _obj({"V_tx": _pos,
                     "R_tx": {"oneOf": [{"type": "number", "minimum": 0},
                                        {"const": "estimate"}]},
                     "f0_target": _pos, "e_series": {"enum": sorted(E_SERIES)},
                     "T_op": _num, "calibration_phase": _num},
                    ["V_tx", "R_tx", "f0_target"]),
    "sweep": _obj({"start_deg": _num, "stop_deg": _num, "count": _int1,
                   "air_gaps": {"type": "array", "items": _pos}}),
    "analysis": _obj({"max_order": _int1, "objective": {"enum": list(OBJECTIVES)}}),
    "optimize": _obj({
        "parameters": {"type": "object",
                       "propertyNames": {"enum": list(PARAMETERS)},
                       "additionalProperties": {"type": "array", "items": _num,
                                                "minItems": 2, "maxItems": 2}},
        "budget": _int1,
        "points_per_period": {"type": "integer", "minimum": 8},
    }),
    "seed": {"type": "integer", "minimum": 0},
}, ["geometry", "circuit"])


@dataclass(frozen=True)
class SweepConfig:
    start_deg: float = 0.0
    stop_deg: float = 360.0
    count: int = 360
    air_gaps: tuple = ()

    def angles_deg(self):
        """``count`` points from ``start`` towards ``stop`` (exclusive)."""
        step = (self.stop_deg - self.start_deg) / self.count
        return [self.start_deg + k * step for k in range(self.count)]

    def angles(self):
        return [math.radians(a) for a in self.angles_deg()]


@dataclass(frozen=True)
class AnalysisConfig:
    max_order: int = 60
    objective: str = "H_4p"


@dataclass(frozen=True)
class OptimizeConfig:
    parameters: dict = field(default_factory=dict)
    budget: int = 40
    points_per_period: int = 16


@dataclass(frozen=True)
class ProjectConfig:
    design: SensorDesign
    sweep: SweepConfig = SweepConfig()
    analysis: AnalysisConfig = AnalysisConfig()
    optimize: OptimizeConfig = OptimizeConfig()
    seed: int = 0
    estimate_R: bool = False

    def to_dict(self):
        return config_to_dict(self)

    def dumps(self):
        return json.dumps(self.to_dict(), indent=2) + "\n"


def _fmt_path(path):
    out = ""
    for p in path:
        out += f"[{p}]" if isinstance(p, int) else (f".{p}" if out else str(p))
    return out or "<root>"


def validate_dict(doc):
    """Schema check; raises ``ConfigError`` naming the offending field."""
    validator = jsonschema.Draft202012Validator(SCHEMA)
    best = jsonschema.exceptions.best_match(validator.iter_errors(doc))
    if best is not None:
        raise ConfigError(f"{_fmt_path(best.absolute_path)}: {best.message}")


def _material(value):
    if isinstance(value, str):
        return MATERIALS[value]
    return Material(sigma=value["sigma"], mu_r=value.get("mu_r", 1.0),
                    alpha_T=value.get("alpha_T", 0.0), name=value.get("name", "custom"))


def estimate_tx_resistance(tx: TxCoilSpec, frequency):
    length = sum(2 * math.pi * r for r in tx.radii())
    return estimate_trace_resistance(length, tx.trace_width, tx.copper_thickness, frequency,
                                     COPPER)


def config_from_dict(doc) -> ProjectConfig:
    validate_dict(doc)
    g = doc["geometry"]
    try:
        tx = TxCoilSpec(**g["tx"])
        rx_args = dict(g["rx"])
        if "layer_z" in rx_args:
            rx_args["layer_z"] = tuple(rx_args["layer_z"])
        rx = RxShapeSpec(**rx_args)
        t_args = dict(g["target"])
        t_args["material"] = _material(t_args["material"])
        if "center_offset" in t_args:
            t_args["center_offset"] = tuple(t_args["center_offset"])
        target = TargetSpec(p=rx.p, **t_args)
    except TypeError as exc:  # pragma: no cover - schema should catch these
        raise ConfigError(f"geometry: {exc}") from exc
    for name, spec in (("geometry.tx", tx), ("geometry.rx", rx), ("geometry.target", target)):
        try:
            spec.validate()
        except ParameterError as exc:
            raise ConfigError(f"{name}: {exc}") from exc
    c = doc["circuit"]
    estimate = c["R_tx"] == "estimate"
    R_tx = estimate_tx_resistance(tx, c["f0_target"]) if estimate else float(c["R_tx"])
    kw = {k: c[k] for k in ("e_series", "T_op", "calibration_phase") if k in c}
    design = SensorDesign(tx=tx, rx=rx, target=target, V_tx=float(c["V_tx"]), R_tx=R_tx,
                          f0_target=float(c["f0_target"]), **kw)
    try:
        design.validate()
        if tx.r_start <= rx.r_outer:
            raise ParameterError("tx.r_start must exceed rx.r_outer")
    except ParameterError as exc:
        raise ConfigError(f"geometry: {exc}") from exc
    s = dict(doc.get("sweep", {}))
    if "air_gaps" in s:
        s["air_gaps"] = tuple(float(x) for x in s["air_gaps"])
    sweep = SweepConfig(**s)
    if sweep.stop_deg == sweep.start_deg:
        raise ConfigError("sweep: stop_deg must differ from start_deg")
    analysis = AnalysisConfig(**doc.get("analysis", {}))
    o = dict(doc.get("optimize", {}))
    if "parameters" in o:
        o["parameters"] = {k: tuple(float(x) for x in v) for k, v in o["parameters"].items()}
    opt = OptimizeConfig(**o)
    return ProjectConfig(design=design, sweep=sweep, analysis=analysis, optimize=opt,
                         seed=int(doc.get("seed", 0)), estimate_R=estimate)


def _material_to_json(m: Material):
    if MATERIALS.get(m.name) == m:
        return m.name
    return {"name": m.name, "sigma": m.sigma, "mu_r": m.mu_r, "alpha_T": m.alpha_T}


def config_to_dict(cfg: ProjectConfig):
    d = cfg.design
    tx, rx, t = d.tx, d.rx, d.target
    return {
        "geometry": {
            "tx": {"r_start": tx.r_start, "N": tx.N, "pitch": tx.pitch,
                   "trace_width": tx.trace_width, "layer_z": tx.layer_z,
                   "segments": tx.segments, "copper_thickness": tx.copper_thickness},
            "rx": {"p": rx.p, "r_inner": rx.r_inner, "r_outer": rx.r_outer, "n_w": rx.n_w,
                   "n_phases": rx.n_phases,
                   "points_per_electrical_period": rx.points_per_electrical_period,
                   "layer_z": list(rx.layer_z), "interleave": rx.interleave},
            "target": {"d_outer": t.d_outer, "d_inner": t.d_inner, "thickness": t.thickness,
                       "material": _material_to_json(t.material), "air_gap": t.air_gap,
                       "duty": t.duty, "n_sub": t.n_sub,
                       "center_offset": list(t.center_offset), "arc_points": t.arc_points},
        },
        "circuit": {"V_tx": d.V_tx, "R_tx": "estimate" if cfg.estimate_R else d.R_tx,
                    "f0_target": d.f0_target, "e_series": d.e_series, "T_op": d.T_op,
                    "calibration_phase": d.calibration_phase},
        "sweep": {"start_deg": cfg.sweep.start_deg, "stop_deg": cfg.sweep.stop_deg,
                  "count": cfg.sweep.count, "air_gaps": list(cfg.sweep.air_gaps)},
        "analysis": {"max_order": cfg.analysis.max_order,
                     "objective": cfg.analysis.objective},
        "optimize": {"parameters": {k: list(v) for k, v in cfg.optimize.parameters.items()},
                     "budget": cfg.optimize.budget,
                     "points_per_period": cfg.optimize.points_per_period},
        "seed": cfg.seed,
    }


def load_config(path=None) -> ProjectConfig:
    """Read a config file; ``None`` loads the bundled sample design."""
    try:
        if path is None:
            text = resources.files("indsense").joinpath("data/reference.json").read_text()
        else:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON (line {exc.lineno}): {exc.msg}") from exc
    return config_from_dict(doc)


def with_design(cfg: ProjectConfig, design: SensorDesign):
    return replace(cfg, design=design)
