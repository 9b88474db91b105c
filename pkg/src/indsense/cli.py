"""Command-line front end.

Subcommands::

    indsense design    LC design table, winding trade-off, geometry files
    indsense solve     rotation sweep -> sweep.csv
    indsense analyze   sweep CSV -> metrics.json, spectrum.csv, error.svg
    indsense optimize  shape optimisation -> optimized_config.json, trace.csv
    indsense export    geometry JSON and SVG

Exit codes: 0 success, 2 config error, 3 solver error, 4 analysis error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import replace
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import plots
from .analysis import ARCSEC, ErrorCurve, error_metrics, harmonic_spectrum
from .circuit import design_lc, resonant_frequency, winding_tradeoff_table
from .config import ProjectConfig, load_config
from .emsolver import tx_inductance
from .errors import (AnalysisError, ConfigError, DegenerateInputError, InsufficientDataError,
                     ParameterError, SingularConfigurationError, SolverError,
                     UndefinedAngleError)
from .geometry import build_geometry, export_geometry, with_target
from .optimize import optimize_design, relative_bounds
from .pipeline import (evaluate_design, run_sweep, spans_electrical_period, with_air_gap)

EXIT_OK, EXIT_CONFIG, EXIT_SOLVER, EXIT_ANALYSIS = 0, 2, 3, 4

SWEEP_COLUMNS = ("angle_mech_deg", "re_V1", "im_V1", "re_V2", "im_V2", "a", "b",
                 "angle_est_deg", "error_deg")


def _num(x):
    return repr(float(x))


def _write_csv(path: Path, header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([v if isinstance(v, str) else _num(v) for v in r])
    path.write_bytes(buf.getvalue().encode("utf-8"))


def _write_json(path: Path, doc):
    path.write_bytes((json.dumps(doc, indent=2) + "\n").encode("utf-8"))


def _stamp(args):
    if args.no_timestamp:
        return None
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


# --------------------------------------------------------------------------- design

def design_report(cfg: ProjectConfig):
    d = cfg.design
    geometry = d.geometry()
    R_op = d.R_operating()
    lc = d.drive(geometry)
    single = replace(d.tx, N=1)
    L1 = tx_inductance(build_geometry(single, d.rx))
    # trace resistance grows linearly with the winding count
    base = design_lc(L1, R_op / d.tx.N, d.V_tx, d.f0_target, d.e_series)
    table = winding_tradeoff_table(base, range(1, max(6, d.tx.N) + 1))
    res = resonant_frequency(lc.L_tx, lc.C_tx, lc.R_tx)
    report = {
        "lc_design": {**lc.as_row(), "f0_simplified_Hz": res.f0_simplified,
                      "C_effective_F": lc.C_tx / 2, "R_tx_ref_ohm": d.R_tx,
                      "T_op_degC": d.T_op, "R_tx_operating_ohm": R_op,
                      "e_series": d.e_series},
        "winding_tradeoff": table,
    }
    return report, geometry


def cmd_design(cfg: ProjectConfig, out: Path, *, timestamp=None, threads=1, plot=False):
    report, geometry = design_report(cfg)
    out.mkdir(parents=True, exist_ok=True)
    _write_json(out / "design.json", report)
    _write_geometry(cfg, geometry, out, timestamp)
    row = report["lc_design"]
    print(f"L_tx = {row['L_tx_H'] * 1e6:.4g} uH  C_tx = {row['C_tx_F'] * 1e12:.4g} pF "
          f"({row['e_series']}, two in series: {row['C_effective_F'] * 1e12:.4g} pF effective)")
    print(f"f0 = {row['f0_Hz'] / 1e6:.5g} MHz  I_TX = {row['I_tx_A'] * 1e3:.4g} mA  "
          f"|I_LC| = {row['I_lc_abs_A'] * 1e3:.4g} mA  "
          f"R({row['T_op_degC']:g} C) = {row['R_tx_operating_ohm']:.4g} ohm")
    print("N   L_tx[uH]  I_TX[mA]  |I_LC|[mA]  field_rel")
    for r in report["winding_tradeoff"]:
        print(f"{r['N']:<3d} {r['L_tx_H'] * 1e6:9.4g} {r['I_tx_A'] * 1e3:9.4g} "
              f"{r['I_lc_A'] * 1e3:11.4g} {r['field_rel']:10.3g}")
    return EXIT_OK


def _write_geometry(cfg, geometry, out, timestamp):
    full = with_target(geometry, cfg.design.target)
    (out / "geometry.json").write_bytes(export_geometry(full, "json"))
    (out / "geometry.svg").write_bytes(export_geometry(full, "svg", timestamp=timestamp))


def cmd_export(cfg: ProjectConfig, out: Path, *, timestamp=None, **_):
    out.mkdir(parents=True, exist_ok=True)
    _write_geometry(cfg, cfg.design.geometry(), out, timestamp)
    print(f"wrote {out / 'geometry.json'} and {out / 'geometry.svg'}")
    return EXIT_OK


# --------------------------------------------------------------------------- solve

def sweep_rows(result):
    curve = result.curve
    rows = []
    for k, sol in enumerate(result.solutions):
        v = sol.V_rx
        theta = curve.angles_mech[k]
        err = curve.error[k]
        est = math.degrees(theta + err) % 360.0
        rows.append((math.degrees(theta), v[0].real, v[0].imag, v[1].real, v[1].imag,
                     result.frames.a[k], result.frames.b[k], est, math.degrees(err)))
    return rows


def cmd_solve(cfg: ProjectConfig, out: Path, *, threads=1, plot=False, timestamp=None):
    design = cfg.design
    angles = cfg.sweep.angles()
    gaps = cfg.sweep.air_gaps or (design.target.air_gap,)
    geometry = design.geometry()
    drive = design.drive(geometry)
    out.mkdir(parents=True, exist_ok=True)
    compensate = spans_electrical_period(angles, design.p)
    for i, gap in enumerate(gaps):
        d = with_air_gap(design, gap)
        res = run_sweep(d, angles, compensate_signals=compensate, threads=threads,
                        geometry=geometry, drive=drive)
        rows = sweep_rows(res)
        names = ["sweep.csv"] if i == 0 else []
        if len(gaps) > 1:
            names.append(f"sweep_gap_{gap * 1e3:g}mm.csv")
        for name in names:
            _write_csv(out / name, SWEEP_COLUMNS, rows)
        if plot:
            suffix = "" if i == 0 else f"_gap_{gap * 1e3:g}mm"
            (out / f"lissajous{suffix}.svg").write_bytes(
                plots.lissajous_svg(res.frames, timestamp=timestamp))
        peak = math.degrees(float(np.max(np.abs(res.curve.error))))
        print(f"air gap {gap * 1e3:g} mm: {len(rows)} poses, |V_rx|max/V_tx = "
              f"1/{1 / res.transfer_ratio():.3g}, peak error {peak:.4g} deg")
    return EXIT_OK


# --------------------------------------------------------------------------- analyze

def read_sweep_csv(path: Path):
    """Angle and error columns (degrees) of a sweep CSV."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise AnalysisError(f"cannot read {path}: {exc}") from exc
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise AnalysisError(f"{path}: line 1: empty file") from None
    missing = [c for c in ("angle_mech_deg", "error_deg") if c not in header]
    if missing:
        raise AnalysisError(f"{path}: line 1: missing column(s) {', '.join(missing)}")
    ia, ie = header.index("angle_mech_deg"), header.index("error_deg")
    angles, errors = [], []
    for row in reader:
        line = reader.line_num
        if not row:
            continue
        if len(row) != len(header):
            raise AnalysisError(f"{path}: line {line}: expected {len(header)} fields, "
                                f"got {len(row)}")
        try:
            a, e = float(row[ia]), float(row[ie])
        except ValueError:
            raise AnalysisError(f"{path}: line {line}: non-numeric value") from None
        if not (math.isfinite(a) and math.isfinite(e)):
            raise AnalysisError(f"{path}: line {line}: non-finite value")
        angles.append(a)
        errors.append(e)
    if not angles:
        raise AnalysisError(f"{path}: no data rows")
    return np.radians(angles), np.radians(errors)


def cmd_analyze(cfg: ProjectConfig, out: Path, *, csv_path=None, timestamp=None, **_):
    csv_path = Path(csv_path) if csv_path else out / "sweep.csv"
    theta, err = read_sweep_csv(csv_path)
    p = cfg.design.p
    curve = ErrorCurve(theta, err, p)
    max_order = min(cfg.analysis.max_order, len(curve) // 2)
    metrics = error_metrics(curve, max_order)
    spectrum = harmonic_spectrum(curve, max_order)
    h4p = spectrum.amplitude_of(4 * p) if 4 * p <= max_order else None
    metrics = {"source": csv_path.name, "p": p, "n_samples": len(curve),
               "max_order": max_order,
               f"H_{4 * p}_arcsec": None if h4p is None else h4p / ARCSEC, **metrics}
    out.mkdir(parents=True, exist_ok=True)
    _write_json(out / "metrics.json", metrics)
    _write_csv(out / "spectrum.csv", ("order", "amplitude_arcsec_mech", "phase_deg"),
               [(int(k), a / ARCSEC, math.degrees(ph))
                for k, a, ph in zip(spectrum.orders, spectrum.amplitude, spectrum.phase)])
    (out / "error.svg").write_bytes(plots.error_svg(curve, spectrum, timestamp=timestamp))
    print(f"peak-to-peak {metrics['peak_to_peak_arcsec']:.4g} arcsec, "
          f"rms {metrics['rms_arcsec']:.4g} arcsec")
    dom = metrics.get("dominant_order", 0)
    if dom:
        print(f"dominant harmonic: H_{dom} (electrical order {dom / p:g}) = "
              f"{spectrum.amplitude_of(dom) / ARCSEC:.4g} arcsec")
    return EXIT_OK


# --------------------------------------------------------------------------- optimize

def cmd_optimize(cfg: ProjectConfig, out: Path, *, budget=None, seed=None, threads=1, **_):
    design = cfg.design
    bounds = dict(cfg.optimize.parameters) or relative_bounds(
        design, ("r_inner", "r_outer", "duty"), 0.1)
    budget = cfg.optimize.budget if budget is None else budget
    seed = cfg.seed if seed is None else seed
    objective = cfg.analysis.objective
    ppp = cfg.optimize.points_per_period
    report = optimize_design(design, bounds, objective, budget, seed=seed,
                             points_per_period=ppp, threads=threads)
    best_cfg = replace(cfg, design=report.best, seed=seed)
    out.mkdir(parents=True, exist_ok=True)
    (out / "optimized_config.json").write_bytes(best_cfg.dumps().encode("utf-8"))
    names = list(bounds)
    _write_csv(out / "trace.csv", ["evaluation", *names, "score", "best_so_far", "status"],
               [(str(e.evaluation), *[e.params[n] for n in names], e.score, e.best_so_far,
                 e.status) for e in report.trace])
    p = design.p
    summary = {"objective": objective, "seed": seed, "budget": budget,
               "evaluations": report.evaluations, "restarts": report.restarts,
               "initial_score": report.initial_score, "best_score": report.best_score,
               "best_params": report.best_params}
    if objective == "H_4p":
        h0, h1 = report.initial_score, report.best_score
    else:
        h0 = evaluate_design(design, "H_4p", ppp, threads=threads)
        h1 = evaluate_design(report.best, "H_4p", ppp, threads=threads)
    summary[f"H_{4 * p}_baseline_arcsec"] = h0 / ARCSEC
    summary[f"H_{4 * p}_optimized_arcsec"] = h1 / ARCSEC
    _write_json(out / "optimize.json", summary)
    print(f"{objective}: initial {report.initial_score:.6g}, best {report.best_score:.6g} "
          f"after {report.evaluations} evaluations")
    print(f"H_{4 * p}: baseline {h0 / ARCSEC:.4g} arcsec -> optimized {h1 / ARCSEC:.4g} arcsec")
    return EXIT_OK


# --------------------------------------------------------------------------- main

HELP = {"design": "LC design table, winding trade-off and geometry files",
        "solve": "rotation sweep to sweep.csv",
        "analyze": "error metrics and harmonic spectrum of a sweep CSV",
        "optimize": "shape optimisation of RX envelope, interleave and duty",
        "export": "geometry as JSON and SVG"}

COMMANDS = {"design": cmd_design, "solve": cmd_solve, "analyze": cmd_analyze,
            "optimize": cmd_optimize, "export": cmd_export}


def build_parser():
    parser = argparse.ArgumentParser(prog="indsense",
                                     description="Inductive rotary position sensor toolkit")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, default=None,
                        help="project JSON (default: bundled sample design)")
    common.add_argument("--out", type=Path, default=Path("out"), help="output directory")
    common.add_argument("--plot", action="store_true", help="also emit SVG plots")
    common.add_argument("--budget", type=int, default=None, help="optimizer evaluations")
    common.add_argument("--seed", type=int, default=None, help="RNG seed")
    common.add_argument("--threads", type=int, default=1, help="sweep worker threads")
    common.add_argument("--no-timestamp", action="store_true",
                        help="omit timestamp comments from SVG output")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name, parents=[common], help=HELP[name])
        if name == "analyze":
            sp.add_argument("csv", nargs="?", default=None,
                            help="sweep CSV (default: OUT/sweep.csv)")
    return parser


def run(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.threads < 1:
        print("config error: --threads must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    if args.budget is not None and args.budget < 1:
        print("config error: --budget must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    kwargs = {"threads": args.threads, "plot": args.plot, "timestamp": _stamp(args)}
    if args.command == "analyze":
        kwargs["csv_path"] = args.csv
    if args.command == "optimize":
        kwargs.update(budget=args.budget, seed=args.seed)
    try:
        return COMMANDS[args.command](cfg, args.out, **kwargs)
    except (SolverError, SingularConfigurationError) as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (AnalysisError, InsufficientDataError, DegenerateInputError,
            UndefinedAngleError) as exc:
        print(f"analysis error: {exc}", file=sys.stderr)
        return EXIT_ANALYSIS
    except (ConfigError, ParameterError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
