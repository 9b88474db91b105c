"""Derivative-free shape optimisation of a sensor design.

Nelder-Mead (scipy) runs in the unit box spanned by the bounds; candidates
are clipped back into the box before evaluation, so every evaluated and
returned design respects the bounds.  When a run converges with budget to
spare it restarts from the incumbent with a fresh, seeded simplex.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import minimize

from .errors import AnalysisError, ParameterError, SingularConfigurationError, SolverError
from .pipeline import OBJECTIVES, SensorDesign, evaluate_design

log = logging.getLogger(__name__)

PARAMETERS = ("r_inner", "r_outer", "interleave", "duty")


def get_parameter(design: SensorDesign, name):
    if name == "r_inner":
        return design.rx.r_inner
    if name == "r_outer":
        return design.rx.r_outer
    if name == "interleave":
        return design.rx.winding_spacing
    if name == "duty":
        return design.target.duty
    raise ParameterError(f"unknown shape parameter {name!r}; choose from {PARAMETERS}")


def set_parameters(design: SensorDesign, values: dict):
    rx, target = design.rx, design.target
    for name, v in values.items():
        v = float(v)
        if name in ("r_inner", "r_outer", "interleave"):
            rx = replace(rx, **{name: v})
        elif name == "duty":
            target = replace(target, duty=v)
        else:
            raise ParameterError(f"unknown shape parameter {name!r}; choose from {PARAMETERS}")
    return replace(design, rx=rx, target=target)


def relative_bounds(design: SensorDesign, names, fraction):
    """``value * (1 -+ fraction)`` around the current design."""
    out = {}
    for n in names:
        v = get_parameter(design, n)
        out[n] = (v * (1 - fraction), v * (1 + fraction))
    return out


def check_bounds(design: SensorDesign, bounds: dict):
    """Reject empty, non-finite or physically impossible boxes."""
    if not bounds:
        raise ParameterError("no parameters to optimise")
    for name, b in bounds.items():
        if name not in PARAMETERS:
            raise ParameterError(f"unknown shape parameter {name!r}; choose from {PARAMETERS}")
        lo, hi = (float(x) for x in b)
        if not (math.isfinite(lo) and math.isfinite(hi)) or lo > hi:
            raise ParameterError(f"infeasible bounds for {name}: [{lo}, {hi}]")
    lo = {n: float(b[0]) for n, b in bounds.items()}
    hi = {n: float(b[1]) for n, b in bounds.items()}
    r_in_lo = lo.get("r_inner", design.rx.r_inner)
    r_out_hi = hi.get("r_outer", design.rx.r_outer)
    if not 0 < r_in_lo < r_out_hi:
        raise ParameterError("infeasible bounds: r_inner can never be below r_outer")
    if lo.get("r_outer", design.rx.r_outer) >= design.tx.r_start:
        raise ParameterError("infeasible bounds: r_outer must stay inside the TX coil")
    if "duty" in bounds and not (0 < hi["duty"] and lo["duty"] < 1):
        raise ParameterError("infeasible bounds: duty must overlap (0, 1)")


@dataclass(frozen=True)
class TraceEntry:
    evaluation: int
    params: dict
    score: float
    best_so_far: float
    status: str = "ok"


@dataclass
class OptimizationReport:
    best: SensorDesign
    best_params: dict
    best_score: float
    initial_score: float
    objective: str
    trace: list = field(default_factory=list)
    restarts: int = 0

    @property
    def evaluations(self):
        return len(self.trace)

    def improvement(self):
        return self.initial_score - self.best_score


class _BudgetExhausted(Exception):
    pass


def optimize_design(design: SensorDesign, bounds: dict, objective="H_4p", budget=40, *,
                    seed=0, points_per_period=16, xatol=1e-3, fatol=None, threads=1,
                    backend=None, evaluate=None):
    """Minimise an error objective over RX envelope, interleave and duty.

    Parameters
    ----------
    design : SensorDesign
        Starting point; its values are clipped into ``bounds``.
    bounds : dict
        ``{name: (lo, hi)}`` for names in ``PARAMETERS``.  ``lo == hi`` pins
        a parameter.
    objective : {"peak_to_peak", "H_4p", "weighted"}
    budget : int
        Maximum number of design evaluations (each one a solver sweep).
    seed : int
        Seeds the restart simplices; equal seeds give equal results.
    evaluate : callable, optional
        ``evaluate(design) -> float`` replacing the solver (for testing).

    Returns
    -------
    OptimizationReport
        ``trace`` holds every evaluation in order.  Candidates whose solve
        fails are scored ``inf`` and logged.
    """
    if objective not in OBJECTIVES:
        raise ParameterError(f"unknown objective {objective!r}; choose from {OBJECTIVES}")
    if int(budget) < 1:
        raise ParameterError("budget must be >= 1")
    budget = int(budget)
    check_bounds(design, bounds)
    names = list(bounds)
    lo = np.array([float(bounds[n][0]) for n in names])
    hi = np.array([float(bounds[n][1]) for n in names])
    span = hi - lo
    free = span > 0
    if evaluate is None:
        def evaluate(d):
            return evaluate_design(d, objective, points_per_period, threads=threads,
                                   backend=backend)

    trace = []
    cache = {}
    best = {"score": math.inf, "u": None}

    def to_params(u):
        x = lo + np.clip(u, 0.0, 1.0) * span
        return {n: float(v) for n, v in zip(names, x)}

    def score(u):
        u = np.where(free, np.clip(u, 0.0, 1.0), 0.0)
        key = tuple(np.round(u, 12))
        if key in cache:
            return cache[key]
        if len(trace) >= budget:
            raise _BudgetExhausted
        params = to_params(u)
        status = "ok"
        try:
            value = float(evaluate(set_parameters(design, params)))
            if not math.isfinite(value):
                status = "non-finite objective"
                value = math.inf
        except (ParameterError, SolverError, SingularConfigurationError, AnalysisError) as exc:
            log.warning("candidate %s failed: %s", params, exc)
            status = f"failed: {exc}"
            value = math.inf
        if value < best["score"]:
            best["score"], best["u"] = value, u.copy()
        trace.append(TraceEntry(len(trace) + 1, params, value, best["score"], status))
        cache[key] = value
        return value

    x0 = np.array([get_parameter(design, n) for n in names])
    u0 = np.where(free, (np.clip(x0, lo, hi) - lo) / np.where(free, span, 1.0), 0.0)
    initial = score(u0)
    if best["u"] is None:
        best["u"] = u0.copy()
    rng = np.random.default_rng(seed)
    restarts = 0
    dim = int(free.sum())
    step = 0.25
    try:
        while dim and len(trace) < budget:
            start = best["u"][free]
            simplex = [start]
            for k in range(dim):
                v = start.copy()
                v[k] += step if v[k] + step <= 1.0 else -step
                simplex.append(v)

            def f(z):
                u = np.zeros(len(names))
                u[free] = z
                return score(u)

            before = len(trace)
            minimize(f, start, method="Nelder-Mead",
                     options={"initial_simplex": np.array(simplex), "xatol": xatol,
                              "fatol": 0.0 if fatol is None else fatol,
                              "maxfev": budget})
            if len(trace) == before:
                break
            restarts += 1
            step = float(rng.uniform(0.05, 0.25))
    except _BudgetExhausted:
        pass

    best_params = to_params(best["u"])
    return OptimizationReport(best=set_parameters(design, best_params), best_params=best_params,
                              best_score=best["score"], initial_score=initial,
                              objective=objective, trace=trace, restarts=restarts)
