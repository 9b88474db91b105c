"""Closed-form design equations for the TX resonant tank.

Skin depth, resonance of the parallel tank (two equal capacitors in series
with the coil), capacitor sizing with E-series snapping, drive and tank
currents, copper temperature drift and winding-count scaling.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import OverdampedError, ParameterError

MU0 = 4e-7 * math.pi
COPPER_ALPHA = 0.00393      # 1/K
T_REF = 20.0                # degC, "room temperature"


@dataclass(frozen=True)
class Material:
    sigma: float
    mu_r: float = 1.0
    alpha_T: float = 0.0
    name: str = ""

    def validate(self):
        if not self.sigma > 0:
            raise ParameterError("Material.sigma must be > 0")
        if not self.mu_r >= 1:
            raise ParameterError("Material.mu_r must be >= 1")


COPPER = Material(58e6, 1.0, COPPER_ALPHA, "copper")
ALUMINUM = Material(35.38e6, 1.0, 0.0039, "aluminum")
STAINLESS_14301 = Material(1.4e6, 1.0, 0.0, "1.4301 stainless")

MATERIALS = {m.name: m for m in (COPPER, ALUMINUM, STAINLESS_14301)}

E_SERIES = {
    "E12": (1.0, 1.2, 1.5, 1.8, 2.2, 2.7, 3.3, 3.9, 4.7, 5.6, 6.8, 8.2),
    "E24": (1.0, 1.1, 1.2, 1.3, 1.5, 1.6, 1.8, 2.0, 2.2, 2.4, 2.7, 3.0,
            3.3, 3.6, 3.9, 4.3, 4.7, 5.1, 5.6, 6.2, 6.8, 7.5, 8.2, 9.1),
    "E96": (1.00, 1.02, 1.05, 1.07, 1.10, 1.13, 1.15, 1.18, 1.21, 1.24, 1.27,
            1.30, 1.33, 1.37, 1.40, 1.43, 1.47, 1.50, 1.54, 1.58, 1.62, 1.65,
            1.69, 1.74, 1.78, 1.82, 1.87, 1.91, 1.96, 2.00, 2.05, 2.10, 2.15,
            2.21, 2.26, 2.32, 2.37, 2.43, 2.49, 2.55, 2.61, 2.67, 2.74, 2.80,
            2.87, 2.94, 3.01, 3.09, 3.16, 3.24, 3.32, 3.40, 3.48, 3.57, 3.65,
            3.74, 3.83, 3.92, 4.02, 4.12, 4.22, 4.32, 4.42, 4.53, 4.64, 4.75,
            4.87, 4.99, 5.11, 5.23, 5.36, 5.49, 5.62, 5.76, 5.90, 6.04, 6.19,
            6.34, 6.49, 6.65, 6.81, 6.98, 7.15, 7.32, 7.50, 7.68, 7.87, 8.06,
            8.25, 8.45, 8.66, 8.87, 9.09, 9.31, 9.53, 9.76),
}


def _positive(**kw):
    for name, value in kw.items():
        if not value > 0:
            raise ParameterError(f"{name} must be > 0 (got {value!r})")


def skin_depth(frequency, material=None, *, sigma=None, mu_r=1.0):
    """Skin depth ``sqrt(2 / (omega sigma mu0 mu_r))`` in metres."""
    if material is not None:
        sigma, mu_r = material.sigma, material.mu_r
    _positive(frequency=frequency, sigma=sigma, mu_r=mu_r)
    omega = 2 * math.pi * frequency
    return math.sqrt(2.0 / (omega * sigma * MU0 * mu_r))


@dataclass(frozen=True)
class Resonance:
    f0: float
    f0_simplified: float
    relative_difference: float


def resonant_frequency(L, C, R=0.0):
    """Natural frequency of the tank (Hz), with the lossless approximation.

    Raises
    ------
    OverdampedError
        If ``2/(L C) <= (R/L)**2``.
    """
    _positive(L=L, C=C)
    if R < 0:
        raise ParameterError("R must be >= 0")
    radicand = 2.0 / (L * C) - (R / L) ** 2
    if radicand <= 0:
        raise OverdampedError(f"overdamped tank: 2/(LC) - (R/L)^2 = {radicand:.3g}")
    f0 = math.sqrt(radicand) / (2 * math.pi)
    f0s = math.sqrt(2.0 / (L * C)) / (2 * math.pi)
    return Resonance(f0, f0s, (f0s - f0) / f0s)


def nearest_e_series(value, series="E12"):
    """Closest preferred value on a logarithmic scale."""
    _positive(value=value)
    try:
        mantissas = E_SERIES[series]
    except KeyError:
        raise ParameterError(f"unknown E-series {series!r}") from None
    decade = math.floor(math.log10(value))
    best = None
    for d in (decade - 1, decade, decade + 1):
        for m in mantissas:
            cand = m * 10.0 ** d
            err = abs(math.log(cand / value))
            if best is None or err < best[1]:
                best = (cand, err)
    # trim representation noise such as 6.8000000000000005e-10
    return float(f"{best[0]:.6g}")


@dataclass(frozen=True)
class CapacitorChoice:
    C: float
    C_series: float
    series: str


def required_capacitance(L, f0_target, R=0.0, series="E12"):
    """Per-capacitor value ``2L / (L^2 w0^2 + R^2)`` and its E-series pick."""
    _positive(L=L, f0_target=f0_target)
    w0 = 2 * math.pi * f0_target
    C = 2 * L / (L**2 * w0**2 + R**2)
    return CapacitorChoice(C, nearest_e_series(C, series), series)


def driving_current(V_tx, R, C, L):
    """Drive current resupplying the tank losses, ``V R C / (2 L)``."""
    _positive(V_tx=V_tx, C=C, L=L)
    if R < 0:
        raise ParameterError("R must be >= 0")
    return V_tx * R * C / (2 * L)


def lc_current(V_tx, R, L, f0):
    """Complex circulating tank current ``V / (R + j w0 L)``."""
    _positive(V_tx=V_tx, L=L, f0=f0)
    if R < 0:
        raise ParameterError("R must be >= 0")
    return V_tx / complex(R, 2 * math.pi * f0 * L)


def resistance_at_temperature(R_ref, T, T_ref=T_REF, alpha=COPPER_ALPHA):
    return R_ref * (1.0 + alpha * (T - T_ref))


def estimate_trace_resistance(length, width, thickness, frequency, material=COPPER):
    """Rough AC resistance of a PCB trace (approximate).

    Current is confined to one skin depth under the trace perimeter; the
    cross-section never exceeds the DC one.  Proximity effect is ignored.
    """
    _positive(length=length, width=width, thickness=thickness)
    d = skin_depth(frequency, material)
    area = min(width * thickness, 2 * d * (width + thickness))
    return length / (material.sigma * area)


@dataclass(frozen=True)
class LcDesign:
    L_tx: float
    C_tx: float
    R_tx: float
    f0: float
    V_tx: float
    I_tx: float
    I_lc: complex

    @property
    def omega(self):
        return 2 * math.pi * self.f0

    def as_row(self):
        return {"L_tx_H": self.L_tx, "C_tx_F": self.C_tx, "R_tx_ohm": self.R_tx,
                "f0_Hz": self.f0, "V_tx_V": self.V_tx, "I_tx_A": self.I_tx,
                "I_lc_abs_A": abs(self.I_lc),
                "I_lc_phase_deg": math.degrees(cmath.phase(self.I_lc))}


def design_lc(L_tx, R_tx, V_tx, f0_target, series="E12"):
    """Pick ``C_tx`` from the series and evaluate the resulting operating point."""
    cap = required_capacitance(L_tx, f0_target, R_tx, series)
    res = resonant_frequency(L_tx, cap.C_series, R_tx)
    return LcDesign(L_tx=L_tx, C_tx=cap.C_series, R_tx=R_tx, f0=res.f0, V_tx=V_tx,
                    I_tx=driving_current(V_tx, R_tx, cap.C_series, L_tx),
                    I_lc=lc_current(V_tx, R_tx, L_tx, res.f0))


def winding_tradeoff_table(base: LcDesign, N_range, driver_limit=None):
    """Scale a one-winding design to other winding counts.

    Uses L ~ N^2, R ~ N, I_TX ~ 1/N, I_LC ~ 1/N^2 and an excitation field
    ~ N I_LC ~ 1/N.  Rows whose drive current exceeds ``driver_limit`` are
    flagged.
    """
    N_range = list(N_range)
    if not N_range:
        raise ParameterError("N_range is empty")
    rows = []
    for N in N_range:
        if N < 1:
            raise ParameterError("winding counts must be >= 1")
        I_tx = base.I_tx / N
        rows.append({
            "N": int(N),
            "L_tx_H": base.L_tx * N**2,
            "R_tx_ohm": base.R_tx * N,
            "I_tx_A": I_tx,
            "I_lc_A": abs(base.I_lc) / N**2,
            "field_rel": 1.0 / N,
            "exceeds_driver_limit": bool(driver_limit is not None and I_tx > driver_limit),
        })
    return rows


def fit_power_law(x, y):
    """Least-squares exponent ``k`` of ``y ~ x^k``."""
    k, _ = np.polyfit(np.log(np.asarray(x, float)), np.log(np.abs(np.asarray(y, float))), 1)
    return float(k)
