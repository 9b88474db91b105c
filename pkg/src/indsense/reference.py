"""The p = 5 sample sensor: three series RX windings per phase, a 45/27 mm
stainless-steel target with 3 mm thick wings at 1 mm air gap."""
from __future__ import annotations

from dataclasses import replace

from .circuit import STAINLESS_14301
from .geometry import RxShapeSpec, TargetSpec, TxCoilSpec
from .pipeline import SensorDesign


def reference_design(coarse=False, **overrides) -> SensorDesign:
    """Sample design; ``coarse`` halves every discretisation for quick runs."""
    tx = TxCoilSpec(r_start=24e-3, N=5, pitch=0.5e-3, trace_width=0.2e-3,
                    segments=180 if coarse else 360)
    rx = RxShapeSpec(p=5, r_inner=13.5e-3, r_outer=22.5e-3, n_w=3, n_phases=2,
                     points_per_electrical_period=32 if coarse else 64,
                     layer_z=(0.0, 0.1e-3))
    target = TargetSpec(p=5, d_outer=45e-3, d_inner=27e-3, thickness=3e-3,
                        material=STAINLESS_14301, air_gap=1e-3,
                        arc_points=24 if coarse else 48)
    design = SensorDesign(tx=tx, rx=rx, target=target, V_tx=20.0, R_tx=2.0, f0_target=5e6)
    return replace(design, **overrides) if overrides else design
