"""Compare the numba and numpy Neumann kernels on sample-design workloads.

    python benchmarks/bench_kernels.py [--repeat 5]

Prints best-of-N wall time per backend and the difference of the results
relative to the sum of absolute per-pair contributions, which should sit at
rounding level.  (TX x RX cancels to ~0 by design, so a plain relative
difference would be meaningless there.)
"""
import argparse
import time

import numpy as np

from indsense import kernels
from indsense.emsolver import assemble
from indsense.geometry import make_target
from indsense.reference import reference_design


def _best(fn, repeat):
    out = None
    best = float("inf")
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t)
    return best, out


def _abs_scale(a0, a1, b0, b1):
    """Midpoint-rule sum of |dl_a . dl_b| / r, skipping coincident midpoints."""
    da, db = a1 - a0, b1 - b0
    r = np.linalg.norm((a0 + 0.5 * da)[:, None] - (b0 + 0.5 * db)[None], axis=2)
    dot = np.abs(da @ db.T)
    return float(np.sum(np.divide(dot, r, out=np.zeros_like(r), where=r > 0)))


def workloads():
    design = reference_design()
    geometry = design.geometry()
    tx = geometry.tx[0]
    rx = geometry.rx[0][0]
    wing = make_target(design.target)[0]
    yield "TX winding x RX winding", tx.segments() + rx.segments(), False
    yield "TX winding x target wing", tx.segments() + wing.segments(), False
    yield "RX winding x target wing", rx.segments() + wing.segments(), False
    yield "TX winding self terms", tx.segments() + tx.segments(), True
    yield "target wing self terms", wing.segments() + wing.segments(), True


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    backends = ["numpy"] + (["numba"] if kernels.HAVE_NUMBA else [])
    if "numba" in backends:
        a0, a1, b0, b1 = next(workloads())[1]
        kernels.segment_sum(a0[:4], a1[:4], b0[:4], b1[:4], backend="numba")  # compile

    print(f"{'workload':28s} {'pairs':>9s} " + " ".join(f"{b + ' [ms]':>12s}" for b in backends)
          + f" {'rel diff':>10s}")
    for name, (a0, a1, b0, b1), skip in workloads():
        times, values = [], []
        scale = _abs_scale(a0, a1, b0, b1)
        for b in backends:
            t, (v, _) = _best(lambda: kernels.segment_sum(a0, a1, b0, b1, skip, backend=b),
                              args.repeat)
            times.append(t)
            values.append(v)
        diff = abs(values[-1] - values[0]) / scale
        print(f"{name:28s} {len(a0) * len(b0):9d} "
              + " ".join(f"{t * 1e3:12.2f}" for t in times) + f" {diff:10.2e}")

    design = reference_design()
    geometry = design.geometry()
    drive = design.drive(geometry)
    for b in backends:
        t, _ = _best(lambda: assemble(geometry, design.target, drive.f0, R_tx=drive.R_tx,
                                      backend=b), max(1, args.repeat // 2))
        print(f"one full pose (assemble), {b}: {t:.3f} s")


if __name__ == "__main__":
    main()
