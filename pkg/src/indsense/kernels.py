"""Neumann double-sum kernels over straight filament segments.

Every segment pair contributes ``(u_a . u_b) * int_a int_b ds_a ds_b / |r|``.
The inner integral along segment ``b`` is taken in closed form,

    int_b ds / |P - r(s)| = 2 atanh(l_b / (R1 + R2)),

with ``R1``, ``R2`` the distances from ``P`` to the endpoints of ``b``; the
outer integral along ``a`` uses Gauss-Legendre nodes (8 for close pairs, 3
for intermediate ones).  Well separated pairs use the midpoint rule with its
second-order Taylor correction, which needs no transcendental calls.

For the self-inductance of one filament the kernel is softened to
``1 / sqrt(|r|^2 + g^2)`` with ``g`` the conductor's geometric mean distance,
whose inner integral is ``asinh((l_b - s0)/rho) + asinh(s0/rho)`` with
``rho^2 = h^2 + g^2`` (``h`` the distance from ``P`` to the line of ``b``,
``s0`` its foot point).  The same kernel gives the diagonal terms, so the
double sum stays consistent as segments shrink below ``g``.

Two interchangeable backends are provided: a numba ``@njit`` loop nest and a
vectorised numpy version.  The numba path is used unless the environment
variable ``INDSENSE_NUMBA`` is set to ``0`` (or numba is not importable).
"""
from __future__ import annotations

import math
import os

import numpy as np

_flag = os.environ.get("INDSENSE_NUMBA", "1").strip().lower()
try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and _flag not in ("0", "false", "no", "off")

# Distance tiers, as multiples of (l_a + l_b) between segment midpoints.
NEAR_RATIO = 2.0
MID_RATIO = 6.0


def _gauss(n):
    x, w = np.polynomial.legendre.leggauss(n)
    return np.ascontiguousarray((x + 1.0) / 2.0), np.ascontiguousarray(w / 2.0)


NEAR_NODES, NEAR_WEIGHTS = _gauss(8)
MID_NODES, MID_WEIGHTS = _gauss(3)


def _segment_sum_py(a0, a1, b0, b1, skip_diagonal,
                    nt, nw, mt, mw, near_ratio, mid_ratio, soft2):
    total = 0.0
    min_dist = np.inf
    na = a0.shape[0]
    nb = b0.shape[0]
    for i in range(na):
        ax = a0[i, 0]
        ay = a0[i, 1]
        az = a0[i, 2]
        dax = a1[i, 0] - ax
        day = a1[i, 1] - ay
        daz = a1[i, 2] - az
        la = math.sqrt(dax * dax + day * day + daz * daz)
        if la == 0.0:
            continue
        cx = ax + 0.5 * dax
        cy = ay + 0.5 * day
        cz = az + 0.5 * daz
        for j in range(nb):
            if skip_diagonal and i == j:
                continue
            bx = b0[j, 0]
            by = b0[j, 1]
            bz = b0[j, 2]
            dbx = b1[j, 0] - bx
            dby = b1[j, 1] - by
            dbz = b1[j, 2] - bz
            dot = dax * dbx + day * dby + daz * dbz
            if dot == 0.0:
                continue
            lb = math.sqrt(dbx * dbx + dby * dby + dbz * dbz)
            if lb == 0.0:
                continue
            mx = bx + 0.5 * dbx - cx
            my = by + 0.5 * dby - cy
            mz = bz + 0.5 * dbz - cz
            d = math.sqrt(mx * mx + my * my + mz * mz)
            span = la + lb
            near = d <= near_ratio * span
            if d > mid_ratio * span:
                # midpoint rule with its second-order Taylor correction
                inv = 1.0 / math.sqrt(d * d + soft2)
                ca_ = (dax * mx + day * my + daz * mz) * inv / la
                cb_ = (dbx * mx + dby * my + dbz * mz) * inv / lb
                corr = (la * la * (3.0 * ca_ * ca_ - 1.0)
                        + lb * lb * (3.0 * cb_ * cb_ - 1.0)) * inv * inv / 24.0
                total += dot * inv * (1.0 + corr)
                continue
            if near:
                nodes = nt
                weights = nw
            else:
                nodes = mt
                weights = mw
            s = 0.0
            for q in range(nodes.shape[0]):
                t = nodes[q]
                px = ax + t * dax
                py = ay + t * day
                pz = az + t * daz
                ex = px - bx
                ey = py - by
                ez = pz - bz
                r1 = math.sqrt(ex * ex + ey * ey + ez * ez)
                fx = px - b1[j, 0]
                fy = py - b1[j, 1]
                fz = pz - b1[j, 2]
                r2 = math.sqrt(fx * fx + fy * fy + fz * fz)
                if near:
                    tp = (ex * dbx + ey * dby + ez * dbz) / (lb * lb)
                    if tp < 0.0:
                        tp = 0.0
                    elif tp > 1.0:
                        tp = 1.0
                    hx = ex - tp * dbx
                    hy = ey - tp * dby
                    hz = ez - tp * dbz
                    h = math.sqrt(hx * hx + hy * hy + hz * hz)
                    if h < min_dist:
                        min_dist = h
                if soft2 > 0.0:
                    s0 = (ex * dbx + ey * dby + ez * dbz) / lb
                    rho2 = r1 * r1 - s0 * s0
                    if rho2 < 0.0:
                        rho2 = 0.0
                    rho = math.sqrt(rho2 + soft2)
                    s += weights[q] * (math.asinh((lb - s0) / rho) + math.asinh(s0 / rho))
                    continue
                ratio = lb / (r1 + r2)
                if ratio >= 1.0:
                    # node lies on segment b: the integral diverges
                    return np.inf, 0.0
                s += weights[q] * 2.0 * math.atanh(ratio)
            total += dot / lb * s
    return total, min_dist


if USE_NUMBA:
    _segment_sum_jit = njit(cache=True, nogil=True)(_segment_sum_py)
else:
    _segment_sum_jit = None


def _segment_sum_np(a0, a1, b0, b1, skip_diagonal,
                    nt, nw, mt, mw, near_ratio, mid_ratio, soft2):
    da = a1 - a0
    db = b1 - b0
    la = np.sqrt(np.einsum("ij,ij->i", da, da))
    lb = np.sqrt(np.einsum("ij,ij->i", db, db))
    ca = a0 + 0.5 * da
    cb = b0 + 0.5 * db
    nb = b0.shape[0]
    total = 0.0
    min_dist = np.inf
    chunk = max(1, 200_000 // max(nb, 1))
    for start in range(0, a0.shape[0], chunk):
        sl = slice(start, start + chunk)
        dot = da[sl] @ db.T
        keep = (dot != 0.0) & (la[sl, None] > 0.0) & (lb[None, :] > 0.0)
        if skip_diagonal:
            rows = np.arange(sl.start, sl.start + dot.shape[0])
            keep &= rows[:, None] != np.arange(nb)[None, :]
        dist = np.linalg.norm(ca[sl, None, :] - cb[None, :, :], axis=2)
        span = la[sl, None] + lb[None, :]
        near = keep & (dist <= near_ratio * span)
        mid = keep & ~near & (dist <= mid_ratio * span)
        far = keep & ~near & ~mid
        ii, jj = np.nonzero(far)
        if ii.size:
            ii_abs = ii + sl.start
            m = cb[jj] - ca[ii_abs]
            d = dist[ii, jj]
            inv = 1.0 / np.sqrt(d * d + soft2)
            ca_ = np.einsum("ij,ij->i", da[ii_abs], m) * inv / la[ii_abs]
            cb_ = np.einsum("ij,ij->i", db[jj], m) * inv / lb[jj]
            corr = (la[ii_abs]**2 * (3 * ca_**2 - 1) + lb[jj]**2 * (3 * cb_**2 - 1)) * inv**2 / 24
            total += float(np.sum(dot[ii, jj] * inv * (1.0 + corr)))
        for mask, nodes, weights, track in ((near, nt, nw, True),
                                            (mid, mt, mw, False)):
            ii, jj = np.nonzero(mask)
            if ii.size == 0:
                continue
            ii_abs = ii + sl.start
            pa0 = a0[ii_abs]
            pda = da[ii_abs]
            pb0 = b0[jj]
            pb1 = b1[jj]
            pdb = db[jj]
            plb = lb[jj]
            s = np.zeros(ii.size)
            for t, w in zip(nodes, weights):
                p = pa0 + t * pda
                e = p - pb0
                r1 = np.sqrt(np.einsum("ij,ij->i", e, e))
                f = p - pb1
                r2 = np.sqrt(np.einsum("ij,ij->i", f, f))
                if track:
                    tp = np.clip(np.einsum("ij,ij->i", e, pdb) / plb**2, 0.0, 1.0)
                    h = np.linalg.norm(e - tp[:, None] * pdb, axis=1)
                    min_dist = min(min_dist, float(h.min()))
                if soft2 > 0.0:
                    s0 = np.einsum("ij,ij->i", e, pdb) / plb
                    rho = np.sqrt(np.maximum(r1 * r1 - s0 * s0, 0.0) + soft2)
                    s += w * (np.arcsinh((plb - s0) / rho) + np.arcsinh(s0 / rho))
                    continue
                ratio = plb / (r1 + r2)
                if np.any(ratio >= 1.0):
                    return np.inf, 0.0
                s += w * 2.0 * np.arctanh(ratio)
            total += float(np.sum(dot[ii, jj] / plb * s))
    return total, min_dist


def segment_sum(a0, a1, b0, b1, skip_diagonal=False, backend=None, soft=0.0):
    """One-sided Neumann sum ``sum_ij (dl_i . dl_j) <1/r>_ij`` (no mu0/4pi).

    Parameters
    ----------
    a0, a1, b0, b1 : ndarray, shape (n, 3)
        Segment start and end points of the two filaments.
    skip_diagonal : bool
        Omit pairs ``i == j`` (self-inductance of one filament).
    backend : {"numba", "numpy", None}
        ``None`` follows the ``INDSENSE_NUMBA`` selection.
    soft : float
        Kernel softening length (m); 0 gives the plain filament kernel.

    Returns
    -------
    total : float
        Sum in metres.  ``inf`` when a quadrature node lies on a segment.
    min_dist : float
        Smallest node-to-segment distance seen among near pairs.
    """
    if backend is None:
        backend = "numba" if USE_NUMBA else "numpy"
    args = (np.ascontiguousarray(a0, dtype=np.float64),
            np.ascontiguousarray(a1, dtype=np.float64),
            np.ascontiguousarray(b0, dtype=np.float64),
            np.ascontiguousarray(b1, dtype=np.float64),
            bool(skip_diagonal),
            NEAR_NODES, NEAR_WEIGHTS, MID_NODES, MID_WEIGHTS, NEAR_RATIO, MID_RATIO,
            float(soft) ** 2)
    if backend == "numba":
        if _segment_sum_jit is None:
            raise RuntimeError("numba backend requested but unavailable")
        total, min_dist = _segment_sum_jit(*args)
    elif backend == "numpy":
        total, min_dist = _segment_sum_np(*args)
    else:
        raise ValueError(f"unknown backend {backend!r}")
    return float(total), float(min_dist)


def straight_self_inductance(length, gmd):
    """Partial self-inductance of a straight conductor (H) with the given GMD.

    Exact for a filament bundle whose geometric mean distance is ``gmd``;
    reduces to ``mu0 l / 2pi (ln(2l/g) - 1)`` for ``l >> g``.
    """
    length = np.asarray(length, dtype=float)
    g = float(gmd)
    ratio = g / length
    return 2e-7 * length * (np.log((length + np.sqrt(length**2 + g**2)) / g)
                            - np.sqrt(1.0 + ratio**2) + ratio)
