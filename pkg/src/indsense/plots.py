"""SVG figures: Lissajous trace and angle error with its harmonic bars.

Output is reproducible: matplotlib's SVG ids are salted with a fixed string
and the date metadata is dropped.  A timestamp comment is added only on
request.
"""
from __future__ import annotations

import io
import math

import numpy as np

from .analysis import ARCSEC, ErrorCurve, HarmonicSpectrum
from .signalchain import SignalFrame


def _figure():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    matplotlib.rcParams["svg.hashsalt"] = "indsense"
    matplotlib.rcParams["svg.fonttype"] = "none"
    return plt


def _to_svg(plt, fig, timestamp):
    buf = io.StringIO()
    fig.savefig(buf, format="svg", metadata={"Date": None})
    plt.close(fig)
    text = buf.getvalue()
    if timestamp:
        head, sep, rest = text.partition("?>\n")
        text = f"{head}{sep}<!-- generated {timestamp} -->\n{rest}" if sep else text
    return text.encode("utf-8")


def lissajous_svg(frames: SignalFrame, *, timestamp=None):
    plt = _figure()
    fig, ax = plt.subplots(figsize=(4.5, 4.5))
    a = np.append(frames.a, frames.a[:1])
    b = np.append(frames.b, frames.b[:1])
    ax.plot(a, b, lw=1.0)
    t = np.linspace(0, 2 * math.pi, 361)
    ax.plot(np.cos(t), np.sin(t), lw=0.5, ls="--", color="0.6")
    ax.set_aspect("equal")
    ax.set_xlabel("a")
    ax.set_ylabel("b")
    ax.set_title("Lissajous figure")
    return _to_svg(plt, fig, timestamp)


def error_svg(curve: ErrorCurve, spectrum: HarmonicSpectrum | None = None, *, timestamp=None,
              n_bars=None):
    plt = _figure()
    rows = 2 if spectrum is not None else 1
    fig, axes = plt.subplots(rows, 1, figsize=(7, 3 * rows), squeeze=False)
    ax = axes[0, 0]
    ax.plot(np.degrees(curve.angles_mech), np.degrees(curve.error) * 3600, lw=0.8)
    ax.set_xlabel("mechanical angle (deg)")
    ax.set_ylabel("angle error (arcsec)")
    if spectrum is not None:
        ax = axes[1, 0]
        n = len(spectrum.orders) if n_bars is None else min(n_bars, len(spectrum.orders))
        ax.bar(spectrum.orders[:n], spectrum.amplitude[:n] / ARCSEC, width=0.8)
        ax.set_xlabel("mechanical order k")
        ax.set_ylabel("H_k (arcsec)")
    fig.tight_layout()
    return _to_svg(plt, fig, timestamp)
