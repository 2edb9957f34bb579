"""Report figures rendered to PNG files.

Every function takes precomputed data plus a target path and writes a single
PNG; nothing here opens a window (Agg backend).  Figures accompany the
delimited outputs so a run's results can be eyeballed without extra tooling.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .curves import CurveSource, Polyline, sample_curve  # noqa: E402

DPI = 130


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=DPI)
    plt.close(fig)


def _plot_curve_3d(ax, curve: CurveSource, samples: int = 512, **kw):
    ts = np.linspace(0.0, 1.0, samples)
    pts = np.atleast_2d(curve.eval(ts))
    ax.plot(pts[:, 0], pts[:, 1], pts[:, 2], **kw)


def _plot_polyline_3d(ax, p: Polyline, **kw):
    verts = p.vertices
    if p.closed:
        verts = np.vstack([verts, verts[:1]])
    ax.plot(verts[:, 0], verts[:, 1], verts[:, 2], **kw)


def save_overlay_figure(curve: CurveSource, p: Polyline, path, title: str = "") -> None:
    """Curve and inscribed polyline in one 3D view."""
    fig = plt.figure(figsize=(6, 5))
    ax = fig.add_subplot(projection="3d")
    _plot_curve_3d(ax, curve, color="tab:blue", lw=1.2, label="curve")
    _plot_polyline_3d(ax, p, color="tab:orange", lw=1.0, marker="o",
                      markersize=2.5, label="polyline")
    ax.legend(loc="upper left", fontsize=8)
    if title:
        ax.set_title(title, fontsize=10)
    _save(fig, path)


def save_margin_figure(certificate, path) -> None:
    """Per-window margins of a certificate as grouped bars."""
    segs = certificate.per_segment
    x = np.arange(len(segs))
    fig, ax = plt.subplots(figsize=(max(6, 0.5 * len(segs)), 4))
    width = 0.2
    series = [
        ("budget", [s.budget_margin for s in segs]),
        ("containment", [s.containment_margin for s in segs]),
        ("endpoint", [s.endpoint_margin for s in segs]),
        ("hausdorff", [s.hausdorff_margin for s in segs]),
    ]
    for i, (label, vals) in enumerate(series):
        vals = [v if np.isfinite(v) else 0.0 for v in vals]
        ax.bar(x + (i - 1.5) * width, vals, width, label=label)
    ax.axhline(0.0, color="k", lw=0.8)
    ax.set_xlabel("window")
    ax.set_ylabel("signed margin")
    ax.set_title(f"certificate margins (passed={certificate.passed})", fontsize=10)
    ax.legend(fontsize=8)
    _save(fig, path)


def save_convergence_figure(indices, margins, path, found=None) -> None:
    """Minimum certificate margin against sequence index."""
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(indices, margins, marker="o", ms=3)
    ax.axhline(0.0, color="k", lw=0.8)
    if found is not None:
        ax.axvline(found, color="tab:green", lw=1.0, ls="--", label=f"N = {found}")
        ax.legend(fontsize=8)
    ax.set_xlabel("index i")
    ax.set_ylabel("min margin")
    ax.set_title("approximant certification margins", fontsize=10)
    _save(fig, path)


def save_curvature_figure(curve: CurveSource, path, samples: int = 1024) -> None:
    """Pointwise curvature profile over the parameter domain."""
    from .curvature import curvature_at

    inset = 1e-6
    pieces = [0.0] + [float(b) for b in curve.breakpoints] + [1.0]
    fig, ax = plt.subplots(figsize=(6, 4))
    for lo, hi in zip(pieces[:-1], pieces[1:]):
        ts = np.linspace(lo + inset, hi - inset, max(16, int(samples * (hi - lo))))
        ax.plot(ts, curvature_at(curve, ts), color="tab:blue", lw=1.0)
    ax.set_xlabel("t")
    ax.set_ylabel("curvature")
    ax.set_title(f"curvature profile: {curve.name or 'curve'}", fontsize=10)
    _save(fig, path)


def save_tube_figure(tube, path) -> None:
    """The three tube-radius bounds next to the chosen radius."""
    labels = ["1/kappa_max", "d_min/2", "r_end", "r chosen"]
    kappa_bound = np.inf if tube.kappa_max <= 0 else 1.0 / tube.kappa_max
    vals = [kappa_bound, tube.d_min / 2.0, tube.r_end, tube.r]
    shown = [v if np.isfinite(v) else 0.0 for v in vals]
    fig, ax = plt.subplots(figsize=(5, 4))
    bars = ax.bar(labels, shown, color=["tab:blue"] * 3 + ["tab:green"])
    for bar, v in zip(bars, vals):
        txt = "inf" if not np.isfinite(v) else f"{v:.4g}"
        ax.text(bar.get_x() + bar.get_width() / 2, bar.get_height(), txt,
                ha="center", va="bottom", fontsize=8)
    ax.set_ylabel("length")
    ax.set_title(f"tube radius bounds (safety {tube.safety:g})", fontsize=10)
    _save(fig, path)


def save_push_figure(trace, path, every: int = 10) -> None:
    """Selected frames of a push trace, early frames faded."""
    frames = trace.frames
    fig = plt.figure(figsize=(6, 5))
    ax = fig.add_subplot(projection="3d")
    shown = list(range(0, len(frames), max(1, int(every))))
    if shown and shown[-1] != len(frames) - 1:
        shown.append(len(frames) - 1)
    for pos, fi in enumerate(shown):
        alpha = 0.25 + 0.75 * (pos / max(1, len(shown) - 1))
        _plot_polyline_3d(ax, frames[fi], color="tab:purple", alpha=alpha, lw=1.0)
    ax.set_title(f"push trace ({len(frames)} frames)", fontsize=10)
    _save(fig, path)
