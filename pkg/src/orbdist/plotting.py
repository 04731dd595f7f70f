"""Figures written to files next to the delimited outputs."""

from __future__ import annotations

import math
from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .critpoints import CriticalSet, grid_distance  # noqa: E402
from .orbits import MutualGeometry  # noqa: E402

STYLE = {
    "font.size": 9,
    "axes.labelsize": 9,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "figure.dpi": 120,
    "lines.markersize": 4,
}

KIND_MARKERS = {
    "minimum": dict(marker="x", color="tab:blue"),
    "maximum": dict(marker="x", color="tab:red"),
    "saddle": dict(marker="*", color="black"),
    "degenerate": dict(marker="o", color="tab:orange", mfc="none"),
}


def _save(fig, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, bbox_inches="tight")
    plt.close(fig)
    return path


def plot_level_curves(geom: MutualGeometry, cset: CriticalSet, path, n: int = 240, levels: int = 30) -> Path:
    """Contours of d^2 over the eccentric anomalies with the critical points marked."""
    with plt.rc_context(STYLE):
        d = grid_distance(geom, n)
        u = np.degrees(2.0 * math.pi * np.arange(n) / n)
        fig, ax = plt.subplots(figsize=(5.0, 4.2))
        cs = ax.contour(u, u, (d ** 2).T, levels=levels, linewidths=0.6, cmap="viridis")
        fig.colorbar(cs, ax=ax, label="$d^2$ (au$^2$)")
        seen = set()
        for p in cset.points:
            style = KIND_MARKERS.get(p.kind, KIND_MARKERS["degenerate"])
            label = p.kind if p.kind not in seen else None
            seen.add(p.kind)
            ax.plot(math.degrees(p.eccentric.v1), math.degrees(p.eccentric.v2), ls="none", label=label, **style)
        ax.set_xlabel("$u_1$ (deg)")
        ax.set_ylabel("$u_2$ (deg)")
        ax.set_xlim(0, 360)
        ax.set_ylim(0, 360)
        if seen:
            ax.legend(loc="upper center", bbox_to_anchor=(0.5, -0.14), ncol=3, frameon=False)
        ax.set_title(f"{cset.method}: {len(cset)} critical points")
        return _save(fig, path)


def plot_bound_grid(rows: Sequence, path, title: str = "") -> Path:
    """Analytic bound as a surface over (q, omega) with the empirical maxima as dots."""
    qs = np.array([r.q for r in rows])
    ws = np.degrees([r.omega for r in rows])
    with plt.rc_context(STYLE):
        fig = plt.figure(figsize=(5.5, 4.5))
        ax = fig.add_subplot(projection="3d")
        uq, uw = np.unique(qs), np.unique(ws)
        if uq.size * uw.size == len(rows) and uq.size > 1 and uw.size > 1:
            Z = np.array([r.bound for r in rows]).reshape(uq.size, uw.size)
            W, Q = np.meshgrid(uw, uq)
            ax.plot_surface(Q, W, Z, color="0.7", alpha=0.6, linewidth=0)
        ax.scatter(qs, ws, [r.empirical_max for r in rows], color="black", s=4)
        ax.set_xlabel("q (au)")
        ax.set_ylabel(r"$\omega$ (deg)")
        ax.set_zlabel("distance (au)")
        if title:
            ax.set_title(title)
        return _save(fig, path)


def plot_census(result, path) -> Path:
    """Histogram of planar critical-point counts."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(4.5, 3.0))
        ks = sorted(set(result.counts) | set(result.circular_counts))
        x = np.arange(len(ks))
        ax.bar(x - 0.2, [result.counts.get(k, 0) for k in ks], 0.4, label="ellipse-ellipse")
        ax.bar(x + 0.2, [result.circular_counts.get(k, 0) for k in ks], 0.4, label="circle-ellipse")
        ax.set_xticks(x, [str(k) for k in ks])
        ax.set_xlabel("number of critical points")
        ax.set_ylabel("pairs")
        ax.legend()
        return _save(fig, path)


def plot_failure_rates(summary: Sequence, path) -> Path:
    """Grouped bars of check-failure percentages per method."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(5.0, 3.0))
        x = np.arange(len(summary))
        for k, (attr, label) in enumerate((("w_fail", "W"), ("m_fail", "M"), ("dmin_fail", "$d_{min}$"))):
            ax.bar(x + (k - 1) * 0.25, [getattr(r, attr) for r in summary], 0.25, label=label)
        ax.set_xticks(x, [r.method.upper() for r in summary])
        ax.set_ylabel("failed checks (%)")
        ax.legend()
        return _save(fig, path)
