"""Matplotlib rendering of simulation metrics (one panel per rule family)."""

from __future__ import annotations

import io
from pathlib import Path
from typing import Sequence

from matplotlib import rcParams
from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.figure import Figure

METRICS = (("q1", "Q1 successful possible"), ("q2", "Q2 harmful possible"), ("q3", "Q3 risk"))
STYLE = {"q1": ("tab:blue", "o"), "q2": ("tab:red", "s"), "q3": ("tab:green", "^")}


def metrics_figure(rows: Sequence) -> Figure:
    families = [f for f in dict.fromkeys(r.family for r in rows)
                if any(r.family == f and r.x is not None for r in rows)]
    if not families:
        raise ValueError("no rows with a numeric x to plot")
    fig = Figure(figsize=(4.2 * len(families), 3.4))
    FigureCanvasAgg(fig)
    axes = fig.subplots(1, len(families), squeeze=False)[0]
    for ax, family in zip(axes, families):
        pts = sorted((r for r in rows if r.family == family and r.x is not None), key=lambda r: r.x)
        xs = [r.x for r in pts]
        for key, label in METRICS:
            color, marker = STYLE[key]
            ax.plot(xs, [getattr(r, key) for r in pts], color=color, marker=marker, markersize=3,
                    linewidth=1.2, label=label, gid=f"{family}-{key}")
        ax.set_title(family)
        ax.set_xlabel("x")
        ax.set_ylim(bottom=0)
        ax.grid(alpha=0.3)
    axes[0].set_ylabel("fraction")
    axes[0].legend(fontsize=7, frameon=False)
    fig.tight_layout()
    return fig


def render_metrics(rows: Sequence, fmt: str = "svg") -> bytes:
    fig = metrics_figure(rows)
    buf = io.BytesIO()
    # fixed hash salt and no date keep SVG output byte-stable
    salt = rcParams["svg.hashsalt"]
    rcParams["svg.hashsalt"] = "multivote"
    try:
        metadata = {"Date": None} if fmt in ("svg", "pdf") else None
        fig.savefig(buf, format=fmt, metadata=metadata)
    finally:
        rcParams["svg.hashsalt"] = salt
    return buf.getvalue()


def write_figure(rows: Sequence, path: str | Path) -> Path:
    path = Path(path)
    fmt = path.suffix.lstrip(".").lower() or "svg"
    path.write_bytes(render_metrics(rows, fmt))
    return path
