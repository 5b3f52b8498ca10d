"""SVG figures for a metrics report: one file per panel plus a 2x2 overview."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
from matplotlib import rcParams
from matplotlib.backends.backend_svg import FigureCanvasSVG
from matplotlib.figure import Figure

from .simeval import MetricsReport

# name, report attribute, title, y label
PANELS = (
    ("energy", "power_series", "Instantaneous energy rate", "cost units / s"),
    ("accel", "accel_norm", "Acceleration over time", "|qdd| (rad/s$^2$)"),
    ("cumulative", "cumulative_energy", "Cumulative energy", "cost units"),
    ("velocity", "velocity_magnitude", "Velocity magnitude over time", "|qd| (rad/s)"),
)

# SVG user units are points (1/72 in): this gives an 800 x 600 viewBox
FIGSIZE = (800 / 72, 600 / 72)
DPI = 72


def _save(fig: Figure, path: Path) -> Path:
    # fixed id salt and no timestamp keep repeated runs byte-identical
    rcParams["svg.hashsalt"] = "trajenergy"
    FigureCanvasSVG(fig).print_svg(str(path), metadata={"Date": None})
    return path


def _draw(ax, report: MetricsReport, attr: str, title: str, ylabel: str) -> None:
    ax.plot(report.time, getattr(report, attr), lw=1.2)
    ax.set_title(title)
    ax.set_xlabel("time (s)")
    ax.set_ylabel(ylabel)
    ax.grid(True, alpha=0.3)


def write_panels(report: MetricsReport, out_dir) -> list[Path]:
    """Write energy.svg, accel.svg, cumulative.svg, velocity.svg and metrics.svg."""
    out_dir = Path(out_dir)
    written = []
    for name, attr, title, ylabel in PANELS:
        fig = Figure(figsize=FIGSIZE, dpi=DPI)
        _draw(fig.add_subplot(111), report, attr, title, ylabel)
        fig.tight_layout()
        written.append(_save(fig, out_dir / f"{name}.svg"))

    fig = Figure(figsize=FIGSIZE, dpi=DPI)
    for k, (_, attr, title, ylabel) in enumerate(PANELS):
        _draw(fig.add_subplot(2, 2, k + 1), report, attr, title, ylabel)
    fig.tight_layout()
    written.append(_save(fig, out_dir / "metrics.svg"))
    return written
