"""Figures for gap sweeps, rendered to files with the Agg backend."""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def _varying(reports) -> str:
    """The sweep axis: whichever of ``d``/``k`` takes more than one value."""
    ds = {r.d for r in reports}
    ks = {r.k for r in reports}
    return "k" if len(ks) > len(ds) else "d"


def plot_ratio(reports, path, axis=None) -> Path:
    axis = axis or _varying(reports)
    fig, ax = plt.subplots(figsize=(5, 3.5))
    series = {}
    for r in reports:
        fixed = (r.k, r.m) if axis == "d" else (r.d, r.m)
        series.setdefault(fixed, []).append((getattr(r, axis), float(r.ratio)))
    for fixed, pts in sorted(series.items()):
        pts.sort()
        label = f"k={fixed[0]}, m={fixed[1]}" if axis == "d" else f"d={fixed[0]}, m={fixed[1]}"
        ax.plot([p[0] for p in pts], [p[1] for p in pts], marker="o", label=label)
    ax.axhline(1.5 if axis == "d" else 2.0, color="grey", linestyle="--", linewidth=0.8)
    ax.set_xlabel(axis)
    ax.set_ylabel("integral / LP")
    ax.legend(fontsize=7)
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def plot_residual(report, path) -> Path:
    fig, ax = plt.subplots(figsize=(5, 3.5))
    loads = [report.m - float(v) for v in report.residual_loads]
    ax.bar(range(1, len(loads) + 1), loads, color="tab:blue")
    ax.axhline(report.m, color="grey", linestyle="--", linewidth=0.8)
    ax.set_xlabel("slot")
    ax.set_ylabel("fractional load")
    ax.set_ylim(max(0, report.m - 2), report.m + 0.5)
    ax.set_title(f"k={report.k}, d={report.d}, m={report.m}", fontsize=9)
    fig.tight_layout()
    path = Path(path)
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def write_plot_data(reports, path, axis=None) -> Path:
    axis = axis or _varying(reports)
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["k", "d", "m", axis + "_axis", "ratio", "ratio_float"])
        for r in sorted(reports, key=lambda r: r.key):
            w.writerow([r.k, r.d, r.m, getattr(r, axis), f"{r.ratio.numerator}/{r.ratio.denominator}",
                        f"{float(r.ratio):.6f}"])
    return path


def render_gap_figures(reports, stem) -> list:
    """Ratio figure, its data CSV, and a residual-load figure for the largest row."""
    stem = Path(stem)
    axis = _varying(reports)
    out = [plot_ratio(reports, stem.with_name(stem.name + f".ratio_vs_{axis}.png"), axis),
           write_plot_data(reports, stem.with_name(stem.name + f".ratio_vs_{axis}.csv"), axis)]
    last = max(reports, key=lambda r: r.key)
    out.append(plot_residual(last, stem.with_name(stem.name + ".residual.png")))
    return out
