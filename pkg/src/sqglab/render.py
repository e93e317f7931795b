"""Write-only figure output: snapshot heatmaps, ledger traces, decay plots.

Everything renders through the Agg backend straight to PNG files; there is no
interactive display path. Heatmaps use one fixed colormap, and the value range
is recorded in the PNG text metadata so renders are self-describing.
"""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .spectral import Field

HEATMAP_CMAP = "RdBu_r"


def render_heatmap(path, field: Field, title: str = "", t: float | None = None) -> dict:
    """Symmetric-range heatmap of one scalar field; returns the metadata dict."""
    vmax = float(np.abs(field.values).max()) or 1.0
    vmin = -vmax
    fig, ax = plt.subplots(figsize=(5.0, 4.2))
    im = ax.imshow(
        field.values.T,
        origin="lower",
        extent=(0.0, field.grid.L, 0.0, field.grid.L),
        cmap=HEATMAP_CMAP,
        vmin=vmin,
        vmax=vmax,
        interpolation="nearest",
    )
    label = title or "theta"
    if t is not None:
        label = f"{label}  t={t:g}"
    ax.set_title(label)
    ax.set_xlabel("x1")
    ax.set_ylabel("x2")
    fig.colorbar(im, ax=ax, shrink=0.85)
    fig.tight_layout()
    metadata = {
        "vmin": repr(vmin),
        "vmax": repr(vmax),
        "colormap": HEATMAP_CMAP,
        "n": str(field.grid.n),
        "L": repr(field.grid.L),
    }
    fig.savefig(path, dpi=130, metadata=metadata)
    plt.close(fig)
    return metadata


def render_ledger(path, ledger) -> None:
    """Time traces of the monitored norms and diagnostics."""
    t = ledger.column("t")
    fig, axes = plt.subplots(2, 2, figsize=(9, 6.5), sharex=True)
    ax = axes[0, 0]
    for name in ("linf", "l2", "lp4", "lp8"):
        ax.plot(t, ledger.column(name), label=name)
    ax.set_ylabel("norm")
    ax.legend(fontsize=8)
    ax = axes[0, 1]
    ax.plot(t, ledger.column("h_half_cum"), label="cumulative dissipation")
    aphi = ledger.column("Aphi_sup")
    if np.isfinite(aphi).any():
        ax.plot(t, aphi, label="sup windowed energy")
    ax.set_ylabel("energy")
    ax.legend(fontsize=8)
    ax = axes[1, 0]
    ax.plot(t, ledger.column("cordoba_viol"))
    ax.axhline(0.0, color="k", lw=0.6)
    ax.set_ylabel("min convexity residual")
    ax.set_xlabel("t")
    ax = axes[1, 1]
    ax.semilogy(t, np.maximum(ledger.column("divu_max"), 1e-20))
    ax.set_ylabel("max |div u|")
    ax.set_xlabel("t")
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


def render_cauchy(path, table) -> None:
    """Consecutive-distance decay across a sweep."""
    cons = table.consecutive()
    fig, ax = plt.subplots(figsize=(5.5, 4))
    ax.semilogy(np.arange(1, len(cons) + 1), np.maximum(cons, 1e-300), "o-")
    labels = [
        f"{a[0]:g},{a[1]:g} vs {b[0]:g},{b[1]:g}"
        for a, b in zip(table.labels[:-1], table.labels[1:])
    ]
    ax.set_xticks(np.arange(1, len(cons) + 1))
    ax.set_xticklabels(labels, rotation=20, fontsize=7)
    ax.set_ylabel("consecutive member distance")
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


def render_run(run_dir, traj, ledger, max_heatmaps: int = 6) -> list[str]:
    """Standard report figures for a run directory, under figures/."""
    fig_dir = os.path.join(run_dir, "figures")
    os.makedirs(fig_dir, exist_ok=True)
    written = []
    count = len(traj.times)
    picks = sorted(set(np.linspace(0, count - 1, min(max_heatmaps, count)).astype(int)))
    for i in picks:
        out = os.path.join(fig_dir, f"theta_{i:06d}.png")
        render_heatmap(out, traj.theta(i), title="theta", t=traj.times[i])
        written.append(out)
    if ledger.rows:
        out = os.path.join(fig_dir, "ledger_timeseries.png")
        render_ledger(out, ledger)
        written.append(out)
    return written
