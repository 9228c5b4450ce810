"""Batch figure rendering from run artifacts.

Figures are deterministic: a fixed style salt, no timestamps in metadata, and
inputs are never modified, so rerunning a command reproduces identical bytes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import matplotlib
import numpy as np

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402  (backend must be fixed first)

from .io import (  # noqa: E402
    SchemaError,
    evaluate_snapshot,
    read_run_csv,
    read_snapshot,
    read_snapshot_index,
    read_sweep,
)

FIGURE_KINDS = ("snapshots", "propagation", "dissipation", "sweep")

_STYLE = {
    "svg.hashsalt": "fracthin-plots",
    "figure.figsize": (7.0, 4.5),
    "axes.grid": True,
    "grid.alpha": 0.3,
}


@dataclass
class FigureSpec:
    """What to render: input paths, figure kind, output image path."""

    kind: str
    inputs: list[str]
    output: str
    r0: float = 0.0
    reference_exponent: float = 0.0
    times: list[float] = field(default_factory=list)
    title: str = ""

    def __post_init__(self):
        if self.kind not in FIGURE_KINDS:
            raise ValueError(f"unknown figure kind {self.kind!r}; "
                             f"choose one of {FIGURE_KINDS}")


def _save(fig, output) -> list[str]:
    """Write PNG and SVG siblings without volatile metadata."""
    out = Path(output)
    out.parent.mkdir(parents=True, exist_ok=True)
    written = []
    targets = [out] if out.suffix in (".png", ".svg") else [
        out.with_suffix(".png"), out.with_suffix(".svg")]
    if len(targets) == 1:
        sibling = out.with_suffix(".svg" if out.suffix == ".png" else ".png")
        targets.append(sibling)
    for target in targets:
        meta = {"Date": None} if target.suffix == ".svg" else {}
        fig.savefig(target, metadata=meta)
        written.append(str(target))
    plt.close(fig)
    return written


def plot_propagation(csv_path, r0: float, reference_exponent: float,
                     output) -> dict:
    """Log-log support growth with the fitted and reference slopes annotated."""
    data = read_run_csv(csv_path)
    t = data["t"]
    d = data["support_radius"]
    mask = (t > 0) & (d > r0)
    if mask.sum() < 2:
        raise SchemaError(f"{csv_path}: no support motion beyond r0={r0}")
    logt = np.log(t[mask])
    logd = np.log(d[mask] - r0)
    slope, intercept = np.polyfit(logt, logd, 1)

    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots()
        ax.loglog(t[mask], d[mask] - r0, "o", ms=3, color="#1f77b4",
                  label="measured d(t) - r0")
        tt = np.geomspace(t[mask].min(), t[mask].max(), 50)
        ax.loglog(tt, np.exp(intercept) * tt**slope, "-", color="#d62728",
                  label=f"fitted slope {slope:.4f}")
        if reference_exponent > 0:
            anchor = np.exp(intercept) * tt[0] ** slope
            ax.loglog(tt, anchor * (tt / tt[0]) ** reference_exponent, "--",
                      color="#2ca02c",
                      label=f"reference slope {reference_exponent:.4f}")
        ax.set_xlabel("t")
        ax.set_ylabel("d(t) - r0")
        ax.legend()
        ax.set_title("support propagation")
        files = _save(fig, output)
    return {"fitted_slope": float(slope), "files": files}


def plot_dissipation(csv_path, output) -> dict:
    """Entropy, cumulative dissipation, and their sum (the monitored balance)."""
    data = read_run_csv(csv_path)
    t = data["t"]
    entropy = data["entropy"]
    diss = data["dissipation"]
    balance = entropy + diss
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots()
        ax.plot(t, entropy, label="entropy", color="#1f77b4")
        ax.plot(t, diss, label="cumulative dissipation", color="#ff7f0e")
        ax.plot(t, balance, label="entropy + dissipation", color="#2ca02c")
        if np.isfinite(balance[0]):
            band = 0.01 * abs(balance[0])
            ax.fill_between(t, balance[0] - band, balance[0] + band,
                            color="#2ca02c", alpha=0.15,
                            label="1% balance band")
        ax.set_xlabel("t")
        ax.set_ylabel("value")
        ax.legend()
        ax.set_title("entropy balance")
        files = _save(fig, output)
    drift = float(np.nanmax(np.abs(balance - balance[0])))
    return {"balance_drift": drift, "files": files}


def plot_snapshots(snapshot_dir, times, output) -> dict:
    """Profiles (1D) or heatmaps (2D) at the snapshots nearest the given times."""
    snaps = read_snapshot_index(snapshot_dir)
    available = np.asarray([s["t"] for s in snaps])
    wanted = list(times) if times else list(available[:: max(1, len(available) // 6)])
    picks = []
    for tw in wanted:
        k = int(np.argmin(np.abs(available - tw)))
        if k not in picks:
            picks.append(k)
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots()
        dim = None
        for k in picks:
            geometry, coeffs = read_snapshot(Path(snapshot_dir) / snaps[k]["file"])
            dim = geometry["dimension"]
            axes, vals = evaluate_snapshot(geometry, coeffs)
            if dim == 1:
                ax.plot(axes[0], vals, label=f"t = {snaps[k]['t']:.4g}")
            else:
                im = ax.imshow(vals.T, origin="lower", aspect="auto",
                               extent=(0, geometry["lengths"][0],
                                       0, geometry["lengths"][1]))
                fig.colorbar(im, ax=ax)
                ax.set_title(f"u at t = {snaps[k]['t']:.4g}")
                break
        if dim == 1:
            ax.set_xlabel("x")
            ax.set_ylabel("u")
            ax.legend()
            ax.set_title("solution snapshots")
        files = _save(fig, output)
    return {"times": [snaps[k]["t"] for k in picks], "files": files}


def plot_sweep(sweep_path, output) -> dict:
    """Summary panels: fitted vs predicted exponents and waiting times."""
    rows = read_sweep(sweep_path)
    idx = [r.get("index", i) for i, r in enumerate(rows)]
    fitted = np.asarray([float(r.get("fitted_exponent", "nan")) for r in rows])
    predicted = np.asarray([float(r.get("predicted_exponent", "nan")) for r in rows])
    waiting = np.asarray([float(r.get("waiting_time", "nan")) for r in rows])
    with plt.rc_context(_STYLE):
        fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4.2))
        ax1.plot(idx, fitted, "o-", label="fitted exponent")
        ax1.plot(idx, predicted, "s--", label="predicted 1/(n d + 2(s+1))")
        ax1.set_xlabel("sweep row")
        ax1.set_ylabel("exponent")
        ax1.legend()
        ax2.plot(idx, waiting, "o-", color="#9467bd")
        ax2.set_xlabel("sweep row")
        ax2.set_ylabel("waiting time")
        fig.suptitle("sweep summary")
        files = _save(fig, output)
    return {"rows": len(rows), "files": files}


def render(spec: FigureSpec) -> dict:
    if spec.kind == "propagation":
        return plot_propagation(spec.inputs[0], spec.r0,
                                spec.reference_exponent, spec.output)
    if spec.kind == "dissipation":
        return plot_dissipation(spec.inputs[0], spec.output)
    if spec.kind == "snapshots":
        return plot_snapshots(spec.inputs[0], spec.times, spec.output)
    return plot_sweep(spec.inputs[0], spec.output)
