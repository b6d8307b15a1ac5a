"""Render sweep grids into the four figure styles.

Continuous quantities (q*, misalignment gap, throttle gain) get a
continuous scale, with a diverging palette centered at zero for the two
signed ones; policy maps get a categorical palette with a discrete
legend.  Infeasible cells are blanked.  Overlay curves are recomputed
from the game config document (the same JSON the sweep consumed) under
the standard figure convention: axis 1 is the cost-of-pass gap at fixed
c1, axis 2 is the abandonment penalty.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np
from matplotlib.colors import BoundaryNorm, ListedColormap, TwoSlopeNorm
from matplotlib.patches import Patch

from .grids import SchemaError, SweepGrid, load_sweep

BLANK_COLOR = "#d9d9d9"

POLICY_LABELS = (
    "model 1, no cascade",
    "model 1, partial cascade",
    "model 1, full cascade",
    "model 2",
)
POLICY_COLORS = ("#4c78a8", "#72b7b2", "#54a24b", "#e45756")


class FigureKind(str, Enum):
    USER_HEATMAP = "user-heatmap"
    POLICY_REGIONS = "policy-regions"
    MISALIGN_HEATMAP = "misalign-heatmap"
    THROTTLE_HEATMAP = "throttle-heatmap"


@dataclass(frozen=True)
class PlotSpec:
    """What to render: a sweep CSV, a figure kind, and an output path."""

    csv_path: str
    kind: FigureKind
    out_path: str
    overlay_config: str | None = None  # JSON config for analytic threshold curves
    pinned_s: float | None = None  # cascade level pinned during the sweep, if any
    dpi: int = 150


@dataclass(frozen=True)
class RenderInfo:
    """What was rendered, for idempotency and legend checks."""

    out_path: str
    width_px: int
    height_px: int
    legend_labels: tuple[str, ...]
    overlays: tuple[str, ...]
    blanked_cells: int


def _edges(centers: np.ndarray) -> np.ndarray:
    centers = np.asarray(centers, dtype=float)
    if len(centers) == 1:
        half = 0.5 if centers[0] == 0.0 else 0.5 * abs(centers[0])
        return np.array([centers[0] - half, centers[0] + half])
    mids = 0.5 * (centers[:-1] + centers[1:])
    first = centers[0] - (mids[0] - centers[0])
    last = centers[-1] + (centers[-1] - mids[-1])
    return np.concatenate([[first], mids, [last]])


def _policy_codes(grid: SweepGrid) -> np.ndarray:
    i_star = grid.values["i_star"]
    s_star = grid.values["s_star"]
    codes = np.full(grid.shape, np.nan)
    m1 = i_star == 1
    codes[m1 & (s_star <= 1e-9)] = 0
    codes[m1 & (s_star > 1e-9) & (s_star < 1.0 - 1e-9)] = 1
    codes[m1 & (s_star >= 1.0 - 1e-9)] = 2
    codes[i_star == 2] = 3
    return codes


def _config_values(path: str) -> dict[str, float]:
    data = json.loads(Path(path).read_text())
    required = {"p1", "p2", "t1", "t2", "c1", "c2", "V", "P"}
    missing = required - set(data)
    if missing:
        raise SchemaError(
            f"overlay config {path} is missing field(s): {', '.join(sorted(missing))}"
        )
    return {k: float(data[k]) for k in required}


def _overlay_curves(
    spec: PlotSpec, grid: SweepGrid
) -> list[tuple[np.ndarray, np.ndarray, dict, str]]:
    """Analytic threshold curves under the (cost-gap, penalty) convention."""
    if spec.overlay_config is None:
        return []
    cfg = _config_values(spec.overlay_config)
    p1, p2, c1 = cfg["p1"], cfg["p2"], cfg["c1"]
    cop1 = c1 / p1
    gaps = np.asarray(grid.a1, dtype=float)
    curves: list[tuple[np.ndarray, np.ndarray, dict, str]] = []

    if spec.kind is FigureKind.THROTTLE_HEATMAP:
        # The dashed penalty threshold: P = min{c1/p1, c2/p2} = cop1 - max(gap, 0).
        line = cop1 - np.maximum(gaps, 0.0)
        curves.append((gaps, line, dict(ls="--", color="black", lw=1.5), "P = min cost-of-pass"))
        return curves

    if spec.kind in (FigureKind.POLICY_REGIONS, FigureKind.MISALIGN_HEATMAP):
        regimes = grid.regimes_present()
        if "NegPos" in regimes:
            xi1 = cfg["V"] * p1 - cfg["t1"]
            xi2 = cfg["V"] * p2 - cfg["t2"]
            s0 = -xi1 / (xi2 / p2 - xi1)
            pos = gaps[gaps > 0.0]
            if pos.size:
                p1_curve = ((cop1 - pos) - c1) / (1.0 - p1)
                curves.append((pos, p1_curve, dict(ls="-.", color="black", lw=1.5), "P1 threshold"))
            neg = gaps[gaps < 0.0]
            if neg.size:
                p2_curve = (c1 * (1.0 - s0) + (cop1 - neg) * s0) / (p1 + (1.0 - p1) * s0)
                curves.append((neg, p2_curve, dict(ls=":", color="black", lw=1.8), "P2 threshold"))
        if "PosNeg" in regimes:
            # The cascade region exits at P = min{c1/p1, (c2-c1)/(p2-p1)}.
            incr = (p2 * (cop1 - gaps) - c1) / (p2 - p1)
            line = np.minimum(cop1, incr)
            curves.append((gaps, line, dict(ls="--", color="black", lw=1.5), "cascade exit"))
        return curves

    if spec.kind is FigureKind.USER_HEATMAP and spec.pinned_s:
        # Stay/abandon split of the NegPos quadrant: s0(xi1, xi2) = pinned s,
        # a ray xi2 = -xi1 * (1 - s) * p2 / s through the origin.
        xi1 = gaps[gaps < 0.0]
        if xi1.size:
            ray = -xi1 * (1.0 - spec.pinned_s) * p2 / spec.pinned_s
            curves.append((xi1, ray, dict(ls="--", color="black", lw=1.5), "stay/abandon split"))
    return curves


def render(spec: PlotSpec) -> RenderInfo:
    """Draw the figure and write a raster image; the CSV is only read."""
    grid = load_sweep(spec.csv_path)
    x_edges = _edges(grid.a1)
    y_edges = _edges(grid.a2)

    fig, ax = plt.subplots(figsize=(6.0, 4.8))
    legend_labels: tuple[str, ...] = ()

    if spec.kind is FigureKind.USER_HEATMAP:
        data = np.ma.masked_invalid(grid.values["q_star"].T)
        cmap = plt.get_cmap("viridis").copy()
        cmap.set_bad(BLANK_COLOR)
        mesh = ax.pcolormesh(x_edges, y_edges, data, cmap=cmap, vmin=0.0, vmax=1.0)
        fig.colorbar(mesh, ax=ax, label="abandonment probability q*")
        ax.set_title("user best response")
    elif spec.kind is FigureKind.POLICY_REGIONS:
        codes = np.ma.masked_invalid(_policy_codes(grid).T)
        cmap = ListedColormap(POLICY_COLORS)
        cmap.set_bad(BLANK_COLOR)
        norm = BoundaryNorm(np.arange(-0.5, 4.5), cmap.N)
        ax.pcolormesh(x_edges, y_edges, codes, cmap=cmap, norm=norm)
        present = sorted({int(v) for v in codes.compressed()})
        handles = [Patch(color=POLICY_COLORS[k], label=POLICY_LABELS[k]) for k in present]
        ax.legend(handles=handles, loc="upper right", fontsize=8, framealpha=0.9)
        legend_labels = tuple(POLICY_LABELS[k] for k in present)
        ax.set_title("provider-optimal policy")
    else:
        name = "delta_U" if spec.kind is FigureKind.MISALIGN_HEATMAP else "throttle_gain"
        data = np.ma.masked_invalid(grid.values[name].T)
        span = float(np.max(np.abs(data))) if data.count() else 1.0
        span = span if span > 0.0 else 1.0
        cmap = plt.get_cmap("RdBu_r").copy()
        cmap.set_bad(BLANK_COLOR)
        norm = TwoSlopeNorm(vcenter=0.0, vmin=-span, vmax=span)
        mesh = ax.pcolormesh(x_edges, y_edges, data, cmap=cmap, norm=norm)
        label = "misalignment gap" if name == "delta_U" else "throttling gain"
        fig.colorbar(mesh, ax=ax, label=label)
        ax.set_title(label)

    overlays = []
    for x, y, style, label in _overlay_curves(spec, grid):
        ax.plot(x, y, label=label, **style)
        overlays.append(label)
    if overlays:
        ax.legend(loc="upper right", fontsize=8, framealpha=0.9)
        if not legend_labels:
            legend_labels = tuple(overlays)
    ax.set_xlim(x_edges[0], x_edges[-1])
    ax.set_ylim(y_edges[0], y_edges[-1])
    ax.set_xlabel("a1")
    ax.set_ylabel("a2")

    fig.savefig(spec.out_path, dpi=spec.dpi)
    width_in, height_in = fig.get_size_inches()
    plt.close(fig)
    return RenderInfo(
        out_path=str(spec.out_path),
        width_px=round(width_in * spec.dpi),
        height_px=round(height_in * spec.dpi),
        legend_labels=legend_labels,
        overlays=tuple(overlays),
        blanked_cells=grid.infeasible_count,
    )
