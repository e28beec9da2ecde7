"""Report figures rendered to PNG files next to the CSV bundle.

Static matplotlib output only: a world heatmap of tweet cells, per-rectangle
cell-count profiles, the consecutive-distance distributions, and the degree
distributions.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np
from matplotlib.colors import BoundaryNorm, ListedColormap

from .geo import DistanceStats, GeoGrid
from .models import GeoRect

_DPI = 110
_META = {"Software": "botweave"}


def _save(fig, path) -> None:
    fig.savefig(path, dpi=_DPI, metadata=_META)
    plt.close(fig)


def tweet_map_figure(grid: GeoGrid, rects: list[GeoRect], path) -> None:
    """World heatmap of geotagged tweets per 1-degree cell, low counts in blue."""
    world = np.zeros((180, 360))
    for (lat, lon), n in grid.cells.items():
        world[lat + 90, lon + 180] = n
    masked = np.ma.masked_where(world == 0, world)
    cmap = ListedColormap(["#2c7bb6", "#7fcdbb", "#fdae61", "#d7191c"])
    norm = BoundaryNorm([1, 10, 100, 1000, 10 ** 7], cmap.N)
    fig, ax = plt.subplots(figsize=(11, 5.5))
    ax.imshow(masked, origin="lower", extent=(-180, 180, -90, 90),
              cmap=cmap, norm=norm, interpolation="nearest", aspect="auto")
    for rect in rects:
        ax.add_patch(plt.Rectangle(
            (rect.lon_min, rect.lat_min),
            rect.lon_max - rect.lon_min, rect.lat_max - rect.lat_min,
            fill=False, edgecolor="black", linewidth=0.8, linestyle="--"))
    ax.set_xlabel("longitude")
    ax.set_ylabel("latitude")
    ax.set_title("geotagged tweets per 1x1 degree cell")
    _save(fig, path)


def cell_counts_figure(grids: dict[str, GeoGrid], rects: list[GeoRect], path) -> None:
    """Per-cell counts inside each rectangle, cells ordered by the first
    population's count so a uniform blanket shows as a flat band."""
    import math

    fig, axes = plt.subplots(1, len(rects), figsize=(11, 4), squeeze=False)
    names = list(grids)
    for k, rect in enumerate(rects):
        ax = axes[0][k]
        cells = [(i, j)
                 for i in range(math.ceil(rect.lat_min), math.floor(rect.lat_max - 1) + 1)
                 for j in range(math.ceil(rect.lon_min), math.floor(rect.lon_max - 1) + 1)]
        order = sorted(cells, key=lambda c: (grids[names[0]].count(c), c))
        for name in names:
            ax.plot([grids[name].count(c) for c in order], label=name, linewidth=0.8)
        ax.set_yscale("symlog")
        ax.set_xlabel(f"cells in rect {k + 1} (ordered by {names[0]} count)")
        ax.set_ylabel("tweets in cell")
        ax.legend()
    fig.suptitle("cell counts inside the two rectangles")
    _save(fig, path)


def distance_figure(stats: DistanceStats, path) -> None:
    """Distribution of per-user mean consecutive distances, by population."""
    fig, ax = plt.subplots(figsize=(8, 4.5))
    edges = stats.bin_edges
    centers = [(edges[i] + edges[i + 1]) / 2 for i in range(len(edges) - 1)]
    for name, g in stats.groups.items():
        total = sum(g.hist) or 1
        ax.plot(centers, [h / total for h in g.hist], label=f"{name} (n={g.count})")
        ax.axvline(g.mean_km, linestyle="--", linewidth=0.8)
    ax.set_xscale("symlog", linthresh=0.1)
    ax.set_xlabel("mean distance between consecutive geotagged tweets (km)")
    ax.set_ylabel("fraction of users")
    ax.legend()
    ax.set_title("consecutive-tweet distance distributions (dashed: population means)")
    _save(fig, path)


def degree_figure(
    hists: dict[str, tuple[dict[int, int], dict[int, int]]], path
) -> None:
    """In/out degree distributions per population, log-log."""
    fig, axes = plt.subplots(1, 2, figsize=(11, 4.5))
    for ax, which, title in ((axes[0], 0, "in-degree (followers)"),
                             (axes[1], 1, "out-degree (friends)")):
        for name, pair in hists.items():
            hist = pair[which]
            total = sum(hist.values()) or 1
            xs = sorted(hist)
            ax.plot([x + 1 for x in xs], [hist[x] / total for x in xs],
                    marker="o", markersize=2.5, linewidth=0.7, label=name)
        ax.set_xscale("log")
        ax.set_yscale("log")
        ax.set_xlabel(f"{title} + 1")
        ax.set_ylabel("fraction of users")
        ax.legend()
    fig.suptitle("degree distributions")
    _save(fig, path)
