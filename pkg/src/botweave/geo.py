"""Geospatial binning, anomaly detection, uniformity testing, and mobility stats.

Tweets are binned into 1-degree by 1-degree cells keyed by the floor of their
coordinates.  A rectangle anomaly is a 4-connected blob of cells whose counts
sit in a configured low band; blobs are reported with their cell-aligned
bounding boxes so a synthetic "blanket" of faked locations shows up as a box
with straight borders.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

from scipy.stats import chi2 as _chi2

from .errors import ParameterError
from .models import GeoPoint, GeoRect, UserRecord

EARTH_RADIUS_KM = 6371.0

Cell = tuple[int, int]


@dataclass(frozen=True)
class GeoGrid:
    """Counts of geotagged tweets per (floor(lat), floor(lon)) cell."""

    cells: dict[Cell, int] = field(default_factory=dict)

    @property
    def total(self) -> int:
        return sum(self.cells.values())

    def count(self, cell: Cell) -> int:
        return self.cells.get(cell, 0)


@dataclass(frozen=True)
class AnomalyRegion:
    box: GeoRect
    n_cells: int
    fill_ratio: float
    mean_count: float


@dataclass(frozen=True)
class UniformityResult:
    statistic: float
    p_value: float
    df: int
    n_cells: int
    n_groups: int


@dataclass(frozen=True)
class RectSplit:
    in_first: int
    in_second: int
    elsewhere: int

    @property
    def total(self) -> int:
        return self.in_first + self.in_second + self.elsewhere


def cell_of(p: GeoPoint) -> Cell:
    """Cell containing a point; the lat = 90 edge clamps into the 89 row."""
    lat = min(math.floor(p.lat), 89)
    lon = math.floor(p.lon)
    return (int(lat), int(lon))


def bin_tweets(users: Iterable[UserRecord]) -> GeoGrid:
    cells: dict[Cell, int] = {}
    for u in users:
        for t in u.tweets:
            if t.geo is not None:
                c = cell_of(t.geo)
                cells[c] = cells.get(c, 0) + 1
    return GeoGrid(cells)


def haversine(a: GeoPoint, b: GeoPoint) -> float:
    """Great-circle distance in km on a sphere of mean Earth radius."""
    lat1, lat2 = math.radians(a.lat), math.radians(b.lat)
    dlat = lat2 - lat1
    dlon = math.radians(b.lon - a.lon)
    s = math.sin(dlat / 2) ** 2 + math.cos(lat1) * math.cos(lat2) * math.sin(dlon / 2) ** 2
    return 2.0 * EARTH_RADIUS_KM * math.asin(min(1.0, math.sqrt(s)))


# Distance histogram bin edges (km): a zero bucket, then log-spaced up to
# past the antipodal maximum.
def distance_bin_edges(n: int = 48) -> tuple[float, ...]:
    lo, hi = -1.0, math.log10(20100.0)
    edges = [0.0] + [10 ** (lo + (hi - lo) * i / (n - 1)) for i in range(n)]
    return tuple(edges)


@dataclass(frozen=True)
class GroupDistanceStats:
    count: int
    mean_km: float
    hist: tuple[int, ...]


@dataclass(frozen=True)
class DistanceStats:
    per_user_mean: dict[int, float]
    groups: dict[str, GroupDistanceStats]
    bin_edges: tuple[float, ...]


def _histogram(values: Sequence[float], edges: Sequence[float]) -> tuple[int, ...]:
    counts = [0] * (len(edges) - 1)
    for v in values:
        # linear scan is fine: len(edges) is small and values are bounded
        for i in range(len(edges) - 1):
            if edges[i] <= v < edges[i + 1] or (i == len(edges) - 2 and v >= edges[i + 1]):
                counts[i] += 1
                break
    return tuple(counts)


def consecutive_distance_stats(
    users: Iterable[UserRecord],
    bot_ids: Optional[set[int]] = None,
    bin_edges: Optional[Sequence[float]] = None,
) -> DistanceStats:
    """Per-user mean distance between consecutive geotagged tweets.

    Users with fewer than two geotagged tweets are excluded.  Users are
    grouped by their label when present, else by membership in ``bot_ids``
    (defaulting to "real" when neither is available).
    """
    edges = tuple(bin_edges) if bin_edges is not None else distance_bin_edges()
    per_user: dict[int, float] = {}
    group_values: dict[str, list[float]] = {}
    for u in users:
        geo = u.geo_tweets()
        if len(geo) < 2:
            continue
        dists = [haversine(geo[i].geo, geo[i + 1].geo) for i in range(len(geo) - 1)]
        mean = sum(dists) / len(dists)
        per_user[u.user_id] = mean
        if u.label is not None:
            key = u.label
        elif bot_ids is not None:
            key = "bot" if u.user_id in bot_ids else "real"
        else:
            key = "real"
        group_values.setdefault(key, []).append(mean)
    groups = {
        key: GroupDistanceStats(
            count=len(vals),
            mean_km=sum(vals) / len(vals),
            hist=_histogram(vals, edges),
        )
        for key, vals in sorted(group_values.items())
    }
    return DistanceStats(per_user_mean=per_user, groups=groups, bin_edges=edges)


def _cells_inside(rect: GeoRect) -> list[Cell]:
    """Cells lying entirely within the rectangle, row-major order."""
    lat_lo = math.ceil(rect.lat_min)
    lat_hi = math.floor(rect.lat_max - 1)
    lon_lo = math.ceil(rect.lon_min)
    lon_hi = math.floor(rect.lon_max - 1)
    return [(i, j)
            for i in range(lat_lo, lat_hi + 1)
            for j in range(lon_lo, lon_hi + 1)]


def uniformity_test(grid: GeoGrid, rect: GeoRect, min_expected: float = 5.0) -> UniformityResult:
    """Chi-square goodness of fit of per-cell counts against a uniform spread.

    When the per-cell expected count falls below ``min_expected`` the cells
    are pooled into equal consecutive groups (standard practice for keeping
    the chi-square approximation honest); pooling preserves the uniform null
    exactly.  Raises when even pooling cannot produce two groups at the
    threshold.
    """
    cells = _cells_inside(rect)
    n_cells = len(cells)
    if n_cells < 2:
        raise ParameterError("rectangle must contain at least 2 whole cells")
    total = sum(grid.count(c) for c in cells)
    if total < 2 * min_expected:
        raise ParameterError(
            f"insufficient data for uniformity test: need expected count >= {min_expected} "
            f"in at least 2 groups, have {total} tweets over {n_cells} cells")
    per_cell = total / n_cells
    if per_cell >= min_expected:
        group_sizes = [1] * n_cells
    else:
        g = math.ceil(min_expected * n_cells / total)
        n_groups = n_cells // g
        group_sizes = [g] * n_groups
        for i in range(n_cells - g * n_groups):  # spread the remainder
            group_sizes[i % n_groups] += 1
    stat = 0.0
    pos = 0
    for size in group_sizes:
        observed = sum(grid.count(c) for c in cells[pos:pos + size])
        expected = total * size / n_cells
        stat += (observed - expected) ** 2 / expected
        pos += size
    df = len(group_sizes) - 1
    p = float(_chi2.sf(stat, df))
    return UniformityResult(statistic=stat, p_value=p, df=df,
                            n_cells=n_cells, n_groups=len(group_sizes))


def detect_rectangles(
    grid: GeoGrid,
    baseline: Optional[GeoGrid] = None,
    low_band: tuple[int, int] = (1, 9),
    min_cells: int = 25,
    min_fill: float = 0.8,
    baseline_max: int = 0,
) -> list[AnomalyRegion]:
    """Find rectangular blobs of low-count cells.

    A cell is flagged when its count lies in ``low_band`` and, if a baseline
    grid is given, the baseline count there is at most ``baseline_max``.
    Flagged cells are grouped by 4-connectivity; components with at least
    ``min_cells`` cells and a bounding-box fill ratio of at least ``min_fill``
    are reported, largest first.
    """
    lo, hi = low_band
    flagged = {c for c, n in grid.cells.items()
               if lo <= n <= hi and (baseline is None or baseline.count(c) <= baseline_max)}
    regions: list[AnomalyRegion] = []
    remaining = set(flagged)
    while remaining:
        seed = remaining.pop()
        comp = [seed]
        queue = [seed]
        while queue:
            i, j = queue.pop()
            for nb in ((i + 1, j), (i - 1, j), (i, j + 1), (i, j - 1)):
                if nb in remaining:
                    remaining.remove(nb)
                    comp.append(nb)
                    queue.append(nb)
        if len(comp) < min_cells:
            continue
        lat_lo = min(c[0] for c in comp)
        lat_hi = max(c[0] for c in comp)
        lon_lo = min(c[1] for c in comp)
        lon_hi = max(c[1] for c in comp)
        box_cells = (lat_hi - lat_lo + 1) * (lon_hi - lon_lo + 1)
        fill = len(comp) / box_cells
        if fill < min_fill:
            continue
        mean_count = sum(grid.count(c) for c in comp) / len(comp)
        regions.append(AnomalyRegion(
            box=GeoRect(lat_min=float(lat_lo), lat_max=float(lat_hi + 1),
                        lon_min=float(lon_lo), lon_max=float(lon_hi + 1)),
            n_cells=len(comp),
            fill_ratio=fill,
            mean_count=mean_count,
        ))
    regions.sort(key=lambda r: (-r.n_cells, r.box.lat_min, r.box.lon_min))
    return regions


def rect_split_stats(users: Iterable[UserRecord], rects: tuple[GeoRect, GeoRect]) -> RectSplit:
    """Classify every geotagged tweet as in rect A, rect B, or elsewhere."""
    a, b = rects
    if a.overlaps(b):
        raise ParameterError("rectangles overlap; split counts would be ambiguous")
    in_a = in_b = elsewhere = 0
    for u in users:
        for t in u.tweets:
            if t.geo is None:
                continue
            if a.contains(t.geo):
                in_a += 1
            elif b.contains(t.geo):
                in_b += 1
            else:
                elsewhere += 1
    return RectSplit(in_first=in_a, in_second=in_b, elsewhere=elsewhere)


def users_tweeting_inside(users: Iterable[UserRecord], boxes: Sequence[GeoRect]) -> list[int]:
    """IDs of users with at least one geotagged tweet inside any box, ascending."""
    hits = []
    for u in users:
        for t in u.tweets:
            if t.geo is not None and any(box.contains(t.geo) for box in boxes):
                hits.append(u.user_id)
                break
    return sorted(hits)


def loglog_tail_r2(
    values: Sequence[float], tail_frac: float = 0.4, trim_top: float = 0.005
) -> tuple[float, float]:
    """(slope, R^2) of a straight-line fit to the empirical CCDF tail, log-log.

    ``tail_frac`` selects the upper quantile of the data to fit;
    ``trim_top`` drops the extreme order statistics where the CCDF estimate
    is too granular to be meaningful.  A heavy (power-law) tail fits a
    straight line; a thin tail bends away from one.
    """
    vals = sorted(v for v in values if v > 0)
    n = len(vals)
    start = int(n * (1.0 - tail_frac))
    stop = int(n * (1.0 - trim_top))
    if stop - start < 10:
        raise ParameterError("too few tail points for a log-log fit")
    xs = [math.log(vals[i]) for i in range(start, stop)]
    ys = [math.log((n - i) / n) for i in range(start, stop)]
    m = len(xs)
    mean_x = sum(xs) / m
    mean_y = sum(ys) / m
    sxx = sum((x - mean_x) ** 2 for x in xs)
    sxy = sum((x - mean_x) * (y - mean_y) for x, y in zip(xs, ys))
    slope = sxy / sxx
    intercept = mean_y - slope * mean_x
    ss_res = sum((y - (slope * x + intercept)) ** 2 for x, y in zip(xs, ys))
    ss_tot = sum((y - mean_y) ** 2 for y in ys)
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 0.0
    return slope, r2


def is_unimodal(values: Sequence[float], bins: int = 20, smooth: int = 3) -> bool:
    """True when the smoothed histogram of the values has one interior peak."""
    vals = list(values)
    if len(vals) < 2:
        return True
    lo, hi = min(vals), max(vals)
    if hi <= lo:
        return True
    counts = [0] * bins
    for v in vals:
        i = min(int((v - lo) / (hi - lo) * bins), bins - 1)
        counts[i] += 1
    half = smooth // 2
    smoothed = [
        sum(counts[max(0, i - half):i + half + 1]) / len(counts[max(0, i - half):i + half + 1])
        for i in range(bins)
    ]
    peaks = 0
    for i in range(1, bins - 1):
        if smoothed[i] > smoothed[i - 1] and smoothed[i] >= smoothed[i + 1]:
            peaks += 1
    return peaks <= 1


def rect_jaccard(a: GeoRect, b: GeoRect) -> float:
    """Area Jaccard overlap of two rectangles in squared degrees."""
    ilat = max(0.0, min(a.lat_max, b.lat_max) - max(a.lat_min, b.lat_min))
    ilon = max(0.0, min(a.lon_max, b.lon_max) - max(a.lon_min, b.lon_min))
    inter = ilat * ilon
    area_a = (a.lat_max - a.lat_min) * (a.lon_max - a.lon_min)
    area_b = (b.lat_max - b.lat_min) * (b.lon_max - b.lon_min)
    union = area_a + area_b - inter
    return inter / union if union > 0 else 0.0


def write_grid_csv(path, grid: GeoGrid) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write("lat_cell,lon_cell,count\n")
        for (i, j) in sorted(grid.cells):
            f.write(f"{i},{j},{grid.cells[(i, j)]}\n")


def read_grid_csv(path) -> GeoGrid:
    cells: dict[Cell, int] = {}
    with open(path, encoding="utf-8") as f:
        f.readline()
        for line in f:
            line = line.strip()
            if line:
                i, j, n = line.split(",")
                cells[(int(i), int(j))] = int(n)
    return GeoGrid(cells)
