import math
import random

import pytest
from scipy import stats as scipy_stats

from botweave.errors import ParameterError
from botweave.geo import (
    GeoGrid,
    bin_tweets,
    cell_of,
    consecutive_distance_stats,
    detect_rectangles,
    haversine,
    is_unimodal,
    loglog_tail_r2,
    read_grid_csv,
    rect_jaccard,
    rect_split_stats,
    uniformity_test,
    users_tweeting_inside,
    write_grid_csv,
)
from botweave.generator import GenParams, fake_location
from botweave.models import GeoPoint, GeoRect
from botweave.rng import substream

from test_models import make_tweet, make_user

RECTS = GenParams().rects


# ---------------------------------------------------------------- binning

def test_floor_convention():
    assert cell_of(GeoPoint(51.5, -0.12)) == (51, -1)
    assert cell_of(GeoPoint(-0.5, 0.5)) == (-1, 0)


def test_lat_90_clamps_into_89_row():
    assert cell_of(GeoPoint(90.0, 10.0)) == (89, 10)


def test_single_point_mass():
    tweets = [make_tweet(minutes=i, geo=GeoPoint(40.5, -74.5)) for i in range(1000)]
    grid = bin_tweets([make_user(1, tweets)])
    assert grid.cells == {(40, -75): 1000}
    assert grid.total == 1000


def test_binning_conserves_mass(mini_dataset):
    n_geo = sum(len(u.geo_tweets()) for u in mini_dataset.users)
    grid = bin_tweets(mini_dataset.users)
    assert grid.total == n_geo
    assert all(n >= 1 for n in grid.cells.values())


def test_non_geotagged_tweets_ignored():
    grid = bin_tweets([make_user(1, [make_tweet()])])
    assert grid.cells == {}


# ---------------------------------------------------------------- haversine

def test_haversine_zero_iff_equal():
    p = GeoPoint(12.3, -45.6)
    assert haversine(p, p) == 0.0
    assert haversine(p, GeoPoint(12.3, -45.7)) > 0


def test_haversine_antipodal_half_circumference():
    # independent oracle: half circumference = pi * R
    expected = math.pi * 6371.0
    assert abs(haversine(GeoPoint(0, 0), GeoPoint(0, 179.999999)) - expected) < 0.01
    assert abs(expected - 20015.086796) < 1e-5


def test_haversine_quarter_circumference():
    expected = math.pi * 6371.0 / 2.0
    assert abs(haversine(GeoPoint(0, 0), GeoPoint(0, 90)) - expected) < 0.01
    assert abs(haversine(GeoPoint(0, 0), GeoPoint(90, 0)) - expected) < 0.01


def test_haversine_symmetry_and_triangle_inequality():
    rng = random.Random(99)
    for _ in range(300):
        pts = [GeoPoint(rng.uniform(-90, 90), rng.uniform(-180, 180)) for _ in range(3)]
        a, b, c = pts
        assert abs(haversine(a, b) - haversine(b, a)) < 1e-9
        assert haversine(a, c) <= haversine(a, b) + haversine(b, c) + 1e-6


# ------------------------------------------------- consecutive distances

def test_identical_geotags_mean_zero():
    p = GeoPoint(10.0, 10.0)
    user = make_user(1, [make_tweet(minutes=0, geo=p), make_tweet(minutes=1, geo=p)])
    stats = consecutive_distance_stats([user])
    assert stats.per_user_mean[1] == 0.0


def test_single_pair_quarter_circumference():
    user = make_user(1, [make_tweet(minutes=0, geo=GeoPoint(0, 0)),
                         make_tweet(minutes=1, geo=GeoPoint(0, 90))])
    stats = consecutive_distance_stats([user])
    assert abs(stats.per_user_mean[1] - 10007.5434) < 0.01


def test_users_with_fewer_than_two_geotags_excluded():
    users = [make_user(1, [make_tweet(geo=GeoPoint(0, 0))]),
             make_user(2, [make_tweet()])]
    stats = consecutive_distance_stats(users)
    assert stats.per_user_mean == {}


def test_histogram_mass_equals_eligible_users(mini_dataset):
    stats = consecutive_distance_stats(mini_dataset.users)
    eligible = sum(1 for u in mini_dataset.users if len(u.geo_tweets()) >= 2)
    assert sum(sum(g.hist) for g in stats.groups.values()) == eligible
    assert len(stats.per_user_mean) == eligible


def test_non_geotagged_between_geotags_does_not_break_pairs():
    user = make_user(1, [make_tweet(minutes=0, geo=GeoPoint(0, 0)),
                         make_tweet(minutes=1),
                         make_tweet(minutes=2, geo=GeoPoint(0, 90))])
    stats = consecutive_distance_stats([user])
    assert abs(stats.per_user_mean[1] - 10007.5434) < 0.01


# ---------------------------------------------------------------- uniformity

def test_uniformity_exact_equal_counts():
    rect = GeoRect(0, 2, 0, 3)
    grid = GeoGrid({(i, j): 7 for i in range(2) for j in range(3)})
    r = uniformity_test(grid, rect)
    assert r.statistic == 0.0
    assert r.p_value > 0.999


def test_uniformity_of_fake_location_draws():
    rng = substream(7, "uniformity-oracle")
    pts = [fake_location(RECTS, rng) for _ in range(100_000)]
    grid = bin_tweets([make_user(1, [make_tweet(minutes=i, geo=p)
                                     for i, p in enumerate(pts)])])
    for rect in RECTS:
        mine = uniformity_test(grid, rect)
        assert mine.p_value > 0.01
        # oracle: same observed vector through scipy's chisquare
        cells = [(i, j)
                 for i in range(math.ceil(rect.lat_min), math.floor(rect.lat_max - 1) + 1)
                 for j in range(math.ceil(rect.lon_min), math.floor(rect.lon_max - 1) + 1)]
        observed = [grid.count(c) for c in cells]
        stat, p = scipy_stats.chisquare(observed)
        assert abs(stat - mine.statistic) < 1e-6
        assert abs(p - mine.p_value) < 1e-9


def test_uniformity_pools_sparse_cells():
    # 2 tweets per cell is below the validity threshold; pooling kicks in
    rect = GeoRect(0, 10, 0, 10)
    grid = GeoGrid({(i, j): 2 for i in range(10) for j in range(10)})
    r = uniformity_test(grid, rect)
    assert r.n_groups < r.n_cells
    assert r.p_value > 0.99  # exactly equal counts stay uniform after pooling


def test_uniformity_insufficient_data_errors():
    rect = GeoRect(0, 2, 0, 2)
    grid = GeoGrid({(0, 0): 3})
    with pytest.raises(ParameterError, match=">= 5"):
        uniformity_test(grid, rect)


def test_city_spike_is_detected_as_non_uniform():
    rect = GeoRect(0, 5, 0, 5)
    cells = {(i, j): 5 for i in range(5) for j in range(5)}
    cells[(2, 2)] = 500
    r = uniformity_test(GeoGrid(cells), rect)
    assert r.p_value < 1e-10


# ---------------------------------------------------------------- detection

def test_detect_empty_grid_returns_nothing():
    assert detect_rectangles(GeoGrid({})) == []


def test_detect_constructed_uniform_box():
    rng = random.Random(5)
    cells = {(i, j): rng.randint(1, 9)
             for i in range(30, 60) for j in range(-120, -60)}
    regions = detect_rectangles(GeoGrid(cells))
    assert len(regions) == 1
    box = regions[0].box
    assert (box.lat_min, box.lat_max, box.lon_min, box.lon_max) == (30, 60, -120, -60)
    assert regions[0].fill_ratio == 1.0
    assert regions[0].n_cells == 30 * 60


def test_detect_ignores_dense_clusters():
    cells = {(i, j): 50 for i in range(10) for j in range(10)}
    assert detect_rectangles(GeoGrid(cells)) == []


def test_detect_respects_baseline():
    cells = {(i, j): 5 for i in range(40) for j in range(40)}
    grid = GeoGrid(cells)
    # with the same grid as baseline nothing is anomalous
    assert detect_rectangles(grid, baseline=grid) == []
    assert len(detect_rectangles(grid, baseline=GeoGrid({}))) == 1


def test_detect_min_cells_and_fill():
    small = {(i, j): 3 for i in range(4) for j in range(4)}
    assert detect_rectangles(GeoGrid(small), min_cells=25) == []
    # an L-shape fills its bounding box poorly
    lshape = {(i, 0): 1 for i in range(30)}
    lshape.update({(0, j): 1 for j in range(30)})
    assert detect_rectangles(GeoGrid(lshape), min_cells=10, min_fill=0.8) == []


# ---------------------------------------------------------------- rect split

def test_split_all_in_first_rect():
    tweets = [make_tweet(minutes=i, geo=GeoPoint(40.0, -100.0)) for i in range(5)]
    split = rect_split_stats([make_user(1, tweets)], RECTS)
    assert (split.in_first, split.in_second, split.elsewhere) == (5, 0, 0)


def test_split_corner_point_counts_inside():
    corner = GeoPoint(RECTS[0].lat_min, RECTS[0].lon_min)
    split = rect_split_stats([make_user(1, [make_tweet(geo=corner)])], RECTS)
    assert split.in_first == 1


def test_split_rejects_overlapping_rects():
    with pytest.raises(ParameterError, match="overlap"):
        rect_split_stats([], (GeoRect(0, 10, 0, 10), GeoRect(5, 15, 5, 15)))


def test_users_tweeting_inside():
    inside = make_user(1, [make_tweet(geo=GeoPoint(40, -100))])
    outside = make_user(2, [make_tweet(geo=GeoPoint(-40, 100))])
    no_geo = make_user(3, [make_tweet()])
    assert users_tweeting_inside([outside, inside, no_geo], [RECTS[0]]) == [1]


def test_rect_jaccard():
    a = GeoRect(0, 10, 0, 10)
    assert rect_jaccard(a, a) == 1.0
    assert rect_jaccard(a, GeoRect(20, 30, 20, 30)) == 0.0
    half = GeoRect(0, 10, 0, 5)
    assert abs(rect_jaccard(a, half) - 0.5) < 1e-12


# ---------------------------------------------------------------- grid csv

def test_grid_csv_round_trip(tmp_path, mini_dataset):
    grid = bin_tweets(mini_dataset.users)
    write_grid_csv(tmp_path / "grid.csv", grid)
    assert read_grid_csv(tmp_path / "grid.csv").cells == grid.cells
    header = (tmp_path / "grid.csv").read_text().splitlines()[0]
    assert header == "lat_cell,lon_cell,count"


# ------------------------------------------------------------ shape helpers

def test_loglog_tail_r2_distinguishes_tails():
    rng = random.Random(11)
    pareto = [5.0 * rng.random() ** (-1 / 1.2) for _ in range(4000)]
    _, r2_heavy = loglog_tail_r2(pareto)
    assert r2_heavy > 0.97
    normal = [abs(rng.gauss(100, 10)) for _ in range(4000)]
    slope_n, r2_thin = loglog_tail_r2(normal)
    assert slope_n < -10  # a gaussian tail plunges in log-log


def test_is_unimodal():
    rng = random.Random(3)
    bell = [rng.gauss(0, 1) for _ in range(5000)]
    assert is_unimodal(bell)
    bimodal = [rng.gauss(-8, 1) for _ in range(2500)] + [rng.gauss(8, 1) for _ in range(2500)]
    assert not is_unimodal(bimodal)
