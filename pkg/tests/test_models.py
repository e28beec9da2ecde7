from datetime import datetime, timedelta, timezone

from botweave.models import (
    Dataset,
    FollowGraph,
    GeoPoint,
    GeoRect,
    Tweet,
    UserRecord,
    validate_dataset,
)

UTC = timezone.utc


def make_user(uid=1, tweets=(), **kw):
    defaults = dict(
        user_id=uid,
        screen_name=f"user{uid}",
        language="en",
        created_at=datetime(2013, 1, 1, tzinfo=UTC),
        followers_count=0,
        friends_count=0,
        tweets=tuple(tweets),
    )
    defaults.update(kw)
    return UserRecord(**defaults)


def make_tweet(text="hello world", minutes=0, geo=None):
    return Tweet(text=text, ts=datetime(2013, 6, 1, tzinfo=UTC) + timedelta(minutes=minutes),
                 source="Twitter Web Client", geo=geo)


def test_valid_dataset_has_no_violations():
    ds = Dataset(users=(make_user(1, [make_tweet()]), make_user(2)))
    assert validate_dataset(ds) == []


def test_self_loop_edge_is_one_violation():
    ds = Dataset(users=(make_user(1),), graph=FollowGraph.from_pairs([(5, 5)]))
    violations = validate_dataset(ds)
    assert len(violations) == 1
    assert "self-loop" in violations[0]


def test_empty_tweet_text_is_violation():
    ds = Dataset(users=(make_user(1, [make_tweet(text="")]),))
    violations = validate_dataset(ds)
    assert len(violations) == 1
    assert "empty text" in violations[0]
    assert "user 1" in violations[0]


def test_duplicate_user_id_reported():
    ds = Dataset(users=(make_user(7), make_user(7)))
    assert any("duplicate" in v for v in validate_dataset(ds))


def test_negative_counters_reported():
    ds = Dataset(users=(make_user(1, followers_count=-1),))
    assert any("followers_count" in v for v in validate_dataset(ds))


def test_unordered_tweets_reported():
    tweets = [make_tweet(minutes=5), make_tweet(minutes=1)]
    ds = Dataset(users=(make_user(1, tweets),))
    assert any("ordered" in v for v in validate_dataset(ds))


def test_equal_timestamps_are_a_violation():
    tweets = [make_tweet(minutes=1), make_tweet(minutes=1)]
    ds = Dataset(users=(make_user(1, tweets),))
    assert any("ordered" in v for v in validate_dataset(ds))


def test_geo_out_of_range_reported():
    ds = Dataset(users=(make_user(1, [make_tweet(geo=GeoPoint(95.0, 0.0))]),))
    assert any("lat out of range" in v for v in validate_dataset(ds))


def test_unknown_source_and_label_reported():
    t = Tweet(text="x", ts=datetime(2013, 1, 2, tzinfo=UTC), source="Carrier Pigeon")
    ds = Dataset(users=(make_user(1, [t], label="cyborg"),))
    msgs = validate_dataset(ds)
    assert any("unknown source" in v for v in msgs)
    assert any("label" in v for v in msgs)


def test_rect_contains_is_closed():
    rect = GeoRect(lat_min=25.0, lat_max=50.0, lon_min=-125.0, lon_max=-65.0)
    assert rect.contains(GeoPoint(25.0, -125.0))
    assert rect.contains(GeoPoint(50.0, -65.0))
    assert not rect.contains(GeoPoint(50.0001, -65.0))


def test_rect_overlap_detection():
    a = GeoRect(0, 10, 0, 10)
    b = GeoRect(10, 20, 10, 20)  # touching corners counts as overlap
    c = GeoRect(11, 20, 11, 20)
    assert a.overlaps(b)
    assert not a.overlaps(c)


def test_follow_graph_degrees():
    g = FollowGraph.from_pairs([(1, 2), (1, 3), (2, 3)])
    assert g.out_degrees() == {1: 2, 2: 1}
    assert g.in_degrees() == {2: 1, 3: 2}
    assert len(g) == 3
