import json
import random
from datetime import datetime, timezone

import pytest

from botweave.dataset_io import (
    load_dataset,
    read_labels,
    read_meta,
    save_dataset,
    strip_labels,
    write_labels,
    write_meta,
)
from botweave.errors import DataFormatError
from botweave.models import Dataset, validate_dataset

from test_models import make_tweet, make_user

UTC = timezone.utc


def _write_users(path, lines):
    (path / "users.ndjson").write_text("\n".join(lines) + "\n")
    (path / "edges.tsv").write_text("")


def _user_line(uid, **extra):
    obj = {"id": uid, "screen_name": f"u{uid}", "lang": "en",
           "created_at": "2013-01-01T00:00:00Z",
           "followers_count": 0, "friends_count": 0, "tweets": []}
    obj.update(extra)
    return json.dumps(obj)


def test_load_three_valid_lines(tmp_path):
    _write_users(tmp_path, [_user_line(1), _user_line(2), _user_line(3)])
    ds = load_dataset(tmp_path)
    assert [u.user_id for u in ds.users] == [1, 2, 3]


def test_load_rejects_out_of_range_latitude(tmp_path):
    bad = _user_line(2, tweets=[{"text": "x", "ts": "2013-01-02T00:00:00Z",
                                 "source": "Mobile Web", "lat": 95.0, "lon": 0.0}])
    _write_users(tmp_path, [_user_line(1), bad])
    with pytest.raises(DataFormatError, match=r"line 2.*lat.*range"):
        load_dataset(tmp_path)


def test_load_rejects_duplicate_user_id(tmp_path):
    _write_users(tmp_path, [_user_line(5), _user_line(5)])
    with pytest.raises(DataFormatError, match="duplicate user_id 5"):
        load_dataset(tmp_path)


def test_load_rejects_malformed_json_with_line_number(tmp_path):
    _write_users(tmp_path, [_user_line(1), "{not json"])
    with pytest.raises(DataFormatError, match="line 2"):
        load_dataset(tmp_path)


def test_load_rejects_missing_field(tmp_path):
    obj = json.loads(_user_line(1))
    del obj["screen_name"]
    _write_users(tmp_path, [json.dumps(obj)])
    with pytest.raises(DataFormatError, match="screen_name"):
        load_dataset(tmp_path)


def test_load_rejects_bad_edge_lines(tmp_path):
    _write_users(tmp_path, [_user_line(1)])
    (tmp_path / "edges.tsv").write_text("1\t1\n")
    with pytest.raises(DataFormatError, match="self-loop"):
        load_dataset(tmp_path)
    (tmp_path / "edges.tsv").write_text("1\t2\n1\t2\n")
    with pytest.raises(DataFormatError, match="line 2.*duplicate"):
        load_dataset(tmp_path)
    (tmp_path / "edges.tsv").write_text("1,2\n")
    with pytest.raises(DataFormatError, match="tab-separated"):
        load_dataset(tmp_path)


def test_save_is_deterministic(tmp_path, mini_dataset):
    save_dataset(mini_dataset, tmp_path / "a")
    save_dataset(mini_dataset, tmp_path / "b")
    for name in ("users.ndjson", "edges.tsv", "meta.toml"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_save_is_order_stable(tmp_path, mini_dataset):
    users = list(mini_dataset.users)
    random.Random(1).shuffle(users)
    shuffled = Dataset(users=tuple(users), graph=mini_dataset.graph, meta=mini_dataset.meta)
    save_dataset(mini_dataset, tmp_path / "a")
    save_dataset(shuffled, tmp_path / "b")
    assert (tmp_path / "a" / "users.ndjson").read_bytes() == \
        (tmp_path / "b" / "users.ndjson").read_bytes()


def test_round_trip_equality(tmp_path, mini_dataset):
    # save -> load -> deep-compare, then save again -> identical bytes
    save_dataset(mini_dataset, tmp_path / "a")
    loaded = load_dataset(tmp_path / "a")
    assert loaded.users == mini_dataset.users
    assert loaded.graph == mini_dataset.graph
    assert loaded.meta == mini_dataset.meta
    assert validate_dataset(loaded) == []
    save_dataset(loaded, tmp_path / "b")
    for name in ("users.ndjson", "edges.tsv", "meta.toml"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_empty_dataset_round_trips(tmp_path):
    ds = Dataset(users=())
    save_dataset(ds, tmp_path / "empty")
    assert (tmp_path / "empty" / "users.ndjson").read_text() == ""
    assert (tmp_path / "empty" / "edges.tsv").read_text() == ""
    loaded = load_dataset(tmp_path / "empty")
    assert loaded.users == ()
    assert len(loaded.graph) == 0


def test_save_refuses_invalid_dataset(tmp_path):
    ds = Dataset(users=(make_user(1, [make_tweet(text="")]),))
    with pytest.raises(DataFormatError, match="refusing to save"):
        save_dataset(ds, tmp_path / "bad")


def test_labels_round_trip_and_strip(tmp_path, mini_dataset):
    stripped, labels = strip_labels(mini_dataset)
    assert all(u.label is None for u in stripped.users)
    assert set(labels.values()) == {"bot", "real"}
    write_labels(tmp_path / "labels.csv", labels)
    assert read_labels(tmp_path / "labels.csv") == labels
    header = (tmp_path / "labels.csv").read_text().splitlines()[0]
    assert header == "user_id,label"


def test_meta_round_trip(tmp_path):
    meta = {"seed": 7, "frac": 0.91, "tags": ["#a", "#b"], "name": "x y", "flag": True}
    write_meta(tmp_path / "meta.toml", meta)
    assert read_meta(tmp_path / "meta.toml") == meta


def test_inline_labels_survive_round_trip(tmp_path):
    ds = Dataset(users=(make_user(3, [make_tweet()], label="bot"),))
    save_dataset(ds, tmp_path / "d")
    loaded = load_dataset(tmp_path / "d")
    assert loaded.users[0].label == "bot"
