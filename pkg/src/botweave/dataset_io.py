"""Dataset (de)serialization.

On-disk layout is a directory of three files:

* ``users.ndjson`` -- one user object per line, tweets nested;
* ``edges.tsv``    -- ``follower<TAB>friend`` decimal IDs, one edge per line;
* ``meta.toml``    -- flat key/value parameter echo, synthetic datasets only.

Output is byte-deterministic: users are written in ascending user_id order,
edges sorted lexicographically, JSON keys in a fixed order.  Meta values are
written as ``key = <json scalar or array>``, a subset that is simultaneously
valid TOML and trivially machine-readable on Python 3.10 (which lacks
``tomllib``).
"""

from __future__ import annotations

import json
import os
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterator, Optional

from .errors import DataFormatError
from .models import Dataset, FollowGraph, GeoPoint, Tweet, UserRecord, validate_dataset

USERS_FILE = "users.ndjson"
EDGES_FILE = "edges.tsv"
META_FILE = "meta.toml"

_TS_FMT = "%Y-%m-%dT%H:%M:%SZ"


def ts_str(dt: datetime) -> str:
    return dt.astimezone(timezone.utc).strftime(_TS_FMT)


def parse_ts(s: str) -> datetime:
    return datetime.strptime(s, _TS_FMT).replace(tzinfo=timezone.utc)


def _tweet_obj(t: Tweet) -> dict:
    obj = {"text": t.text, "ts": ts_str(t.ts), "source": t.source}
    if t.geo is not None:
        obj["lat"] = t.geo.lat
        obj["lon"] = t.geo.lon
    return obj


def _user_obj(u: UserRecord) -> dict:
    obj = {
        "id": u.user_id,
        "screen_name": u.screen_name,
        "lang": u.language,
        "created_at": ts_str(u.created_at),
        "followers_count": u.followers_count,
        "friends_count": u.friends_count,
    }
    if u.label is not None:
        obj["label"] = u.label
    obj["tweets"] = [_tweet_obj(t) for t in u.tweets]
    return obj


def save_dataset(ds: Dataset, path: str | os.PathLike) -> None:
    """Write a validated dataset; identical input yields identical bytes."""
    violations = validate_dataset(ds)
    if violations:
        raise DataFormatError(
            "refusing to save invalid dataset: " + "; ".join(violations[:5]))
    root = Path(path)
    root.mkdir(parents=True, exist_ok=True)
    with open(root / USERS_FILE, "w", encoding="utf-8", newline="\n") as f:
        for u in sorted(ds.users, key=lambda x: x.user_id):
            f.write(json.dumps(_user_obj(u), separators=(",", ":")))
            f.write("\n")
    with open(root / EDGES_FILE, "w", encoding="utf-8", newline="\n") as f:
        for a, b in sorted(ds.graph.edges):
            f.write(f"{a}\t{b}\n")
    if ds.meta is not None:
        write_meta(root / META_FILE, ds.meta)


def _req(obj: dict, key: str, lineno: int):
    if key not in obj:
        raise DataFormatError(f"{USERS_FILE} line {lineno}: missing field '{key}'")
    return obj[key]


def _parse_tweet(obj: dict, lineno: int, idx: int) -> Tweet:
    where = f"{USERS_FILE} line {lineno} tweet {idx}"
    for key in ("text", "ts", "source"):
        if key not in obj:
            raise DataFormatError(f"{where}: missing field '{key}'")
    text = obj["text"]
    if not isinstance(text, str) or not text:
        raise DataFormatError(f"{where}: field 'text' must be a non-empty string")
    try:
        ts = parse_ts(obj["ts"])
    except ValueError as e:
        raise DataFormatError(f"{where}: field 'ts': {e}") from None
    geo = None
    if "lat" in obj or "lon" in obj:
        if "lat" not in obj or "lon" not in obj:
            raise DataFormatError(f"{where}: fields 'lat' and 'lon' must appear together")
        lat, lon = obj["lat"], obj["lon"]
        if not (-90.0 <= lat <= 90.0):
            raise DataFormatError(f"{where}: field 'lat' out of range [-90, 90]")
        if not (-180.0 <= lon < 180.0):
            raise DataFormatError(f"{where}: field 'lon' out of range [-180, 180)")
        geo = GeoPoint(float(lat), float(lon))
    return Tweet(text=text, ts=ts, source=obj["source"], geo=geo)


def _parse_user(line: str, lineno: int) -> UserRecord:
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as e:
        raise DataFormatError(f"{USERS_FILE} line {lineno}: invalid JSON ({e.msg})") from None
    uid = _req(obj, "id", lineno)
    if not isinstance(uid, int) or uid <= 0:
        raise DataFormatError(f"{USERS_FILE} line {lineno}: field 'id' must be a positive integer")
    for key in ("followers_count", "friends_count"):
        v = _req(obj, key, lineno)
        if not isinstance(v, int) or v < 0:
            raise DataFormatError(f"{USERS_FILE} line {lineno}: field '{key}' must be a non-negative integer")
    try:
        created = parse_ts(_req(obj, "created_at", lineno))
    except ValueError as e:
        raise DataFormatError(f"{USERS_FILE} line {lineno}: field 'created_at': {e}") from None
    tweets = []
    prev = None
    for i, tobj in enumerate(_req(obj, "tweets", lineno)):
        t = _parse_tweet(tobj, lineno, i)
        if prev is not None and t.ts <= prev:
            raise DataFormatError(
                f"{USERS_FILE} line {lineno}: field 'tweets' not strictly ordered by ts at index {i}")
        prev = t.ts
        tweets.append(t)
    return UserRecord(
        user_id=uid,
        screen_name=_req(obj, "screen_name", lineno),
        language=_req(obj, "lang", lineno),
        created_at=created,
        followers_count=obj["followers_count"],
        friends_count=obj["friends_count"],
        tweets=tuple(tweets),
        label=obj.get("label"),
    )


def iter_users(path: str | os.PathLike) -> Iterator[UserRecord]:
    """Stream users one record at a time (bounded memory per record)."""
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if line:
                yield _parse_user(line, lineno)


def _load_edges(path: Path) -> FollowGraph:
    edges: set[tuple[int, int]] = set()
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise DataFormatError(f"{EDGES_FILE} line {lineno}: expected two tab-separated IDs")
            try:
                a, b = int(parts[0]), int(parts[1])
            except ValueError:
                raise DataFormatError(f"{EDGES_FILE} line {lineno}: non-integer ID") from None
            if a == b:
                raise DataFormatError(f"{EDGES_FILE} line {lineno}: self-loop {a}->{b}")
            if (a, b) in edges:
                raise DataFormatError(f"{EDGES_FILE} line {lineno}: duplicate edge {a}->{b}")
            edges.add((a, b))
    return FollowGraph(frozenset(edges))


def load_dataset(path: str | os.PathLike) -> Dataset:
    """Load a dataset directory, raising on the first malformed record."""
    root = Path(path)
    users: list[UserRecord] = []
    seen_line: dict[int, int] = {}
    for lineno, u in enumerate(iter_users(root / USERS_FILE), start=1):
        if u.user_id in seen_line:
            raise DataFormatError(
                f"{USERS_FILE} line {lineno}: duplicate user_id {u.user_id} "
                f"(first seen on line {seen_line[u.user_id]})")
        seen_line[u.user_id] = lineno
        users.append(u)
    graph = FollowGraph()
    if (root / EDGES_FILE).exists():
        graph = _load_edges(root / EDGES_FILE)
    meta = read_meta(root / META_FILE) if (root / META_FILE).exists() else None
    ds = Dataset(users=tuple(users), graph=graph, meta=meta)
    violations = validate_dataset(ds)
    if violations:
        raise DataFormatError("loaded dataset failed validation: " + "; ".join(violations[:5]))
    return ds


def write_meta(path: str | os.PathLike, meta: dict) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for k, v in meta.items():
            f.write(f"{k} = {json.dumps(v)}\n")


def read_meta(path: str | os.PathLike) -> dict:
    meta: dict = {}
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, sep, val = line.partition("=")
            if not sep:
                raise DataFormatError(f"{META_FILE} line {lineno}: expected 'key = value'")
            try:
                meta[key.strip()] = json.loads(val.strip())
            except json.JSONDecodeError:
                raise DataFormatError(f"{META_FILE} line {lineno}: unparseable value") from None
    return meta


def write_labels(path: str | os.PathLike, labels: dict[int, str]) -> None:
    """Ground-truth sidecar, kept apart from the detection artifacts."""
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write("user_id,label\n")
        for uid in sorted(labels):
            f.write(f"{uid},{labels[uid]}\n")


def read_labels(path: str | os.PathLike) -> dict[int, str]:
    labels: dict[int, str] = {}
    with open(path, encoding="utf-8") as f:
        header = f.readline()
        if header.strip() != "user_id,label":
            raise DataFormatError(f"{path}: expected 'user_id,label' header")
        for lineno, line in enumerate(f, start=2):
            line = line.strip()
            if not line:
                continue
            uid, sep, label = line.partition(",")
            if not sep:
                raise DataFormatError(f"{path} line {lineno}: expected 'user_id,label'")
            labels[int(uid)] = label
    return labels


def strip_labels(ds: Dataset) -> tuple[Dataset, dict[int, str]]:
    """Split a labeled dataset into an unlabeled one plus the label map."""
    labels = {u.user_id: u.label for u in ds.users if u.label is not None}
    users = tuple(u.without_label() for u in ds.users)
    return Dataset(users=users, graph=ds.graph, meta=ds.meta), labels
