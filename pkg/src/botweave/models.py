"""Core domain types and dataset validation.

All types are plain immutable records.  Constructors do not validate;
``validate_dataset`` reports every invariant violation as data, and the file
loaders raise on the first malformed record they see.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from typing import Optional

MAX_TWEET_CODEPOINTS = 280

# Tweet source labels seen on the platform in the botnet's era.  The first six
# carry reported frequencies; the rest absorb the long tail of minor clients.
KNOWN_SOURCES = (
    "Twitter for Windows Phone",
    "Twitter for iPhone",
    "Twitter Web Client",
    "Twitter for Android",
    "Twitter for Blackberry",
    "Mobile Web",
    "Twitter for iPad",
    "TweetDeck",
    "Instagram",
    "Echofon",
)

LABELS = ("bot", "real", "unknown")


@dataclass(frozen=True, slots=True)
class GeoPoint:
    """Latitude/longitude pair in degrees; lat in [-90, 90], lon in [-180, 180)."""

    lat: float
    lon: float


@dataclass(frozen=True, slots=True)
class GeoRect:
    """Axis-aligned lat/lon rectangle, lat_min < lat_max and lon_min < lon_max."""

    lat_min: float
    lat_max: float
    lon_min: float
    lon_max: float

    def contains(self, p: GeoPoint) -> bool:
        """Closed-boundary membership; points on an edge count as inside."""
        return (self.lat_min <= p.lat <= self.lat_max
                and self.lon_min <= p.lon <= self.lon_max)

    def is_valid(self) -> bool:
        return (self.lat_min < self.lat_max and self.lon_min < self.lon_max
                and -90.0 <= self.lat_min and self.lat_max <= 90.0
                and -180.0 <= self.lon_min and self.lon_max <= 180.0)

    def overlaps(self, other: "GeoRect") -> bool:
        return not (self.lat_max < other.lat_min or other.lat_max < self.lat_min
                    or self.lon_max < other.lon_min or other.lon_max < self.lon_min)


@dataclass(frozen=True, slots=True)
class Tweet:
    text: str
    ts: datetime
    source: str
    geo: Optional[GeoPoint] = None


@dataclass(frozen=True, slots=True)
class UserRecord:
    user_id: int
    screen_name: str
    language: str
    created_at: datetime
    followers_count: int
    friends_count: int
    tweets: tuple[Tweet, ...] = ()
    label: Optional[str] = None

    def geo_tweets(self) -> list[Tweet]:
        return [t for t in self.tweets if t.geo is not None]

    def without_label(self) -> "UserRecord":
        return replace(self, label=None)


@dataclass(frozen=True)
class FollowGraph:
    """Directed follower -> friend edge set."""

    edges: frozenset[tuple[int, int]] = frozenset()

    @classmethod
    def from_pairs(cls, pairs) -> "FollowGraph":
        return cls(frozenset((int(a), int(b)) for a, b in pairs))

    def out_degrees(self) -> dict[int, int]:
        deg: dict[int, int] = {}
        for a, _ in self.edges:
            deg[a] = deg.get(a, 0) + 1
        return deg

    def in_degrees(self) -> dict[int, int]:
        deg: dict[int, int] = {}
        for _, b in self.edges:
            deg[b] = deg.get(b, 0) + 1
        return deg

    def __len__(self) -> int:
        return len(self.edges)


@dataclass(frozen=True)
class Dataset:
    users: tuple[UserRecord, ...]
    graph: FollowGraph = FollowGraph()
    meta: Optional[dict] = None

    def by_id(self) -> dict[int, UserRecord]:
        return {u.user_id: u for u in self.users}

    def labeled(self, label: str) -> list[UserRecord]:
        return [u for u in self.users if u.label == label]


def _utc(dt: datetime) -> bool:
    return dt.tzinfo is not None and dt.utcoffset() == timezone.utc.utcoffset(None)


def _check_tweet(uid: int, i: int, t: Tweet, out: list[str]) -> None:
    if not t.text:
        out.append(f"user {uid}: tweet {i} has empty text")
    elif len(t.text) > MAX_TWEET_CODEPOINTS:
        out.append(f"user {uid}: tweet {i} exceeds {MAX_TWEET_CODEPOINTS} code points")
    if t.source not in KNOWN_SOURCES:
        out.append(f"user {uid}: tweet {i} has unknown source {t.source!r}")
    if not _utc(t.ts):
        out.append(f"user {uid}: tweet {i} timestamp is not UTC")
    if t.geo is not None:
        if not (-90.0 <= t.geo.lat <= 90.0):
            out.append(f"user {uid}: tweet {i} lat out of range [-90, 90]")
        if not (-180.0 <= t.geo.lon < 180.0):
            out.append(f"user {uid}: tweet {i} lon out of range [-180, 180)")


def validate_dataset(ds: Dataset) -> list[str]:
    """Return one description per invariant violation; empty list means valid.

    Violations are data, not errors: every problem names the offending
    user_id (or edge) and the rule it breaks.
    """
    out: list[str] = []
    seen: set[int] = set()
    for u in ds.users:
        uid = u.user_id
        if uid <= 0:
            out.append(f"user {uid}: user_id must be positive")
        if uid in seen:
            out.append(f"user {uid}: duplicate user_id")
        seen.add(uid)
        if u.followers_count < 0:
            out.append(f"user {uid}: followers_count negative")
        if u.friends_count < 0:
            out.append(f"user {uid}: friends_count negative")
        if not (len(u.language) == 2 and u.language.isalpha() and u.language.islower()):
            out.append(f"user {uid}: language {u.language!r} is not a two-letter code")
        if u.label is not None and u.label not in LABELS:
            out.append(f"user {uid}: label {u.label!r} not one of {LABELS}")
        if not _utc(u.created_at):
            out.append(f"user {uid}: created_at is not UTC")
        prev = None
        for i, t in enumerate(u.tweets):
            _check_tweet(uid, i, t, out)
            if prev is not None and t.ts <= prev:
                out.append(f"user {uid}: tweets not strictly ordered by timestamp at index {i}")
            prev = t.ts
    for a, b in sorted(ds.graph.edges):
        if a == b:
            out.append(f"edge {a}->{b}: self-loop")
        if a <= 0 or b <= 0:
            out.append(f"edge {a}->{b}: non-positive endpoint")
    return out
