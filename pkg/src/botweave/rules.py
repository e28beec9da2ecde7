"""Structural account filter and uniform ID-space sampling.

The filter is an exact conjunction of per-account predicates: tweet, follower
and friend caps, a single required tweet source, an ID range, an interface
language, and the absence of retweets and mentions.  Rejections carry the
first failed rule so downstream reports can break failures down.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from .errors import ParameterError
from .models import UserRecord
from .rng import substream

_MENTION = re.compile(r"@\w")


@dataclass(frozen=True)
class FilterRules:
    max_tweets: int = 11
    max_followers: int = 10
    max_friends: int = 31
    required_source: str = "Twitter for Windows Phone"
    id_range: tuple[int, int] = (1_500_000_000, 1_600_000_000)
    language: str = "en"
    forbid_retweets: bool = True
    forbid_mentions: bool = True

    def validate(self) -> None:
        if min(self.max_tweets, self.max_followers, self.max_friends) <= 0:
            raise ParameterError("filter caps must be positive")
        if self.id_range[0] >= self.id_range[1]:
            raise ParameterError("filter id_range is empty")


def is_retweet(text: str) -> bool:
    return text.startswith("RT @")


def has_mention(text: str) -> bool:
    return _MENTION.search(text) is not None


def first_failed_rule(user: UserRecord, rules: FilterRules) -> Optional[str]:
    """Name of the first rule the user breaks, or None for a candidate.

    Rules are checked in declaration order, so rejection reasons are stable.
    """
    if len(user.tweets) > rules.max_tweets:
        return "max_tweets"
    if user.followers_count > rules.max_followers:
        return "max_followers"
    if user.friends_count > rules.max_friends:
        return "max_friends"
    if any(t.source != rules.required_source for t in user.tweets):
        return "required_source"
    lo, hi = rules.id_range
    if not (lo <= user.user_id < hi):
        return "id_range"
    if user.language != rules.language:
        return "language"
    if rules.forbid_retweets and any(is_retweet(t.text) for t in user.tweets):
        return "retweet"
    if rules.forbid_mentions and any(has_mention(t.text) for t in user.tweets):
        return "mention"
    return None


def apply_rules(
    users: Iterable[UserRecord], rules: FilterRules
) -> tuple[list[UserRecord], list[tuple[int, str]]]:
    """Split users into candidates and (user_id, reason) rejections.

    Output is sorted by user_id for determinism.
    """
    rules.validate()
    candidates: list[UserRecord] = []
    rejected: list[tuple[int, str]] = []
    for u in sorted(users, key=lambda x: x.user_id):
        reason = first_failed_rule(u, rules)
        if reason is None:
            candidates.append(u)
        else:
            rejected.append((u.user_id, reason))
    return candidates, rejected


def sample_uniform(users: Iterable[UserRecord], p: float, seed: int) -> list[UserRecord]:
    """Keep each user independently with probability p, deterministically.

    Users are visited in ascending user_id order so the draw sequence, and
    therefore the sample, is a pure function of (users, p, seed).
    """
    if not 0.0 <= p <= 1.0:
        raise ParameterError(f"sampling probability {p} outside [0, 1]")
    rng = substream(seed, "uniform-sample")
    return [u for u in sorted(users, key=lambda x: x.user_id) if rng.random() < p]


def id_range_scan(
    users: Iterable[UserRecord],
    id_range: tuple[int, int],
    language: Optional[str] = "en",
) -> list[UserRecord]:
    """Users with ID in [lo, hi) and, when given, the matching language."""
    lo, hi = id_range
    hits = [u for u in users
            if lo <= u.user_id < hi and (language is None or u.language == language)]
    hits.sort(key=lambda u: u.user_id)
    return hits
