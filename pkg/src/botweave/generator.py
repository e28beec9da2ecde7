"""Synthetic dataset generator.

Embeds a quotation botnet in a realistic background population.  Every bot
satisfies the full structural definition the detection filter checks for:
a handful of tweets sliced from one narrow corpus, occasionally decorated
with a hashtag, half of them geotagged uniformly inside two rectangles, a
single tweet source, tight follower/friend limits, and IDs packed into a
narrow range that maps linearly onto a registration date window.

Determinism: every user is built from an RNG substream keyed by
(seed, role, index), so output is independent of worker count and
processing order.  The follow graph is built from its own single substream.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from importlib import resources
from itertools import accumulate
from random import Random
from typing import Optional, Sequence

from .corpus import MIN_BODY_LEN, QuoteCorpus
from .errors import ParameterError
from .models import Dataset, FollowGraph, GeoPoint, GeoRect, Tweet, UserRecord
from .rng import substream

BOT_SOURCE = "Twitter for Windows Phone"

# Reported frequencies for the era's major clients; the remainder is spread
# over plausible minor clients so the named shares stay at face value.
DEFAULT_SOURCE_MIX = (
    ("Twitter for iPhone", 0.311),
    ("Twitter Web Client", 0.172),
    ("Twitter for Android", 0.149),
    ("Twitter for Blackberry", 0.068),
    ("Mobile Web", 0.0099),
    ("Twitter for Windows Phone", 0.0002),
    ("Twitter for iPad", 0.09),
    ("TweetDeck", 0.07),
    ("Instagram", 0.08),
    ("Echofon", 0.0499),
)

GENERIC_TAGS = ("#love", "#news", "#music", "#photo", "#travel",
                "#food", "#sports", "#fashion", "#tbt", "#nowplaying")

_UTC = timezone.utc


@dataclass(frozen=True)
class MobilityParams:
    """Heavy-tailed per-tweet displacement around a home point, in km."""

    pareto_alpha: float = 1.2
    scale_km: float = 5.0
    cap_km: float = 3000.0


@dataclass(frozen=True)
class GenParams:
    seed: int = 20130714
    n_bots: int = 5000
    n_real: int = 20000
    id_range: tuple[int, int] = (1_500_000_000, 1_600_000_000)
    rects: tuple[GeoRect, GeoRect] = (
        GeoRect(lat_min=25.0, lat_max=50.0, lon_min=-125.0, lon_max=-65.0),
        GeoRect(lat_min=34.0, lat_max=60.0, lon_min=-11.0, lon_max=32.0),
    )
    geotag_prob_bot: float = 0.5
    bot_tweet_lo: int = 3
    bot_tweet_hi: int = 11
    bot_follower_cap: int = 10
    bot_friend_cap: int = 31
    intra_incoming_frac: float = 0.91
    intra_outgoing_frac: float = 1.0 / 3.0
    bot_intra_lo: int = 2
    bot_intra_hi: int = 4
    hashtag_prob: float = 0.3
    followback_tags: tuple[str, ...] = ("#teamfollowback", "#followme")
    real_geotag_user_frac: float = 0.034
    real_geotag_tweet_frac: float = 0.023
    mobility: MobilityParams = MobilityParams()
    source_mix: tuple[tuple[str, float], ...] = DEFAULT_SOURCE_MIX
    n_customers: int = 4
    customer_shares: tuple[float, ...] = (0.045, 0.040, 0.036, 0.033)
    date_window: tuple[datetime, datetime] = (
        datetime(2013, 6, 20, tzinfo=_UTC),
        datetime(2013, 7, 14, tzinfo=_UTC),
    )
    leakage: float = 0.0
    real_tweet_median: float = 13.0
    real_tweet_sigma: float = 0.8
    real_tweet_max: int = 300
    real_friend_median: float = 10.0
    real_friend_sigma: float = 1.1
    real_friend_max: int = 1500
    external_pool: int = 50_000
    real_rt_prob: float = 0.08
    real_mention_prob: float = 0.07
    real_hashtag_prob: float = 0.10


def _extra_follower_room(p: GenParams) -> int:
    # per-bot follower slots reserved for incoming links from outside
    return 2


def validate_params(p: GenParams) -> None:
    probs = {
        "geotag_prob_bot": p.geotag_prob_bot,
        "hashtag_prob": p.hashtag_prob,
        "real_geotag_user_frac": p.real_geotag_user_frac,
        "real_geotag_tweet_frac": p.real_geotag_tweet_frac,
        "leakage": p.leakage,
        "real_rt_prob": p.real_rt_prob,
        "real_mention_prob": p.real_mention_prob,
        "real_hashtag_prob": p.real_hashtag_prob,
    }
    for name, v in probs.items():
        if not 0.0 <= v <= 1.0:
            raise ParameterError(f"{name}={v} outside [0, 1]")
    if not 0.0 < p.intra_incoming_frac <= 1.0:
        raise ParameterError("intra_incoming_frac must be in (0, 1]")
    if not 0.0 < p.intra_outgoing_frac <= 1.0:
        raise ParameterError("intra_outgoing_frac must be in (0, 1]")
    if min(p.bot_follower_cap, p.bot_friend_cap) <= 0:
        raise ParameterError("bot caps must be positive")
    if p.n_bots < 0 or p.n_real < 0:
        raise ParameterError("population counts must be non-negative")
    lo, hi = p.id_range
    if lo >= hi:
        raise ParameterError("id_range is empty")
    if hi - lo < p.n_bots:
        raise ParameterError(f"id_range holds {hi - lo} IDs, cannot fit {p.n_bots} bots")
    na, eu = p.rects
    if not (na.is_valid() and eu.is_valid()):
        raise ParameterError("rectangles out of range or degenerate")
    if na.overlaps(eu):
        raise ParameterError("rectangles must be disjoint")
    if not 1 <= p.bot_tweet_lo <= p.bot_tweet_hi:
        raise ParameterError("bot tweet count bounds must satisfy 1 <= lo <= hi")
    if not 1 <= p.bot_intra_lo <= p.bot_intra_hi:
        raise ParameterError("bot intra-follow bounds must satisfy 1 <= lo <= hi")
    if 0 < p.n_bots <= p.bot_intra_hi:
        raise ParameterError(
            f"n_bots={p.n_bots} cannot support {p.bot_intra_hi} intra-botnet friends per bot")
    if p.real_geotag_user_frac > 0 and p.real_geotag_tweet_frac > p.real_geotag_user_frac:
        raise ParameterError("real_geotag_tweet_frac may not exceed real_geotag_user_frac")
    f_out = p.intra_outgoing_frac
    friends_worst = p.bot_intra_hi + round(p.bot_intra_hi * (1.0 - f_out) / f_out)
    if friends_worst > p.bot_friend_cap:
        raise ParameterError(
            f"intra_outgoing_frac={f_out} implies up to {friends_worst} friends per bot, "
            f"over the cap of {p.bot_friend_cap}")
    room = _extra_follower_room(p)
    if p.bot_intra_hi > p.bot_follower_cap - room:
        raise ParameterError("bot_intra_hi leaves no follower-cap room for external followers")
    f_in = p.intra_incoming_frac
    if p.bot_intra_hi * (1.0 - f_in) / f_in > room:
        raise ParameterError(
            f"intra_incoming_frac={f_in} needs more external followers per bot "
            f"than the follower cap allows")
    if len(p.customer_shares) != p.n_customers:
        raise ParameterError("customer_shares length must equal n_customers")
    for s in p.customer_shares:
        if not 0.0 <= s <= 1.0:
            raise ParameterError("customer shares must lie in [0, 1]")
    total_prob = sum(w for _, w in p.source_mix)
    if abs(total_prob - 1.0) > 1e-9:
        raise ParameterError(f"source_mix probabilities sum to {total_prob}, expected 1")
    if p.date_window[0] >= p.date_window[1]:
        raise ParameterError("date_window must be an increasing pair")


@dataclass(frozen=True)
class City:
    name: str
    lat: float
    lon: float
    weight: float


def load_cities() -> list[City]:
    text = (resources.files("botweave") / "data" / "cities.csv").read_text("utf-8")
    out = []
    for row in csv.DictReader(text.splitlines()):
        out.append(City(row["name"], float(row["lat"]), float(row["lon"]), float(row["weight"])))
    return out


def fake_location(rects: tuple[GeoRect, GeoRect], rng: Random) -> GeoPoint:
    """Equiprobable rectangle choice, then uniform lat/lon inside it."""
    rect = rects[0] if rng.random() < 0.5 else rects[1]
    return GeoPoint(
        lat=round(rng.uniform(rect.lat_min, rect.lat_max), 5),
        lon=round(rng.uniform(rect.lon_min, rect.lon_max), 5),
    )


def _leak_location(rects: tuple[GeoRect, GeoRect], rng: Random) -> GeoPoint:
    while True:
        p = GeoPoint(lat=round(rng.uniform(-55.0, 70.0), 5),
                     lon=round(rng.uniform(-180.0, 179.99), 5))
        if not (rects[0].contains(p) or rects[1].contains(p)):
            return p


def make_bot_tweet(
    corpus: QuoteCorpus,
    rng: Random,
    hashtag_prob: float = 0.3,
    followback_tags: Sequence[str] = ("#teamfollowback", "#followme"),
    min_len: int = 30,
    max_len: int = 140,
) -> str:
    """A random slice of the corpus, sometimes decorated with one hashtag.

    Slices cut words at both ends.  Decoration is a coin flip between a
    follow-back tag and a '#' prefixed to one uniformly chosen word (stop
    words included).
    """
    body = corpus.body
    if len(body) < MIN_BODY_LEN:
        raise ParameterError(f"corpus '{corpus.title}' too short to quote from")
    length = rng.randint(min_len, max_len)
    start = rng.randrange(0, len(body) - length + 1)
    text = body[start:start + length].strip()
    if rng.random() < hashtag_prob:
        if rng.random() < 0.5:
            text = text + " " + rng.choice(list(followback_tags))
        else:
            words = text.split()
            i = rng.randrange(len(words))
            words[i] = "#" + words[i]
            text = " ".join(words)
    return text


_CONSONANTS = "bcdfghjklmnprstvwz"
_VOWELS = "aeiou"


def _handle(rng: Random) -> str:
    n = rng.randint(2, 4)
    name = "".join(rng.choice(_CONSONANTS) + rng.choice(_VOWELS) for _ in range(n))
    if rng.random() < 0.5:
        name += str(rng.randrange(10, 100))
    return name


def _sorted_offsets(rng: Random, n: int, span: int) -> list[int]:
    return sorted(rng.sample(range(60, span), n))


def assign_ids_and_dates(
    n_bots: int, n_real: int, params: GenParams, rng: Random
) -> tuple[list[int], dict[int, datetime], list[int], list[int]]:
    """Bot IDs uniform in the narrow range with creation dates mapped linearly
    onto the date window; real and customer IDs from the wider space outside it.
    """
    lo, hi = params.id_range
    bot_ids = sorted(rng.sample(range(lo, hi), n_bots))
    win_lo, win_hi = params.date_window
    span = (win_hi - win_lo).total_seconds()
    created = {
        uid: win_lo + timedelta(seconds=round((uid - lo) / (hi - lo) * span))
        for uid in bot_ids
    }
    used = set(bot_ids)
    customer_ids = []
    while len(customer_ids) < params.n_customers:
        cid = rng.randrange(10_000_000, 50_000_000)
        if cid not in used:
            used.add(cid)
            customer_ids.append(cid)
    real_ids: list[int] = []
    while len(real_ids) < n_real:
        uid = rng.randrange(1, 2 ** 32)
        if lo <= uid < hi or uid in used:
            continue
        used.add(uid)
        real_ids.append(uid)
    return bot_ids, created, sorted(real_ids), customer_ids


def _make_bot_user(
    params: GenParams, corpus: QuoteCorpus, index: int, uid: int, created: datetime
) -> UserRecord:
    rng = substream(params.seed, "bot", index)
    count = rng.randint(params.bot_tweet_lo, params.bot_tweet_hi)
    offsets = _sorted_offsets(rng, count, 120 * 86400)
    tweets = []
    for off in offsets:
        text = make_bot_tweet(corpus, rng, params.hashtag_prob, params.followback_tags)
        geo = None
        if rng.random() < params.geotag_prob_bot:
            if params.leakage > 0 and rng.random() < params.leakage:
                geo = _leak_location(params.rects, rng)
            else:
                geo = fake_location(params.rects, rng)
        tweets.append(Tweet(text=text, ts=created + timedelta(seconds=off),
                            source=BOT_SOURCE, geo=geo))
    return UserRecord(
        user_id=uid,
        screen_name=_handle(rng),
        language="en",
        created_at=created,
        followers_count=0,
        friends_count=0,
        tweets=tuple(tweets),
        label="bot",
    )


def _displacement_km(rng: Random, mob: MobilityParams) -> float:
    while True:
        u = rng.random()
        if u <= 0.0:
            continue
        r = mob.scale_km * u ** (-1.0 / mob.pareto_alpha)
        if r <= mob.cap_km:
            return r


def _displaced(home_lat: float, home_lon: float, rng: Random, mob: MobilityParams) -> GeoPoint:
    r = _displacement_km(rng, mob)
    theta = rng.uniform(0.0, 2.0 * math.pi)
    dlat = r * math.cos(theta) / 111.32
    dlon = r * math.sin(theta) / (111.32 * max(0.1, math.cos(math.radians(home_lat))))
    lat = max(-89.99, min(89.99, home_lat + dlat))
    lon = (home_lon + dlon + 180.0) % 360.0 - 180.0
    return GeoPoint(lat=round(lat, 5), lon=round(lon, 5))


def _lognormal_count(rng: Random, median: float, sigma: float, cap: int) -> int:
    n = int(round(rng.lognormvariate(math.log(median), sigma)))
    return max(1, min(cap, n))


def make_real_user(
    params: GenParams,
    corpora: Sequence[QuoteCorpus],
    index: int,
    uid: int,
    cities: Sequence[City],
    city_cum_weights: Sequence[float],
) -> UserRecord:
    """A background-population account: diverse sources, mixed clients,
    occasional retweets/mentions, and, for a small share of users, geotagged
    tweets scattered around a home city by heavy-tailed hops.
    """
    rng = substream(params.seed, "real", index)
    created_epoch = rng.randrange(
        int(datetime(2007, 1, 1, tzinfo=_UTC).timestamp()),
        int(datetime(2014, 11, 1, tzinfo=_UTC).timestamp()),
    )
    created = datetime.fromtimestamp(created_epoch, tz=_UTC)
    count = _lognormal_count(rng, params.real_tweet_median, params.real_tweet_sigma,
                             params.real_tweet_max)
    end_epoch = int(datetime(2015, 1, 1, tzinfo=_UTC).timestamp())
    span = end_epoch - created_epoch
    offsets = sorted(rng.sample(range(60, span), count))

    is_geo_user = rng.random() < params.real_geotag_user_frac
    home_lat = home_lon = 0.0
    tweet_geo_prob = 0.0
    if is_geo_user:
        city = rng.choices(cities, cum_weights=city_cum_weights, k=1)[0]
        home_lat = city.lat + rng.uniform(-0.3, 0.3)
        home_lon = city.lon + rng.uniform(-0.3, 0.3)
        tweet_geo_prob = params.real_geotag_tweet_frac / params.real_geotag_user_frac

    sources = [s for s, _ in params.source_mix]
    source_cum = list(accumulate(w for _, w in params.source_mix))
    handle = _handle(rng)

    tweets = []
    for off in offsets:
        corpus = rng.choice(list(corpora))
        length = rng.randint(20, 140)
        start = rng.randrange(0, len(corpus.body) - length + 1)
        text = corpus.body[start:start + length].strip()
        u = rng.random()
        if u < params.real_rt_prob:
            text = "RT @" + _handle(rng) + ": " + text
        elif u < params.real_rt_prob + params.real_mention_prob:
            words = text.split()
            words.insert(rng.randrange(len(words) + 1), "@" + _handle(rng))
            text = " ".join(words)
        elif u < params.real_rt_prob + params.real_mention_prob + params.real_hashtag_prob:
            text = text + " " + rng.choice(GENERIC_TAGS)
        geo = None
        if is_geo_user and rng.random() < tweet_geo_prob:
            geo = _displaced(home_lat, home_lon, rng, params.mobility)
        source = rng.choices(sources, cum_weights=source_cum, k=1)[0]
        tweets.append(Tweet(text=text[:280], ts=datetime.fromtimestamp(created_epoch + off, tz=_UTC),
                            source=source, geo=geo))
    return UserRecord(
        user_id=uid,
        screen_name=handle,
        language="en",
        created_at=created,
        followers_count=0,
        friends_count=0,
        tweets=tuple(tweets),
        label="real",
    )


def _draw_external_pool(rng: Random, size: int, used: set[int]) -> list[int]:
    pool: list[int] = []
    while len(pool) < size:
        uid = rng.randrange(1, 2 ** 32)
        if uid not in used:
            used.add(uid)
            pool.append(uid)
    return pool


def build_follow_graph(
    bot_ids: Sequence[int],
    real_ids: Sequence[int],
    customer_ids: Sequence[int],
    params: GenParams,
    rng: Random,
) -> FollowGraph:
    """Botnet wiring with exact aggregate link composition.

    Each bot follows ``d`` other bots and ``round(d * (1-f)/f)`` accounts
    outside the botnet (customers first, then a uniform external pool), which
    realizes the target outgoing intra fraction up to rounding.  The incoming
    side is topped up with ``round(I * (1-g)/g)`` follower edges from the
    background population, one per bot at most, keeping every bot under its
    follower cap.
    """
    sets = [set(bot_ids), set(real_ids), set(customer_ids)]
    for i in range(3):
        for j in range(i + 1, 3):
            if sets[i] & sets[j]:
                raise ParameterError("bot, real, and customer ID sets must be disjoint")
    edges: set[tuple[int, int]] = set()
    bots = list(bot_ids)
    reals = list(real_ids)
    n_bots = len(bots)
    used = set(bots) | set(reals) | set(customer_ids)
    pool = _draw_external_pool(rng, params.external_pool, used)

    intra_total = 0
    if n_bots:
        intra_cap = params.bot_follower_cap - _extra_follower_room(params)
        intra_deg = [rng.randint(params.bot_intra_lo, params.bot_intra_hi) for _ in bots]
        intra_total = sum(intra_deg)
        in_deg = {b: 0 for b in bots}
        for i, a in enumerate(bots):
            chosen: set[int] = set()
            misses = 0
            while len(chosen) < intra_deg[i]:
                b = bots[rng.randrange(n_bots)]
                if b == a or b in chosen or in_deg[b] >= intra_cap:
                    misses += 1
                    if misses > 50 * n_bots:
                        eligible = [c for c in bots
                                    if c != a and c not in chosen and in_deg[c] < intra_cap]
                        if len(eligible) < intra_deg[i] - len(chosen):
                            raise ParameterError("cannot place intra-botnet follows under caps")
                        for c in eligible[:intra_deg[i] - len(chosen)]:
                            chosen.add(c)
                            in_deg[c] += 1
                        break
                    continue
                chosen.add(b)
                in_deg[b] += 1
            for b in sorted(chosen):
                edges.add((a, b))

        f_out = params.intra_outgoing_frac
        ext_deg = [round(d * (1.0 - f_out) / f_out) for d in intra_deg]
        customer_follows = [0] * n_bots
        for j, cid in enumerate(customer_ids):
            m = round(params.customer_shares[j] * n_bots)
            eligible = [i for i in range(n_bots) if ext_deg[i] - customer_follows[i] >= 1]
            if m > len(eligible):
                raise ParameterError(
                    f"customer share {params.customer_shares[j]} exceeds available "
                    f"bot follow capacity")
            for i in rng.sample(eligible, m):
                customer_follows[i] += 1
                edges.add((bots[i], cid))
        for i, a in enumerate(bots):
            k = ext_deg[i] - customer_follows[i]
            for idx in rng.sample(range(len(pool)), k):
                edges.add((a, pool[idx]))

        f_in = params.intra_incoming_frac
        top_up = round(intra_total * (1.0 - f_in) / f_in)
        if top_up:
            room = _extra_follower_room(params)
            if top_up > n_bots * room:
                raise ParameterError("incoming fraction needs more follower room than caps allow")
            targets: list[int] = []
            remaining = top_up
            while remaining >= n_bots:
                targets.extend(bots)
                remaining -= n_bots
            targets.extend(rng.sample(bots, remaining))
            followers = reals if reals else pool
            for b in targets:
                while True:
                    src = followers[rng.randrange(len(followers))]
                    if (src, b) not in edges:
                        edges.add((src, b))
                        break

    if reals:
        perm = reals[:]
        rng.shuffle(perm)
        real_cum = list(accumulate((i + 1) ** -0.8 for i in range(len(perm))))
        ext_slice = pool[:min(5000, len(pool))]
        ext_cum = list(accumulate((i + 1) ** -0.8 for i in range(len(ext_slice))))
        for r in reals:
            friends = _lognormal_count(rng, params.real_friend_median,
                                       params.real_friend_sigma, params.real_friend_max)
            to_real = round(friends * 0.7)
            to_ext = friends - to_real
            tries = 0
            added = 0
            while added < to_real and tries < 3 * to_real + 20:
                tries += 1
                t = rng.choices(perm, cum_weights=real_cum, k=1)[0]
                if t != r and (r, t) not in edges:
                    edges.add((r, t))
                    added += 1
            tries = 0
            added = 0
            while added < to_ext and tries < 3 * to_ext + 20:
                tries += 1
                t = rng.choices(ext_slice, cum_weights=ext_cum, k=1)[0]
                if (r, t) not in edges:
                    edges.add((r, t))
                    added += 1
    return FollowGraph(frozenset(edges))


def params_to_meta(p: GenParams) -> dict:
    na, eu = p.rects
    return {
        "format": "botweave-dataset 1",
        "seed": p.seed,
        "n_bots": p.n_bots,
        "n_real": p.n_real,
        "id_lo": p.id_range[0],
        "id_hi": p.id_range[1],
        "rect_na": [na.lat_min, na.lat_max, na.lon_min, na.lon_max],
        "rect_eu": [eu.lat_min, eu.lat_max, eu.lon_min, eu.lon_max],
        "geotag_prob_bot": p.geotag_prob_bot,
        "bot_tweet_lo": p.bot_tweet_lo,
        "bot_tweet_hi": p.bot_tweet_hi,
        "bot_follower_cap": p.bot_follower_cap,
        "bot_friend_cap": p.bot_friend_cap,
        "intra_incoming_frac": p.intra_incoming_frac,
        "intra_outgoing_frac": p.intra_outgoing_frac,
        "bot_intra_lo": p.bot_intra_lo,
        "bot_intra_hi": p.bot_intra_hi,
        "hashtag_prob": p.hashtag_prob,
        "followback_tags": list(p.followback_tags),
        "real_geotag_user_frac": p.real_geotag_user_frac,
        "real_geotag_tweet_frac": p.real_geotag_tweet_frac,
        "mobility_alpha": p.mobility.pareto_alpha,
        "mobility_scale_km": p.mobility.scale_km,
        "mobility_cap_km": p.mobility.cap_km,
        "source_names": [s for s, _ in p.source_mix],
        "source_probs": [w for _, w in p.source_mix],
        "n_customers": p.n_customers,
        "customer_shares": list(p.customer_shares),
        "date_window": [p.date_window[0].strftime("%Y-%m-%dT%H:%M:%SZ"),
                        p.date_window[1].strftime("%Y-%m-%dT%H:%M:%SZ")],
        "leakage": p.leakage,
        "real_tweet_median": p.real_tweet_median,
        "real_tweet_sigma": p.real_tweet_sigma,
        "real_tweet_max": p.real_tweet_max,
        "real_friend_median": p.real_friend_median,
        "real_friend_sigma": p.real_friend_sigma,
        "real_friend_max": p.real_friend_max,
        "external_pool": p.external_pool,
        "real_rt_prob": p.real_rt_prob,
        "real_mention_prob": p.real_mention_prob,
        "real_hashtag_prob": p.real_hashtag_prob,
    }


def generate(
    params: GenParams,
    bot_corpus: QuoteCorpus,
    real_corpora: Sequence[QuoteCorpus],
    threads: int = 1,
) -> Dataset:
    """Build the full labeled dataset: users, follow graph, and meta echo."""
    validate_params(params)
    if params.n_bots + params.n_real < 1:
        raise ParameterError("need at least one user")
    if not real_corpora and params.n_real > 0:
        raise ParameterError("need at least one background corpus")
    if len(bot_corpus.body) < MIN_BODY_LEN:
        raise ParameterError("bot corpus too short")

    rng = substream(params.seed, "ids")
    bot_ids, bot_created, real_ids, customer_ids = assign_ids_and_dates(
        params.n_bots, params.n_real, params, rng)

    cities = load_cities()
    city_cum = list(accumulate(c.weight for c in cities))

    def build_bot(i: int) -> UserRecord:
        uid = bot_ids[i]
        return _make_bot_user(params, bot_corpus, i, uid, bot_created[uid])

    def build_real(i: int) -> UserRecord:
        return make_real_user(params, real_corpora, i, real_ids[i], cities, city_cum)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            bot_users = list(pool.map(build_bot, range(params.n_bots)))
            real_users = list(pool.map(build_real, range(params.n_real)))
    else:
        bot_users = [build_bot(i) for i in range(params.n_bots)]
        real_users = [build_real(i) for i in range(params.n_real)]

    graph = build_follow_graph(bot_ids, real_ids, customer_ids, params,
                               substream(params.seed, "graph"))
    in_deg = graph.in_degrees()
    out_deg = graph.out_degrees()

    users = []
    for u in bot_users + real_users:
        users.append(UserRecord(
            user_id=u.user_id,
            screen_name=u.screen_name,
            language=u.language,
            created_at=u.created_at,
            followers_count=in_deg.get(u.user_id, 0),
            friends_count=out_deg.get(u.user_id, 0),
            tweets=u.tweets,
            label=u.label,
        ))
    for u in users:
        if u.label == "bot":
            if u.followers_count > params.bot_follower_cap:
                raise ParameterError(f"bot {u.user_id} exceeds follower cap")
            if u.friends_count > params.bot_friend_cap:
                raise ParameterError(f"bot {u.user_id} exceeds friend cap")
    users.sort(key=lambda x: x.user_id)
    meta = params_to_meta(params)
    return Dataset(users=tuple(users), graph=graph, meta=meta)
