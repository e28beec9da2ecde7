"""Follow-graph composition and degree analysis.

Single pass over the edge set with plain counters.  External endpoints (IDs
with no user record) are first-class citizens here: degree histograms and the
heavily-followed ranking tolerate and report them.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Iterable

from .models import FollowGraph


@dataclass(frozen=True)
class LinkComposition:
    incoming_total: int
    incoming_from_botnet: int
    outgoing_total: int
    outgoing_to_botnet: int

    @property
    def incoming_fraction(self) -> float:
        return self.incoming_from_botnet / self.incoming_total if self.incoming_total else 0.0

    @property
    def outgoing_fraction(self) -> float:
        return self.outgoing_to_botnet / self.outgoing_total if self.outgoing_total else 0.0


def link_composition(graph: FollowGraph, botnet_ids: set[int]) -> LinkComposition:
    """Count botnet-incoming and botnet-outgoing edges and their intra shares.

    An edge inside the botnet counts on both sides, so
    incoming_from_botnet == outgoing_to_botnet always holds.
    """
    in_total = in_bot = out_total = out_bot = 0
    for a, b in graph.edges:
        if b in botnet_ids:
            in_total += 1
            if a in botnet_ids:
                in_bot += 1
        if a in botnet_ids:
            out_total += 1
            if b in botnet_ids:
                out_bot += 1
    return LinkComposition(in_total, in_bot, out_total, out_bot)


def degree_distributions(
    graph: FollowGraph, population_ids: Iterable[int]
) -> tuple[dict[int, int], dict[int, int]]:
    """(in-degree histogram, out-degree histogram) over the population.

    Members with no edges contribute to the zero bucket, so each histogram
    sums to the population size.
    """
    pop = set(population_ids)
    in_deg = Counter({uid: 0 for uid in pop})
    out_deg = Counter({uid: 0 for uid in pop})
    for a, b in graph.edges:
        if b in pop:
            in_deg[b] += 1
        if a in pop:
            out_deg[a] += 1
    in_hist = Counter(in_deg.values())
    out_hist = Counter(out_deg.values())
    return dict(sorted(in_hist.items())), dict(sorted(out_hist.items()))


def top_external_followed(
    graph: FollowGraph, botnet_ids: set[int], top_n: int = 10
) -> list[tuple[int, int]]:
    """Non-botnet targets ranked by how many botnet members follow them.

    Descending by count, ties broken by ascending ID.
    """
    counts: Counter = Counter()
    for a, b in graph.edges:
        if a in botnet_ids and b not in botnet_ids:
            counts[b] += 1
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    return ranked[:top_n]
