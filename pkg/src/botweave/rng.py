"""Deterministic RNG substreams.

Every randomized component draws from a ``random.Random`` seeded by a hash of
(master seed, label path).  Per-entity substreams make output independent of
the order in which entities are processed, so worker count never changes the
result.
"""

import hashlib
import random


def derive_seed(master: int, *parts) -> int:
    """Stable 64-bit seed from a master seed plus a label path."""
    h = hashlib.blake2b(digest_size=8)
    h.update(str(int(master)).encode())
    for p in parts:
        h.update(b"/")
        h.update(str(p).encode())
    return int.from_bytes(h.digest(), "big")


def substream(master: int, *parts) -> random.Random:
    """An independent ``random.Random`` keyed by (master, parts)."""
    return random.Random(derive_seed(master, *parts))
