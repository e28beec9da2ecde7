"""Quote corpora: normalized book texts that tweet text is sliced from.

The package bundles a handful of short original public-domain-style texts.
One space-adventure novel plays the botnet's single narrow source; the rest
are deliberately varied in register and serve as the background population's
diverse sources.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .errors import ParameterError
from .models import MAX_TWEET_CODEPOINTS

BOT_CORPUS = "nebula_crossing"
REAL_CORPORA = (
    "harbor_lights",
    "iron_orchard",
    "salt_meridian",
    "clockwork_garden",
    "thornfield_letters",
    "pantry_almanac",
)

MIN_BODY_LEN = 10 * MAX_TWEET_CODEPOINTS

_WS = re.compile(r"\s+")


@dataclass(frozen=True)
class QuoteCorpus:
    title: str
    body: str


def normalize(text: str) -> str:
    return _WS.sub(" ", text).strip()


def make_corpus(title: str, raw: str) -> QuoteCorpus:
    body = normalize(raw)
    if len(body) < MIN_BODY_LEN:
        raise ParameterError(
            f"corpus '{title}' too short: {len(body)} chars, need >= {MIN_BODY_LEN}")
    return QuoteCorpus(title=title, body=body)


def load_corpus(path: str | Path) -> QuoteCorpus:
    p = Path(path)
    return make_corpus(p.stem, p.read_text(encoding="utf-8"))


def _bundled(name: str) -> QuoteCorpus:
    raw = (resources.files("botweave") / "data" / "corpora" / f"{name}.txt").read_text("utf-8")
    return make_corpus(name, raw)


def bundled_bot_corpus() -> QuoteCorpus:
    return _bundled(BOT_CORPUS)


def bundled_real_corpora() -> list[QuoteCorpus]:
    return [_bundled(name) for name in REAL_CORPORA]
