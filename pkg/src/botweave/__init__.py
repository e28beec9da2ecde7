"""botweave: synthetic social-botnet dataset generator and detection pipeline."""

from .models import (
    Dataset,
    FollowGraph,
    GeoPoint,
    GeoRect,
    Tweet,
    UserRecord,
    validate_dataset,
)
from .dataset_io import load_dataset, save_dataset
from .generator import GenParams, MobilityParams, generate
from .corpus import QuoteCorpus, bundled_bot_corpus, bundled_real_corpora, load_corpus

__version__ = "0.1.0"

__all__ = [
    "Dataset", "FollowGraph", "GeoPoint", "GeoRect", "Tweet", "UserRecord",
    "validate_dataset", "load_dataset", "save_dataset",
    "GenParams", "MobilityParams", "generate",
    "QuoteCorpus", "bundled_bot_corpus", "bundled_real_corpora", "load_corpus",
    "__version__",
]
