"""Word-count Naive Bayes classifier, built from scratch.

The chain is: tokenize every tweet of a user into lowercase alphabetic (plus
``#``) tokens, concatenate them into one count vector per user, keep the
top-k vocabulary per class, and train a multinomial model with add-alpha
smoothing.  Evaluation is stratified k-fold cross validation with per-fold
and pooled confusion matrices.
"""

from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import DataFormatError, ParameterError
from .models import UserRecord
from .rng import substream
from .stopwords import STOP_WORDS

CLASSES = ("bot", "real")

_MENTION = re.compile(r"@\w+")
_STRIP = re.compile(r"[^a-z#\s]+")


def tokenize(text: str) -> list[str]:
    """Lowercase, drop @-mentions, strip non-alphabetic chars except '#',
    split on whitespace, remove stop words.

    A '#'-prefixed token is distinct from its bare word, so hashtagged stop
    words survive.  Tokens left with no letters at all are dropped.
    """
    text = _MENTION.sub(" ", text.lower())
    text = _STRIP.sub("", text)
    out = []
    for tok in text.split():
        if tok in STOP_WORDS:
            continue
        if not any(c.isalpha() for c in tok):
            continue
        out.append(tok)
    return out


def user_token_counts(user: UserRecord) -> Counter:
    """Token counts over all of a user's tweets concatenated."""
    counts: Counter = Counter()
    for t in user.tweets:
        counts.update(tokenize(t.text))
    return counts


@dataclass(frozen=True)
class Vocabulary:
    tokens: tuple[str, ...]
    index: dict[str, int]
    bot_freq: tuple[int, ...]
    real_freq: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.tokens)


def _top_k(freq: Counter, k: int) -> list[str]:
    # ties broken lexicographically so input order never matters
    ranked = sorted(freq.items(), key=lambda kv: (-kv[1], kv[0]))
    return [tok for tok, _ in ranked[:k]]


def build_vocab(
    bot_counts: Iterable[Counter],
    real_counts: Iterable[Counter],
    bot_top_k: int,
    real_top_k: int,
) -> Vocabulary:
    """Union of the most frequent tokens of each class, sorted for determinism."""
    bot_total: Counter = Counter()
    for c in bot_counts:
        bot_total.update(c)
    real_total: Counter = Counter()
    for c in real_counts:
        real_total.update(c)
    if not bot_total and not real_total:
        raise ParameterError("cannot build a vocabulary from empty corpora")
    chosen = sorted(set(_top_k(bot_total, bot_top_k)) | set(_top_k(real_total, real_top_k)))
    tokens = tuple(chosen)
    return Vocabulary(
        tokens=tokens,
        index={tok: i for i, tok in enumerate(tokens)},
        bot_freq=tuple(bot_total.get(tok, 0) for tok in tokens),
        real_freq=tuple(real_total.get(tok, 0) for tok in tokens),
    )


@dataclass(frozen=True)
class CountVector:
    """Sparse per-user token counts restricted to a vocabulary."""

    user_id: int
    token_ids: np.ndarray  # int32, ascending
    counts: np.ndarray     # int64


def vectorize(user_id: int, counts: Counter, vocab: Vocabulary) -> CountVector:
    items = sorted((vocab.index[tok], n) for tok, n in counts.items() if tok in vocab.index)
    if items:
        ids, ns = zip(*items)
    else:
        ids, ns = (), ()
    return CountVector(
        user_id=user_id,
        token_ids=np.asarray(ids, dtype=np.int32),
        counts=np.asarray(ns, dtype=np.int64),
    )


def vectorize_users(users: Sequence[UserRecord], vocab: Vocabulary) -> list[CountVector]:
    return [vectorize(u.user_id, user_token_counts(u), vocab) for u in users]


@dataclass(frozen=True)
class NBModel:
    vocab: Vocabulary
    alpha: float
    log_priors: np.ndarray      # shape (2,), order CLASSES
    log_likelihoods: np.ndarray  # shape (2, |V|)


def train(
    vectors: Sequence[CountVector],
    labels: Sequence[str],
    vocab: Vocabulary,
    alpha: float = 1.0,
) -> NBModel:
    """Multinomial Naive Bayes with add-alpha smoothing.

    likelihood(token | class) = (count + alpha) / (class_total + alpha * |V|)
    """
    if alpha <= 0:
        raise ParameterError("smoothing constant alpha must be positive")
    if len(vectors) != len(labels):
        raise ParameterError("vectors and labels differ in length")
    n_by_class = Counter(labels)
    for cls in CLASSES:
        if n_by_class.get(cls, 0) == 0:
            raise ParameterError(f"training set has no '{cls}' examples")
    size = len(vocab)
    token_totals = np.zeros((2, size), dtype=np.float64)
    for vec, label in zip(vectors, labels):
        ci = CLASSES.index(label)
        np.add.at(token_totals[ci], vec.token_ids, vec.counts)
    class_totals = token_totals.sum(axis=1)
    log_like = np.log(token_totals + alpha) - np.log(class_totals + alpha * size)[:, None]
    n = len(labels)
    log_priors = np.array([math.log(n_by_class[c] / n) for c in CLASSES])
    return NBModel(vocab=vocab, alpha=alpha, log_priors=log_priors, log_likelihoods=log_like)


def predict(model: NBModel, vector: CountVector) -> tuple[str, float]:
    """Most probable class and the log-posterior margin over the other class.

    Exact posterior ties resolve to "real": flagging a real account costs
    more than missing a bot.
    """
    scores = model.log_priors.copy()
    if len(vector.token_ids):
        scores = scores + model.log_likelihoods[:, vector.token_ids] @ vector.counts
    bot_score, real_score = float(scores[0]), float(scores[1])
    if bot_score > real_score:
        return "bot", bot_score - real_score
    return "real", real_score - bot_score


@dataclass(frozen=True)
class ConfusionMatrix:
    bot_correct: int = 0
    bot_wrong: int = 0    # bots predicted real
    real_correct: int = 0
    real_wrong: int = 0   # reals predicted bot

    @property
    def total(self) -> int:
        return self.bot_correct + self.bot_wrong + self.real_correct + self.real_wrong

    @property
    def accuracy(self) -> float:
        return (self.bot_correct + self.real_correct) / self.total

    def metrics(self) -> dict[str, float]:
        tp, fn = self.bot_correct, self.bot_wrong
        tn, fp = self.real_correct, self.real_wrong
        prec_bot = tp / (tp + fp) if tp + fp else 0.0
        rec_bot = tp / (tp + fn) if tp + fn else 0.0
        prec_real = tn / (tn + fn) if tn + fn else 0.0
        rec_real = tn / (tn + fp) if tn + fp else 0.0
        f_bot = 2 * prec_bot * rec_bot / (prec_bot + rec_bot) if prec_bot + rec_bot else 0.0
        f_real = 2 * prec_real * rec_real / (prec_real + rec_real) if prec_real + rec_real else 0.0
        return {
            "precision_bot": prec_bot, "recall_bot": rec_bot, "f_bot": f_bot,
            "precision_real": prec_real, "recall_real": rec_real, "f_real": f_real,
            "accuracy": self.accuracy,
        }

    def add(self, other: "ConfusionMatrix") -> "ConfusionMatrix":
        return ConfusionMatrix(
            self.bot_correct + other.bot_correct,
            self.bot_wrong + other.bot_wrong,
            self.real_correct + other.real_correct,
            self.real_wrong + other.real_wrong,
        )


@dataclass(frozen=True)
class EvalReport:
    folds: tuple[ConfusionMatrix, ...]
    pooled: ConfusionMatrix

    def to_text(self) -> str:
        lines = []
        m = self.pooled
        lines.append("confusion matrix (pooled over folds)")
        lines.append("result      bot     real    total")
        lines.append(f"correct     {m.bot_correct:<8d}{m.real_correct:<8d}{m.bot_correct + m.real_correct}")
        lines.append(f"incorrect   {m.bot_wrong:<8d}{m.real_wrong:<8d}{m.bot_wrong + m.real_wrong}")
        lines.append(f"accuracy    {m.accuracy:.4f}")
        lines.append("")
        metrics = m.metrics()
        for cls in CLASSES:
            lines.append(
                f"{cls}: precision {metrics['precision_' + cls]:.4f}  "
                f"recall {metrics['recall_' + cls]:.4f}  f-measure {metrics['f_' + cls]:.4f}")
        lines.append("")
        for i, fm in enumerate(self.folds):
            fmx = fm.metrics()
            lines.append(
                f"fold {i + 1:02d}: accuracy {fmx['accuracy']:.4f}  "
                f"bot p/r/f {fmx['precision_bot']:.4f}/{fmx['recall_bot']:.4f}/{fmx['f_bot']:.4f}  "
                f"real p/r/f {fmx['precision_real']:.4f}/{fmx['recall_real']:.4f}/{fmx['f_real']:.4f}")
        return "\n".join(lines) + "\n"


def _evaluate(model: NBModel, vectors: Sequence[CountVector], labels: Sequence[str]) -> ConfusionMatrix:
    bc = bw = rc = rw = 0
    for vec, truth in zip(vectors, labels):
        pred, _ = predict(model, vec)
        if truth == "bot":
            if pred == "bot":
                bc += 1
            else:
                bw += 1
        else:
            if pred == "real":
                rc += 1
            else:
                rw += 1
    return ConfusionMatrix(bc, bw, rc, rw)


def stratified_folds(labels: Sequence[str], k: int, seed: int) -> list[list[int]]:
    """Disjoint covering folds, balanced within one example per class."""
    folds: list[list[int]] = [[] for _ in range(k)]
    for cls in CLASSES:
        idx = [i for i, lab in enumerate(labels) if lab == cls]
        if len(idx) < k:
            raise ParameterError(f"class '{cls}' has {len(idx)} examples, fewer than k={k}")
        substream(seed, "folds", cls).shuffle(idx)
        for pos, i in enumerate(idx):
            folds[pos % k].append(i)
    return [sorted(f) for f in folds]


def kfold_eval(
    vectors: Sequence[CountVector],
    labels: Sequence[str],
    vocab: Vocabulary,
    k: int = 10,
    alpha: float = 1.0,
    seed: int = 0,
) -> EvalReport:
    folds = stratified_folds(labels, k, seed)
    fold_matrices = []
    pooled = ConfusionMatrix()
    for fold in folds:
        hold = set(fold)
        train_vecs = [v for i, v in enumerate(vectors) if i not in hold]
        train_labs = [l for i, l in enumerate(labels) if i not in hold]
        model = train(train_vecs, train_labs, vocab, alpha)
        cm = _evaluate(model, [vectors[i] for i in fold], [labels[i] for i in fold])
        fold_matrices.append(cm)
        pooled = pooled.add(cm)
    return EvalReport(folds=tuple(fold_matrices), pooled=pooled)


def duplicate_to_balance(
    vectors: Sequence[CountVector], labels: Sequence[str]
) -> tuple[list[CountVector], list[str]]:
    """Pad the minority class with copies of its own vectors to exact parity."""
    counts = Counter(labels)
    minority = min(CLASSES, key=lambda c: counts.get(c, 0))
    majority = CLASSES[1] if minority == CLASSES[0] else CLASSES[0]
    pool = [v for v, l in zip(vectors, labels) if l == minority]
    if not pool:
        raise ParameterError(f"class '{minority}' has no examples to duplicate")
    out_v = list(vectors)
    out_l = list(labels)
    have = counts[minority]
    while have + len(pool) <= counts[majority]:
        out_v.extend(pool)
        out_l.extend([minority] * len(pool))
        have += len(pool)
    need = counts[majority] - have
    out_v.extend(pool[:need])
    out_l.extend([minority] * need)
    return out_v, out_l


MODEL_MAGIC = "botweave-nb 1"


def save_model(model: NBModel, path) -> None:
    """Plain-text model file: header, alpha, priors, then one vocab row per line."""
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(MODEL_MAGIC + "\n")
        f.write(f"alpha {model.alpha!r}\n")
        f.write(f"classes {' '.join(CLASSES)}\n")
        f.write(f"log_priors {model.log_priors[0]!r} {model.log_priors[1]!r}\n")
        f.write(f"vocab_size {len(model.vocab)}\n")
        f.write("token\tbot_freq\treal_freq\tlog_like_bot\tlog_like_real\n")
        for i, tok in enumerate(model.vocab.tokens):
            f.write(f"{tok}\t{model.vocab.bot_freq[i]}\t{model.vocab.real_freq[i]}"
                    f"\t{model.log_likelihoods[0, i]!r}\t{model.log_likelihoods[1, i]!r}\n")


def load_model(path) -> NBModel:
    with open(path, encoding="utf-8") as f:
        magic = f.readline().strip()
        if magic != MODEL_MAGIC:
            raise DataFormatError(f"{path}: not a model file (header {magic!r})")
        alpha = float(f.readline().split()[1])
        f.readline()  # classes
        priors = f.readline().split()
        log_priors = np.array([float(priors[1]), float(priors[2])])
        size = int(f.readline().split()[1])
        f.readline()  # column header
        tokens: list[str] = []
        bot_freq: list[int] = []
        real_freq: list[int] = []
        ll = np.zeros((2, size), dtype=np.float64)
        for i in range(size):
            parts = f.readline().rstrip("\n").split("\t")
            if len(parts) != 5:
                raise DataFormatError(f"{path}: malformed vocabulary row {i + 1}")
            tokens.append(parts[0])
            bot_freq.append(int(parts[1]))
            real_freq.append(int(parts[2]))
            ll[0, i] = float(parts[3])
            ll[1, i] = float(parts[4])
    vocab = Vocabulary(
        tokens=tuple(tokens),
        index={tok: i for i, tok in enumerate(tokens)},
        bot_freq=tuple(bot_freq),
        real_freq=tuple(real_freq),
    )
    return NBModel(vocab=vocab, alpha=alpha, log_priors=log_priors, log_likelihoods=ll)
