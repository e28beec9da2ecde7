"""Pipeline stages and the consolidated report.

Discovery -> retrieval -> analysis, mirrored as resumable stages that each
persist their artifacts under the output directory:

  generate   dataset/ (unlabeled) + dataset/labels.csv (ground truth sidecar)
  sample     sample/sample_ids.txt
  geo-scan   geo/grid.csv, geo/regions.csv, geo/region_user_ids.txt
  filter     filter/candidate_ids.txt, filter/rejections.csv
  train      model/model.txt, model/training_set.csv
  eval       eval/eval_report.txt, eval/confusion_matrix.csv, eval/balanced_eval.txt
  classify   classify/predictions.csv, classify/retrieved_ids.txt
  analyze    analyze/*.csv
  report     report/*.csv, report/summary.txt, report/figures/*.png

Detection stages never read the labels sidecar; only eval and report do.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

from . import corpus as corpus_mod
from . import dataset_io as dio
from . import figures
from . import geo as geo_mod
from . import graph as graph_mod
from . import rules as rules_mod
from . import textclf
from .config import PipelineConfig
from .errors import DataFormatError, StageError
from .generator import generate
from .models import Dataset, GeoRect, UserRecord
from .rng import substream

REPORT_FILES = (
    "geo_grid.csv",
    "distance_histograms.csv",
    "degree_histograms.csv",
    "confusion_matrix.csv",
    "link_composition.csv",
    "top_followed.csv",
)


@dataclass
class PipelineResult:
    out_dir: Path
    metrics: dict = field(default_factory=dict)


def _out(cfg: PipelineConfig) -> Path:
    return Path(cfg.out_dir)


def _require(path: Path, stage: str) -> Path:
    if not path.exists():
        raise DataFormatError(f"missing artifact {path}; run the '{stage}' stage first")
    return path


def _write_ids(path: Path, ids) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for uid in sorted(ids):
            f.write(f"{uid}\n")


def _read_ids(path: Path) -> list[int]:
    with open(path, encoding="utf-8") as f:
        return [int(line) for line in f if line.strip()]


def _load_corpora(cfg: PipelineConfig):
    bot = (corpus_mod.load_corpus(cfg.bot_corpus_path)
           if cfg.bot_corpus_path else corpus_mod.bundled_bot_corpus())
    reals = ([corpus_mod.load_corpus(p) for p in cfg.real_corpora_paths]
             if cfg.real_corpora_paths else corpus_mod.bundled_real_corpora())
    return bot, reals


# --------------------------------------------------------------------------
# stages

def stage_generate(cfg: PipelineConfig) -> Dataset:
    """Generate the synthetic dataset; labels go to a separate sidecar the
    detection stages never read."""
    bot_corpus, real_corpora = _load_corpora(cfg)
    ds = generate(cfg.gen, bot_corpus, real_corpora, threads=cfg.effective_threads)
    root = _out(cfg) / "dataset"
    stripped, labels = dio.strip_labels(ds)
    dio.save_dataset(stripped, root)
    dio.write_labels(root / "labels.csv", labels)
    return stripped


def load_pipeline_dataset(cfg: PipelineConfig) -> Dataset:
    return dio.load_dataset(_require(_out(cfg) / "dataset", "generate"))


def stage_sample(cfg: PipelineConfig, ds: Dataset) -> list[UserRecord]:
    sampled = rules_mod.sample_uniform(ds.users, cfg.sample_p, cfg.seed)
    root = _out(cfg) / "sample"
    root.mkdir(parents=True, exist_ok=True)
    _write_ids(root / "sample_ids.txt", [u.user_id for u in sampled])
    return sampled


def stage_geo_scan(
    cfg: PipelineConfig, sampled: Sequence[UserRecord]
) -> tuple[geo_mod.GeoGrid, list[geo_mod.AnomalyRegion], list[int]]:
    grid = geo_mod.bin_tweets(sampled)
    regions = geo_mod.detect_rectangles(
        grid,
        low_band=(cfg.geo.low_lo, cfg.geo.low_hi),
        min_cells=cfg.geo.min_cells,
        min_fill=cfg.geo.min_fill,
    )
    region_users = geo_mod.users_tweeting_inside(sampled, [r.box for r in regions])
    root = _out(cfg) / "geo"
    root.mkdir(parents=True, exist_ok=True)
    geo_mod.write_grid_csv(root / "grid.csv", grid)
    with open(root / "regions.csv", "w", encoding="utf-8", newline="\n") as f:
        f.write("lat_min,lat_max,lon_min,lon_max,n_cells,fill_ratio,mean_count\n")
        for r in regions:
            f.write(f"{r.box.lat_min!r},{r.box.lat_max!r},{r.box.lon_min!r},"
                    f"{r.box.lon_max!r},{r.n_cells},{r.fill_ratio!r},{r.mean_count!r}\n")
    _write_ids(root / "region_user_ids.txt", region_users)
    return grid, regions, region_users


def stage_filter(
    cfg: PipelineConfig, ds: Dataset, restrict_ids: Optional[Sequence[int]] = None
) -> tuple[list[UserRecord], list[tuple[int, str]]]:
    """Apply the structural rules; in the pipeline the input is the set of
    users who tweeted inside detected anomaly regions."""
    users = ds.users
    if restrict_ids is not None:
        wanted = set(restrict_ids)
        users = tuple(u for u in users if u.user_id in wanted)
    candidates, rejected = rules_mod.apply_rules(users, cfg.rules)
    root = _out(cfg) / "filter"
    root.mkdir(parents=True, exist_ok=True)
    _write_ids(root / "candidate_ids.txt", [u.user_id for u in candidates])
    with open(root / "rejections.csv", "w", encoding="utf-8", newline="\n") as f:
        f.write("user_id,reason\n")
        for uid, reason in rejected:
            f.write(f"{uid},{reason}\n")
    return candidates, rejected


@dataclass
class TrainingSet:
    vectors: list[textclf.CountVector]
    labels: list[str]
    vocab: textclf.Vocabulary
    positive_ids: list[int]
    negative_ids: list[int]


def build_training_set(
    cfg: PipelineConfig, ds: Dataset, candidate_ids: Sequence[int],
    sample_ids: Sequence[int],
) -> Optional[TrainingSet]:
    """Seed bots are the positives; negatives are sampled users whose IDs lie
    outside the filter's ID range (known background, mirroring a crawl of
    ordinary accounts)."""
    by_id = ds.by_id()
    positives = [by_id[uid] for uid in sorted(candidate_ids) if uid in by_id]
    if not positives:
        return None
    lo, hi = cfg.rules.id_range
    pool = [by_id[uid] for uid in sorted(sample_ids)
            if uid in by_id and not (lo <= uid < hi)]
    want = int(round(cfg.clf.neg_ratio * len(positives)))
    if len(pool) > want:
        rng = substream(cfg.seed, "train-negatives")
        pool = [pool[i] for i in sorted(rng.sample(range(len(pool)), want))]
    if not pool:
        return None
    bot_counts = [textclf.user_token_counts(u) for u in positives]
    real_counts = [textclf.user_token_counts(u) for u in pool]
    vocab = textclf.build_vocab(bot_counts, real_counts,
                                cfg.clf.bot_top_k, cfg.clf.real_top_k)
    vectors = [textclf.vectorize(u.user_id, c, vocab)
               for u, c in zip(positives + pool, bot_counts + real_counts)]
    labels = ["bot"] * len(positives) + ["real"] * len(pool)
    return TrainingSet(
        vectors=vectors,
        labels=labels,
        vocab=vocab,
        positive_ids=[u.user_id for u in positives],
        negative_ids=[u.user_id for u in pool],
    )


def stage_train(cfg: PipelineConfig, training: Optional[TrainingSet]) -> Optional[textclf.NBModel]:
    root = _out(cfg) / "model"
    root.mkdir(parents=True, exist_ok=True)
    with open(root / "training_set.csv", "w", encoding="utf-8", newline="\n") as f:
        f.write("user_id,role\n")
        if training is not None:
            for uid in training.positive_ids:
                f.write(f"{uid},seed_bot\n")
            for uid in training.negative_ids:
                f.write(f"{uid},background\n")
    if training is None:
        return None
    model = textclf.train(training.vectors, training.labels, training.vocab, cfg.clf.alpha)
    textclf.save_model(model, root / "model.txt")
    return model


def load_training_set(cfg: PipelineConfig, ds: Dataset) -> Optional[TrainingSet]:
    """Rebuild the training set from persisted stage artifacts."""
    root = _out(cfg)
    candidates = _read_ids(_require(root / "filter" / "candidate_ids.txt", "filter"))
    sample_ids = _read_ids(_require(root / "sample" / "sample_ids.txt", "sample"))
    return build_training_set(cfg, ds, candidates, sample_ids)


def stage_eval(cfg: PipelineConfig, training: Optional[TrainingSet]) -> dict:
    """K-fold cross validation plus the balanced-duplication sanity check."""
    root = _out(cfg) / "eval"
    root.mkdir(parents=True, exist_ok=True)
    if training is None:
        (root / "eval_report.txt").write_text("no training set: no candidates found\n")
        with open(root / "confusion_matrix.csv", "w", encoding="utf-8", newline="\n") as f:
            f.write("result,bot,real,total\n")
        (root / "balanced_eval.txt").write_text("no training set\n")
        return {}
    report = textclf.kfold_eval(training.vectors, training.labels, training.vocab,
                                k=cfg.clf.folds, alpha=cfg.clf.alpha, seed=cfg.seed)
    (root / "eval_report.txt").write_text(report.to_text(), encoding="utf-8")
    m = report.pooled
    with open(root / "confusion_matrix.csv", "w", encoding="utf-8", newline="\n") as f:
        f.write("result,bot,real,total\n")
        f.write(f"correct,{m.bot_correct},{m.real_correct},{m.bot_correct + m.real_correct}\n")
        f.write(f"incorrect,{m.bot_wrong},{m.real_wrong},{m.bot_wrong + m.real_wrong}\n")
        f.write(f"accuracy,{m.metrics()['recall_bot']!r},{m.metrics()['recall_real']!r},"
                f"{m.accuracy!r}\n")
    bal_vectors, bal_labels = textclf.duplicate_to_balance(training.vectors, training.labels)
    balanced = textclf.kfold_eval(bal_vectors, bal_labels, training.vocab,
                                  k=cfg.clf.folds, alpha=cfg.clf.alpha, seed=cfg.seed)
    delta = abs(balanced.pooled.accuracy - report.pooled.accuracy)
    (root / "balanced_eval.txt").write_text(
        f"unbalanced accuracy {report.pooled.accuracy!r}\n"
        f"balanced accuracy {balanced.pooled.accuracy!r}\n"
        f"delta {delta!r}\n", encoding="utf-8")
    fold_metrics = [fm.metrics() for fm in report.folds]
    return {
        "cv": report.pooled.metrics(),
        "cv_folds": fold_metrics,
        "balanced_accuracy": balanced.pooled.accuracy,
        "balanced_delta": delta,
    }


def stage_classify(
    cfg: PipelineConfig, ds: Dataset, model: Optional[textclf.NBModel]
) -> list[int]:
    """Scan the full ID-range population, apply the rules, classify the rest."""
    root = _out(cfg) / "classify"
    root.mkdir(parents=True, exist_ok=True)
    in_range = rules_mod.id_range_scan(ds.users, cfg.rules.id_range, cfg.rules.language)
    candidates, _ = rules_mod.apply_rules(in_range, cfg.rules)
    retrieved: list[int] = []
    with open(root / "predictions.csv", "w", encoding="utf-8", newline="\n") as f:
        f.write("user_id,predicted_label,margin\n")
        if model is not None:
            for u in candidates:
                vec = textclf.vectorize(u.user_id, textclf.user_token_counts(u), model.vocab)
                label, margin = textclf.predict(model, vec)
                f.write(f"{u.user_id},{label},{margin!r}\n")
                if label == "bot":
                    retrieved.append(u.user_id)
    _write_ids(root / "retrieved_ids.txt", retrieved)
    return retrieved


def stage_analyze(cfg: PipelineConfig, ds: Dataset, retrieved: Sequence[int]) -> dict:
    root = _out(cfg) / "analyze"
    root.mkdir(parents=True, exist_ok=True)
    botnet = set(retrieved)
    comp = graph_mod.link_composition(ds.graph, botnet)
    with open(root / "link_composition.csv", "w", encoding="utf-8", newline="\n") as f:
        f.write("metric,value\n")
        f.write(f"incoming_total,{comp.incoming_total}\n")
        f.write(f"incoming_from_botnet,{comp.incoming_from_botnet}\n")
        f.write(f"incoming_fraction,{comp.incoming_fraction!r}\n")
        f.write(f"outgoing_total,{comp.outgoing_total}\n")
        f.write(f"outgoing_to_botnet,{comp.outgoing_to_botnet}\n")
        f.write(f"outgoing_fraction,{comp.outgoing_fraction!r}\n")
    other = [u.user_id for u in ds.users if u.user_id not in botnet]
    hists = {
        "botnet": graph_mod.degree_distributions(ds.graph, botnet),
        "other": graph_mod.degree_distributions(ds.graph, other),
    }
    with open(root / "degree_histograms.csv", "w", encoding="utf-8", newline="\n") as f:
        f.write("population,direction,degree,count\n")
        for name, (in_h, out_h) in hists.items():
            for deg, n in in_h.items():
                f.write(f"{name},in,{deg},{n}\n")
            for deg, n in out_h.items():
                f.write(f"{name},out,{deg},{n}\n")
    dstats = geo_mod.consecutive_distance_stats(ds.users, bot_ids=botnet)
    with open(root / "distance_histograms.csv", "w", encoding="utf-8", newline="\n") as f:
        f.write("population,bin_lo,bin_hi,count\n")
        for name, g in dstats.groups.items():
            for i, n in enumerate(g.hist):
                f.write(f"{name},{dstats.bin_edges[i]!r},{dstats.bin_edges[i + 1]!r},{n}\n")
    top = graph_mod.top_external_followed(ds.graph, botnet, top_n=10)
    with open(root / "top_followed.csv", "w", encoding="utf-8", newline="\n") as f:
        f.write("external_id,bot_follower_count\n")
        for uid, n in top:
            f.write(f"{uid},{n}\n")
    return {
        "link_composition": comp,
        "distance_stats": dstats,
        "degree_hists": hists,
        "top_followed": top,
    }


def _retrieval_eval(labels: dict[int, str], retrieved: Sequence[int]) -> dict:
    true_bots = {uid for uid, lab in labels.items() if lab == "bot"}
    got = set(retrieved)
    tp = len(got & true_bots)
    fp = len(got - true_bots)
    fn = len(true_bots - got)
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return {"tp": tp, "fp": fp, "fn": fn,
            "precision": precision, "recall": recall, "f1": f1}


def stage_report(cfg: PipelineConfig, ds: Dataset) -> dict:
    """Assemble the consolidated CSV bundle, summary, and figures from the
    persisted stage artifacts.  This is an evaluation stage: it reads the
    ground-truth sidecar when one exists."""
    root = _out(cfg)
    rep = root / "report"
    figdir = rep / "figures"
    figdir.mkdir(parents=True, exist_ok=True)

    grid_src = _require(root / "geo" / "grid.csv", "geo-scan")
    (rep / "geo_grid.csv").write_bytes(grid_src.read_bytes())
    for name, stage in (("distance_histograms.csv", "analyze"),
                        ("degree_histograms.csv", "analyze"),
                        ("link_composition.csv", "analyze"),
                        ("top_followed.csv", "analyze")):
        src = _require(root / "analyze" / name, stage)
        (rep / name).write_bytes(src.read_bytes())
    cm_src = _require(root / "eval" / "confusion_matrix.csv", "eval")
    (rep / "confusion_matrix.csv").write_bytes(cm_src.read_bytes())

    retrieved = _read_ids(_require(root / "classify" / "retrieved_ids.txt", "classify"))
    labels_path = root / "dataset" / "labels.csv"
    labels = dio.read_labels(labels_path) if labels_path.exists() else {}

    metrics: dict = {}
    lines = ["pipeline report", "=" * 40]
    n_bots_true = sum(1 for v in labels.values() if v == "bot")
    lines.append(f"users: {len(ds.users)}  edges: {len(ds.graph)}")
    if labels:
        lines.append(f"ground truth: {n_bots_true} bots / {len(labels) - n_bots_true} real")
    lines.append(f"retrieved bots: {len(retrieved)}")
    if labels:
        ev = _retrieval_eval(labels, retrieved)
        metrics["retrieval"] = ev
        with open(rep / "retrieval_eval.csv", "w", encoding="utf-8", newline="\n") as f:
            f.write("metric,value\n")
            for k in ("tp", "fp", "fn"):
                f.write(f"{k},{ev[k]}\n")
            for k in ("precision", "recall", "f1"):
                f.write(f"{k},{ev[k]!r}\n")
        lines.append(f"retrieval precision {ev['precision']:.4f}  recall {ev['recall']:.4f}")

    split = geo_mod.rect_split_stats(
        [u for u in ds.users if u.user_id in set(retrieved)], cfg.gen.rects)
    lines.append(f"retrieved-bot geotag split: {split.in_first} / {split.in_second} "
                 f"(elsewhere {split.elsewhere})")
    metrics["split"] = split

    # figures; grouped by ground-truth label when available, else by retrieval
    bot_ids = ({uid for uid, lab in labels.items() if lab == "bot"}
               if labels else set(retrieved))
    bots = [u for u in ds.users if u.user_id in bot_ids]
    others = [u for u in ds.users if u.user_id not in bot_ids]
    full_grid = geo_mod.bin_tweets(ds.users)
    figures.tweet_map_figure(full_grid, list(cfg.gen.rects), figdir / "tweet_map.png")
    figures.cell_counts_figure(
        {"real": geo_mod.bin_tweets(others), "bot": geo_mod.bin_tweets(bots)},
        list(cfg.gen.rects), figdir / "cell_counts.png")
    dstats = geo_mod.consecutive_distance_stats(ds.users, bot_ids=bot_ids)
    figures.distance_figure(dstats, figdir / "distance_distributions.png")
    figures.degree_figure(
        {"bot": graph_mod.degree_distributions(ds.graph, [u.user_id for u in bots]),
         "other": graph_mod.degree_distributions(ds.graph, [u.user_id for u in others])},
        figdir / "degree_distributions.png")

    comp = graph_mod.link_composition(ds.graph, bot_ids)
    lines.append(f"link composition (ground truth botnet): "
                 f"incoming {comp.incoming_fraction:.4f} "
                 f"({comp.incoming_from_botnet}/{comp.incoming_total}), "
                 f"outgoing {comp.outgoing_fraction:.4f} "
                 f"({comp.outgoing_to_botnet}/{comp.outgoing_total})")
    for name, g in dstats.groups.items():
        lines.append(f"mean consecutive distance [{name}]: {g.mean_km:.1f} km (n={g.count})")
    metrics["gt_distance_stats"] = dstats
    metrics["gt_link_composition"] = comp
    (rep / "summary.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")
    return metrics


# --------------------------------------------------------------------------
# orchestration

def run_pipeline(cfg: PipelineConfig) -> PipelineResult:
    """Run every stage in order, handing artifacts forward in memory."""
    t0 = time.monotonic()
    result = PipelineResult(out_dir=_out(cfg))

    def run_stage(name, fn, *args):
        try:
            return fn(*args)
        except Exception as e:
            raise StageError(name, e) from e

    ds = run_stage("generate", stage_generate, cfg)
    sampled = run_stage("sample", stage_sample, cfg, ds)
    grid, regions, region_users = run_stage("geo-scan", stage_geo_scan, cfg, sampled)
    candidates, _ = run_stage("filter", stage_filter, cfg, ds, region_users)
    sample_ids = [u.user_id for u in sampled]
    training = run_stage("train", build_training_set, cfg, ds,
                         [u.user_id for u in candidates], sample_ids)
    model = run_stage("train", stage_train, cfg, training)
    eval_metrics = run_stage("eval", stage_eval, cfg, training)
    retrieved = run_stage("classify", stage_classify, cfg, ds, model)
    analysis = run_stage("analyze", stage_analyze, cfg, ds, retrieved)
    report_metrics = run_stage("report", stage_report, cfg, ds)

    result.metrics = {
        "n_users": len(ds.users),
        "n_sampled": len(sampled),
        "regions": regions,
        "n_candidates": len(candidates),
        "n_retrieved": len(retrieved),
        "runtime_s": time.monotonic() - t0,
        **eval_metrics,
        **{k: v for k, v in analysis.items()},
        **report_metrics,
    }
    return result
