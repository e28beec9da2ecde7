"""Command-line interface.

    botweave [--config PATH] [--seed N] [--threads N] [--out DIR] <command>

Commands: generate, sample, geo-scan, filter, train, eval, classify,
analyze, report, run.  Exit codes: 0 success, 2 configuration error,
3 data error, 4 stage failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Optional

from . import pipeline as pl
from . import textclf
from .config import PipelineConfig, load_config
from .errors import ConfigError, DataFormatError, ParameterError, StageError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_STAGE = 4

COMMANDS = ("generate", "sample", "geo-scan", "filter", "train", "eval",
            "classify", "analyze", "report", "run")


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="botweave",
        description="Synthetic botnet dataset generator and detection pipeline.")
    p.add_argument("--config", metavar="PATH", help="pipeline config file (INI sections)")
    p.add_argument("--seed", type=int, metavar="N", help="master seed override")
    p.add_argument("--threads", type=int, metavar="N",
                   help="worker cap for parallel stages (default: logical cores)")
    p.add_argument("--out", metavar="DIR", help="output directory (default: out)")
    sub = p.add_subparsers(dest="command", metavar="COMMAND")
    for name in COMMANDS:
        sub.add_parser(name)
    return p


def _sampled_users(cfg: PipelineConfig, ds):
    ids_path = Path(cfg.out_dir) / "sample" / "sample_ids.txt"
    if ids_path.exists():
        wanted = set(pl._read_ids(ids_path))
        return [u for u in ds.users if u.user_id in wanted]
    return list(ds.users)


def _run_command(command: str, cfg: PipelineConfig) -> None:
    if command == "generate":
        ds = pl.stage_generate(cfg)
        print(f"generated {len(ds.users)} users, {len(ds.graph)} edges -> "
              f"{Path(cfg.out_dir) / 'dataset'}")
        return
    if command == "run":
        result = pl.run_pipeline(cfg)
        m = result.metrics
        print(f"pipeline done in {m['runtime_s']:.1f}s: "
              f"{m['n_candidates']} candidates, {m['n_retrieved']} retrieved "
              f"-> {result.out_dir / 'report'}")
        return

    ds = pl.load_pipeline_dataset(cfg)
    if command == "sample":
        sampled = pl.stage_sample(cfg, ds)
        print(f"kept {len(sampled)} of {len(ds.users)} users (p={cfg.sample_p})")
    elif command == "geo-scan":
        grid, regions, region_users = pl.stage_geo_scan(cfg, _sampled_users(cfg, ds))
        print(f"grid: {grid.total} geotagged tweets in {len(grid.cells)} cells; "
              f"{len(regions)} anomaly region(s); {len(region_users)} users inside")
    elif command == "filter":
        ids_path = Path(cfg.out_dir) / "geo" / "region_user_ids.txt"
        restrict = pl._read_ids(ids_path) if ids_path.exists() else None
        candidates, rejected = pl.stage_filter(cfg, ds, restrict)
        print(f"{len(candidates)} candidates, {len(rejected)} rejected")
    elif command == "train":
        training = pl.load_training_set(cfg, ds)
        model = pl.stage_train(cfg, training)
        if model is None:
            print("no candidates: nothing to train on")
        else:
            print(f"trained on {len(training.vectors)} users, |V|={len(model.vocab)}")
    elif command == "eval":
        training = pl.load_training_set(cfg, ds)
        metrics = pl.stage_eval(cfg, training)
        if metrics:
            print(f"pooled accuracy {metrics['cv']['accuracy']:.4f}, "
                  f"balanced delta {metrics['balanced_delta']:.4f}")
        else:
            print("no training set: wrote empty evaluation artifacts")
    elif command == "classify":
        model_path = Path(cfg.out_dir) / "model" / "model.txt"
        model = textclf.load_model(model_path) if model_path.exists() else None
        retrieved = pl.stage_classify(cfg, ds, model)
        print(f"retrieved {len(retrieved)} bots")
    elif command == "analyze":
        retrieved = pl._read_ids(
            pl._require(Path(cfg.out_dir) / "classify" / "retrieved_ids.txt", "classify"))
        analysis = pl.stage_analyze(cfg, ds, retrieved)
        comp = analysis["link_composition"]
        print(f"incoming fraction {comp.incoming_fraction:.4f}, "
              f"outgoing fraction {comp.outgoing_fraction:.4f}")
    elif command == "report":
        pl.stage_report(cfg, ds)
        print(f"report bundle -> {Path(cfg.out_dir) / 'report'}")


def main(argv: Optional[list[str]] = None) -> int:
    args = _parser().parse_args(argv)
    if args.command is None:
        _parser().print_usage(sys.stderr)
        return EXIT_CONFIG
    try:
        cfg = load_config(path=args.config, seed=args.seed,
                          out_dir=args.out, threads=args.threads)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        _run_command(args.command, cfg)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except DataFormatError as e:
        print(f"data error: {e}", file=sys.stderr)
        return EXIT_DATA
    except StageError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_STAGE
    except ParameterError as e:
        print(f"error in stage '{args.command}': {e}", file=sys.stderr)
        return EXIT_STAGE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
