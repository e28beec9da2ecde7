"""Pipeline configuration.

Flat key/value sections in an INI-style file, overridable from the
environment with ``BOTWEAVE_<SECTION>__<KEY>`` (for example
``BOTWEAVE_GENERATE__N_BOTS=100``), with CLI flags taking final precedence
for seed, output directory, and thread count.
"""

from __future__ import annotations

import configparser
import dataclasses
import os
from dataclasses import dataclass
from datetime import datetime, timezone
from typing import Optional

from .errors import ConfigError, ParameterError
from .generator import GenParams, MobilityParams, validate_params
from .models import GeoRect
from .rules import FilterRules

_SECTIONS = ("run", "generate", "sample", "geo", "filter", "classifier")


@dataclass(frozen=True)
class GeoScanParams:
    low_lo: int = 1
    low_hi: int = 9
    min_cells: int = 25
    min_fill: float = 0.8
    min_expected: float = 5.0


@dataclass(frozen=True)
class ClassifierParams:
    alpha: float = 1.0
    folds: int = 10
    bot_top_k: int = 3000
    real_top_k: int = 5000
    neg_ratio: float = 3.0


@dataclass(frozen=True)
class PipelineConfig:
    seed: int = 20130714
    out_dir: str = "out"
    threads: int = 0  # 0 means "logical cores"
    sample_p: float = 0.5
    gen: GenParams = GenParams()
    geo: GeoScanParams = GeoScanParams()
    rules: FilterRules = FilterRules()
    clf: ClassifierParams = ClassifierParams()
    bot_corpus_path: Optional[str] = None
    real_corpora_paths: tuple[str, ...] = ()

    @property
    def effective_threads(self) -> int:
        return self.threads if self.threads > 0 else (os.cpu_count() or 1)


def _read_ini(path: str) -> dict[str, dict[str, str]]:
    parser = configparser.ConfigParser()
    read = parser.read(path)
    if not read:
        raise ConfigError(f"config file not found: {path}")
    out: dict[str, dict[str, str]] = {}
    for section in parser.sections():
        if section not in _SECTIONS:
            raise ConfigError(f"unknown config section [{section}]")
        out[section] = dict(parser.items(section))
    return out


def _apply_env(raw: dict[str, dict[str, str]], env: dict[str, str]) -> None:
    for name, value in env.items():
        if not name.startswith("BOTWEAVE_"):
            continue
        body = name[len("BOTWEAVE_"):]
        section, sep, key = body.partition("__")
        if not sep:
            raise ConfigError(f"environment override {name} must look like "
                              f"BOTWEAVE_<SECTION>__<KEY>")
        section = section.lower()
        if section not in _SECTIONS:
            raise ConfigError(f"environment override {name}: unknown section '{section}'")
        raw.setdefault(section, {})[key.lower()] = value


def _scalar(text: str, default, where: str):
    try:
        if isinstance(default, bool):
            low = text.strip().lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(f"not a boolean: {text!r}")
        if isinstance(default, int):
            return int(text)
        if isinstance(default, float):
            return float(text)
        return text
    except ValueError as e:
        raise ConfigError(f"{where}: {e}") from None


def _floats(text: str, n: int, where: str) -> list[float]:
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != n:
        raise ConfigError(f"{where}: expected {n} comma-separated values")
    try:
        return [float(p) for p in parts]
    except ValueError:
        raise ConfigError(f"{where}: non-numeric value") from None


def _date(text: str, where: str) -> datetime:
    try:
        return datetime.strptime(text.strip(), "%Y-%m-%d").replace(tzinfo=timezone.utc)
    except ValueError:
        raise ConfigError(f"{where}: expected YYYY-MM-DD") from None


_GEN_SPECIAL = {"id_range", "rects", "mobility", "source_mix", "followback_tags",
                "customer_shares", "date_window", "seed"}


def _build_gen(section: dict[str, str], seed: int) -> GenParams:
    defaults = GenParams(seed=seed)
    kwargs = {}
    scalar_fields = {f.name: getattr(defaults, f.name)
                     for f in dataclasses.fields(GenParams)
                     if f.name not in _GEN_SPECIAL}
    handled = set()
    for key, value in section.items():
        where = f"[generate] {key}"
        if key in scalar_fields:
            kwargs[key] = _scalar(value, scalar_fields[key], where)
            handled.add(key)
        elif key == "id_range":
            lo, hi = _floats(value, 2, where)
            kwargs["id_range"] = (int(lo), int(hi))
            handled.add(key)
        elif key in ("rect_na", "rect_eu"):
            vals = _floats(value, 4, where)
            rect = GeoRect(lat_min=vals[0], lat_max=vals[1], lon_min=vals[2], lon_max=vals[3])
            na, eu = kwargs.get("rects", defaults.rects)
            kwargs["rects"] = (rect, eu) if key == "rect_na" else (na, rect)
            handled.add(key)
        elif key in ("mobility_alpha", "mobility_scale_km", "mobility_cap_km"):
            mob = kwargs.get("mobility", defaults.mobility)
            val = _scalar(value, 1.0, where)
            name = {"mobility_alpha": "pareto_alpha", "mobility_scale_km": "scale_km",
                    "mobility_cap_km": "cap_km"}[key]
            kwargs["mobility"] = dataclasses.replace(mob, **{name: val})
            handled.add(key)
        elif key == "followback_tags":
            kwargs["followback_tags"] = tuple(p.strip() for p in value.split(",") if p.strip())
            handled.add(key)
        elif key == "customer_shares":
            shares = tuple(float(p) for p in value.split(",") if p.strip())
            kwargs["customer_shares"] = shares
            kwargs.setdefault("n_customers", len(shares))
            handled.add(key)
        elif key == "date_window":
            parts = value.split(",")
            if len(parts) != 2:
                raise ConfigError(f"{where}: expected two comma-separated dates")
            kwargs["date_window"] = (_date(parts[0], where), _date(parts[1], where))
            handled.add(key)
        elif key in ("bot_corpus", "real_corpora"):
            handled.add(key)  # consumed by load_config
        else:
            raise ConfigError(f"{where}: unknown key")
    return dataclasses.replace(defaults, **kwargs)


def _build_simple(cls, section: dict[str, str], name: str, skip=()):
    defaults = cls()
    kwargs = {}
    fields = {f.name: getattr(defaults, f.name) for f in dataclasses.fields(cls)}
    for key, value in section.items():
        if key in skip:
            continue
        if key not in fields:
            raise ConfigError(f"[{name}] {key}: unknown key")
        kwargs[key] = _scalar(value, fields[key], f"[{name}] {key}")
    return dataclasses.replace(defaults, **kwargs)


def load_config(
    path: Optional[str] = None,
    seed: Optional[int] = None,
    out_dir: Optional[str] = None,
    threads: Optional[int] = None,
    env: Optional[dict[str, str]] = None,
) -> PipelineConfig:
    """Assemble the configuration from file, environment, and CLI flags."""
    raw: dict[str, dict[str, str]] = {}
    if path is not None:
        raw = _read_ini(path)
    _apply_env(raw, dict(os.environ) if env is None else env)

    run = raw.get("run", {})
    for key in run:
        if key not in ("seed", "out", "threads"):
            raise ConfigError(f"[run] {key}: unknown key")
    eff_seed = seed if seed is not None else int(run.get("seed", PipelineConfig.seed))
    eff_out = out_dir if out_dir is not None else run.get("out", PipelineConfig.out_dir)
    eff_threads = threads if threads is not None else int(run.get("threads", 0))

    gen_section = raw.get("generate", {})
    gen = _build_gen(gen_section, eff_seed)

    sample = raw.get("sample", {})
    for key in sample:
        if key != "p":
            raise ConfigError(f"[sample] {key}: unknown key")
    sample_p = float(sample.get("p", PipelineConfig.sample_p))
    if not 0.0 <= sample_p <= 1.0:
        raise ConfigError(f"[sample] p={sample_p} outside [0, 1]")

    geo = _build_simple(GeoScanParams, raw.get("geo", {}), "geo")

    filter_section = dict(raw.get("filter", {}))
    id_range = None
    if "id_range" in filter_section:
        lo, hi = _floats(filter_section.pop("id_range"), 2, "[filter] id_range")
        id_range = (int(lo), int(hi))
    rules = _build_simple(FilterRules, filter_section, "filter")
    if id_range is not None:
        rules = dataclasses.replace(rules, id_range=id_range)

    clf = _build_simple(ClassifierParams, raw.get("classifier", {}), "classifier")
    if clf.alpha <= 0:
        raise ConfigError("[classifier] alpha must be positive")
    if clf.folds < 2:
        raise ConfigError("[classifier] folds must be at least 2")
    if clf.neg_ratio <= 0:
        raise ConfigError("[classifier] neg_ratio must be positive")

    bot_corpus = gen_section.get("bot_corpus")
    real_corpora = tuple(p.strip() for p in gen_section.get("real_corpora", "").split(",")
                         if p.strip())
    try:
        validate_params(gen)
        rules.validate()
    except ParameterError as e:
        raise ConfigError(str(e)) from None
    return PipelineConfig(
        seed=eff_seed,
        out_dir=eff_out,
        threads=eff_threads,
        sample_p=sample_p,
        gen=gen,
        geo=geo,
        rules=rules,
        clf=clf,
        bot_corpus_path=bot_corpus,
        real_corpora_paths=real_corpora,
    )
