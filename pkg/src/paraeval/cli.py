"""Command-line entry point: generate, score, eval, correlate, build-trainset.

Each subcommand reads a flat ``key = value`` config file (unknown keys are
rejected, paths are validated up front), logs to stderr, and writes data
only to files or stdout. Exit codes: 0 success, 1 usage/config error,
2 I/O or data error, 3 upstream service failure.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import re
import sys
from collections import defaultdict
from pathlib import Path
from typing import Optional

from . import bleu_para, correlation, data, generation, semantic
from .parascore import (
    DEFAULT_GAMMA,
    DEFAULT_OMEGA,
    DEFAULT_THRESHOLD,
    ParaScoreConfig,
    score_set,
    summarize,
    write_distribution_csv,
)

log = logging.getLogger("paraeval")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_IO = 2
EXIT_SERVICE = 3

API_KEY_ENV = "PARAEVAL_API_KEY"


class ConfigError(Exception):
    pass


def load_config(path: str) -> dict[str, str]:
    """Parse a flat ``key = value`` file; '#' starts a comment line."""
    values: dict[str, str] = {}
    try:
        with open(path, encoding="utf-8") as f:
            for line_no, line in enumerate(f, start=1):
                line = line.strip()
                if not line or line.startswith("#"):
                    continue
                if "=" not in line:
                    raise ConfigError(f"{path}:{line_no}: expected 'key = value'")
                key, _, value = line.partition("=")
                key = key.strip()
                value = value.strip()
                if not key:
                    raise ConfigError(f"{path}:{line_no}: empty key")
                if key in values:
                    raise ConfigError(f"{path}:{line_no}: duplicate key {key!r}")
                values[key] = value
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e
    return values


class Config:
    """Typed accessors over the raw key-value map with strict key checking."""

    def __init__(self, values: dict[str, str]):
        self._values = values
        self._used: set[str] = set()

    def get(self, key: str, default: Optional[str] = None, required: bool = False) -> Optional[str]:
        self._used.add(key)
        if key in self._values:
            return self._values[key]
        if required:
            raise ConfigError(f"missing required config key {key!r}")
        return default

    def get_float(self, key: str, default: float) -> float:
        raw = self.get(key)
        if raw is None:
            return default
        try:
            return float(raw)
        except ValueError:
            raise ConfigError(f"config key {key!r} must be a number, got {raw!r}")

    def get_int(self, key: str, default: int) -> int:
        raw = self.get(key)
        if raw is None:
            return default
        try:
            return int(raw)
        except ValueError:
            raise ConfigError(f"config key {key!r} must be an integer, got {raw!r}")

    def reject_unknown(self):
        unknown = sorted(set(self._values) - self._used)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")

    def require_readable(self, key: str) -> str:
        path = self.get(key, required=True)
        if not os.path.isfile(path):
            raise ConfigError(f"config key {key!r}: file not found: {path}")
        return path


def _out_path(cfg: Config, args, key: str = "out", required: bool = True) -> str:
    if args.out:
        cfg.get(key)  # mark as known even when overridden
        return args.out
    path = cfg.get(key, required=required)
    return path


def _limit(items, args):
    if args.limit is not None:
        return items[: args.limit]
    return items


def _build_provider(cfg: Config) -> semantic.EmbeddingProvider:
    kind = cfg.get("provider.kind", required=True)
    cache_size = cfg.get_int("provider.cache_size", 4096)
    if kind == "file":
        store = cfg.require_readable("provider.path")
        cfg.get("provider.endpoint")
        cfg.get("provider.timeout")
        cfg.get("provider.max_in_flight")
        inner = semantic.FileProvider(store)
    elif kind == "service":
        endpoint = cfg.get("provider.endpoint", required=True)
        timeout = cfg.get_float("provider.timeout", 30.0)
        max_in_flight = cfg.get_int("provider.max_in_flight", 4)
        cfg.get("provider.path")
        inner = semantic.ServiceProvider(endpoint, timeout=timeout, max_in_flight=max_in_flight)
    else:
        raise ConfigError(f"provider.kind must be 'file' or 'service', got {kind!r}")
    return semantic.CachedProvider(inner, capacity=cache_size)


def cmd_generate(cfg: Config, args) -> int:
    corpus_path = cfg.require_readable("corpus")
    corpus_format = cfg.get("corpus_format", "jsonl")
    out = _out_path(cfg, args)
    failures = cfg.get("failures", str(out) + ".failures.jsonl")
    gen_cfg = generation.GenerationConfig(
        k=cfg.get_int("generation.k", 5),
        temperature=cfg.get_float("generation.temperature", 0.7),
        top_p=cfg.get_float("generation.top_p", 0.95),
        strategy=cfg.get("generation.strategy", "sequential"),
        context_size=cfg.get_int("generation.context_size", 0),
        model=cfg.get("generation.model", required=True),
        endpoint=cfg.get("generation.endpoint", required=True),
        max_retries=cfg.get_int("generation.max_retries", 0),
        request_timeout=cfg.get_float("generation.request_timeout", 30.0),
        max_in_flight=cfg.get_int("generation.max_in_flight", 4),
        fail_streak_limit=cfg.get_int("generation.fail_streak_limit", 5),
        seed=args.seed,
    )
    cfg.reject_unknown()

    corpus = data.load_corpus(corpus_path, corpus_format)
    client = generation.OpenAIChatClient(gen_cfg.endpoint, api_key=os.environ.get(API_KEY_ENV))
    try:
        stats = generation.run_generation(
            corpus, gen_cfg, client, out, failure_path=failures, limit=args.limit
        )
    except generation.GenerationAborted as e:
        log.error("generation aborted: %s", e)
        return EXIT_SERVICE
    log.info(
        "generate: complete=%d missing=%d failed=%d skipped=%d new=%d",
        stats.complete, stats.missing, stats.failed, stats.skipped, stats.new,
    )
    print(
        f"complete={stats.complete} missing={stats.missing} "
        f"failed={stats.failed} new={stats.new}"
    )
    return EXIT_OK if stats.failed == 0 else EXIT_SERVICE


def _group_label(generator: str, strategy: str) -> str:
    safe = re.sub(r"[^A-Za-z0-9._-]+", "-", f"{generator}_{strategy}")
    return safe.strip("-") or "unnamed"


def cmd_score(cfg: Config, args) -> int:
    corpus_path = cfg.require_readable("corpus")
    corpus_format = cfg.get("corpus_format", "jsonl")
    sets_path = cfg.require_readable("paraphrases")
    out = _out_path(cfg, args)
    summary_dir = cfg.get("summary_dir")
    ps_cfg = ParaScoreConfig(
        gamma=cfg.get_float("parascore.gamma", DEFAULT_GAMMA),
        omega=cfg.get_float("parascore.omega", DEFAULT_OMEGA),
        threshold=cfg.get_float("parascore.threshold", DEFAULT_THRESHOLD),
    )
    bin_width = cfg.get_float("parascore.bin_width", 0.02)
    provider = _build_provider(cfg)
    cfg.reject_unknown()

    corpus = {u.id: u for u in data.load_corpus(corpus_path, corpus_format)}
    sets = _limit(data.load_paraphrases(sets_path), args)

    scored, skipped = [], 0
    for ps in sets:
        if ps.status != "complete" or not ps.variants:
            scored.append(ps)
            skipped += 1
            continue
        utt = corpus.get(ps.utterance_id)
        if utt is None:
            raise data.DatasetError(
                f"paraphrase set references unknown utterance {ps.utterance_id!r}", sets_path
            )
        scored.append(score_set(utt, ps, ps_cfg, provider))
    data.save_paraphrases(scored, out)

    if summary_dir:
        Path(summary_dir).mkdir(parents=True, exist_ok=True)
        groups = defaultdict(list)
        for ps in scored:
            if ps.scores:
                groups[(ps.generator, ps.strategy)].extend(s.parascore for s in ps.scores)
        for (gen_name, strategy), values in sorted(groups.items()):
            summary = summarize(values, bin_width=bin_width)
            csv_path = Path(summary_dir) / f"parascore_{_group_label(gen_name, strategy)}.csv"
            write_distribution_csv(summary, csv_path)
            log.info("wrote %s (%d scores)", csv_path, summary.count)

    log.info("score: scored=%d skipped=%d", len(scored) - skipped, skipped)
    print(f"scored={len(scored) - skipped} skipped={skipped}")
    return EXIT_OK


def cmd_eval(cfg: Config, args) -> int:
    instances_path = cfg.require_readable("instances")
    out = _out_path(cfg, args)
    selections_out = cfg.get("selections_out")
    mode = cfg.get("mode", "select_best")
    cfg.reject_unknown()
    if mode not in ("select_best", "multi_ref"):
        raise ConfigError(f"mode must be 'select_best' or 'multi_ref', got {mode!r}")

    instances = _limit(data.load_instances(instances_path), args)
    if not instances:
        raise data.DatasetError("no instances to evaluate", instances_path)

    baseline = bleu_para.eval_no_paraphrases(instances)
    with_para = bleu_para.bleu_para_corpus(instances, mode=mode)

    with open(out, "w", encoding="utf-8") as f:
        json.dump(
            {"reports": [baseline.to_record(), with_para.to_record()]},
            f,
            indent=2,
        )
        f.write("\n")
    if selections_out:
        with open(selections_out, "w", encoding="utf-8") as f:
            for sel in with_para.selections:
                f.write(
                    json.dumps(
                        {
                            "instance_id": sel.instance_id,
                            "chosen_index": sel.chosen_index,
                            "chosen_score": sel.chosen_score,
                            "canonical_score": sel.per_reference_scores[0],
                        }
                    )
                    + "\n"
                )
    print(bleu_para.format_report_table([baseline, with_para]))
    return EXIT_OK


def cmd_correlate(cfg: Config, args) -> int:
    ratings_path = cfg.require_readable("ratings")
    selections_path = cfg.require_readable("selections")
    out = _out_path(cfg, args, required=False)
    low = cfg.get_float("extremes.low", correlation.EXTREMES_LOW)
    high = cfg.get_float("extremes.high", correlation.EXTREMES_HIGH)
    cfg.reject_unknown()

    ratings = _limit(data.load_ratings(ratings_path), args)
    canonical_scores: dict[str, float] = {}
    chosen_scores: dict[str, float] = {}
    with open(selections_path, encoding="utf-8") as f:
        for line in f:
            if not line.strip():
                continue
            record = json.loads(line)
            canonical_scores[record["instance_id"]] = float(record["canonical_score"])
            chosen_scores[record["instance_id"]] = float(record["chosen_score"])

    missing = [r.instance_id for r in ratings if r.instance_id not in canonical_scores]
    if missing:
        log.error("ratings without scores: %s", ", ".join(missing))
        return EXIT_IO

    rated_ids = [r.instance_id for r in ratings]
    extreme_ids = correlation.extremes_subset(
        [(i, canonical_scores[i]) for i in rated_ids], low=low, high=high
    )

    rows = []
    for name, scores in (("bleu", canonical_scores), ("bleu_para", chosen_scores)):
        report = correlation.correlate(ratings, scores, metric_name=name)
        row = {
            "metric": name,
            "pearson_r": round(report.pearson_r, 6),
            "spearman_rho": round(report.spearman_rho, 6),
            "n": report.n,
        }
        try:
            extremes = correlation.correlate(ratings, scores, metric_name=name, subset=extreme_ids)
            row["spearman_rho_extremes"] = round(extremes.spearman_rho, 6)
            row["n_extremes"] = extremes.n
        except ValueError:
            row["spearman_rho_extremes"] = None
            row["n_extremes"] = len(extreme_ids)
        rows.append(row)

    header = f"{'metric':<12} {'Pearson r':>10} {'Spearman rho':>13} {'rho (extremes)':>15}"
    lines = [header]
    for row in rows:
        extremes_cell = (
            f"{row['spearman_rho_extremes']:.3f}"
            if row["spearman_rho_extremes"] is not None
            else "n/a"
        )
        lines.append(
            f"{row['metric']:<12} {row['pearson_r']:>10.3f} "
            f"{row['spearman_rho']:>13.3f} {extremes_cell:>15}"
        )
    print("\n".join(lines))
    if out:
        with open(out, "w", encoding="utf-8") as f:
            json.dump({"rows": rows, "extremes_low": low, "extremes_high": high}, f, indent=2)
            f.write("\n")
    return EXIT_OK


def cmd_build_trainset(cfg: Config, args) -> int:
    corpus_path = cfg.require_readable("corpus")
    corpus_format = cfg.get("corpus_format", "jsonl")
    sets_path = cfg.require_readable("paraphrases")
    out = _out_path(cfg, args)
    threshold = cfg.get_float("threshold", DEFAULT_THRESHOLD)
    cfg.reject_unknown()

    corpus = _limit(data.load_corpus(corpus_path, corpus_format), args)
    sets = data.load_paraphrases(sets_path)
    records = data.build_trainset(corpus, sets, threshold)
    data.save_trainset(records, out)
    multi = sum(1 for r in records if len(r.targets) > 1)
    log.info("build-trainset: %d records (%d with paraphrase targets)", len(records), multi)
    print(f"records={len(records)} multi_target={multi}")
    return EXIT_OK


COMMANDS = {
    "generate": cmd_generate,
    "score": cmd_score,
    "eval": cmd_eval,
    "correlate": cmd_correlate,
    "build-trainset": cmd_build_trainset,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="paraeval",
        description="Paraphrase-aware evaluation and data enrichment for translation corpora",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="key = value config file")
        p.add_argument("--limit", type=int, default=None, help="process at most N records")
        p.add_argument("--seed", type=int, default=None, help="seed forwarded to sampling")
        p.add_argument("--out", default=None, help="override the configured output path")
        p.add_argument("--log-level", default="INFO")
    return parser


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        stream=sys.stderr,
        level=getattr(logging, args.log_level.upper(), logging.INFO),
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        cfg = Config(load_config(args.config))
        return COMMANDS[args.command](cfg, args)
    except ConfigError as e:
        log.error("%s", e)
        return EXIT_USAGE
    except (data.DatasetError, FileNotFoundError, OSError, json.JSONDecodeError) as e:
        log.error("%s", e)
        return EXIT_IO
    except (semantic.ProviderError, generation.ChatTransportError) as e:
        log.error("%s", e)
        return EXIT_SERVICE
    except (ValueError, KeyError, RuntimeError) as e:
        log.error("%s", e)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
