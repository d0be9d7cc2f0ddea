"""Command-line interface.

``topicforge run`` executes the whole pipeline from a config file;
``elbow``, ``reduce``, and ``score`` expose individual stages.  Exit
codes: 0 success, 1 config error, 2 data error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .clustering import elbow_select
from .config import PipelineConfig, validate, validate_config
from .embeddings import save_embeddings
from .errors import DataError, TopicforgeError
from .metrics import score_topics
from .pipeline import (
    elbow_csv,
    layout_csv,
    load_corpus_stage,
    load_embeddings_stage,
    metrics_json,
    metrics_table,
    reduce_stage,
    run_pipeline,
    topics_json,
)
from .svg import line_chart
from .topics import cluster_tfidf

logger = logging.getLogger(__name__)


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", required=True, help="pipeline config file")
    parser.add_argument("--out", help="output directory (overrides config)")
    parser.add_argument("--threads", type=int, help="worker threads (1 = deterministic)")


def _load_config(args: argparse.Namespace) -> PipelineConfig:
    config = validate_config(args.config)
    overrides = {}
    if getattr(args, "k", None) is not None:
        overrides["kmeans_k"] = args.k
    if args.out is not None:
        overrides["out_dir"] = args.out
    if args.threads is not None:
        overrides["threads"] = args.threads
    if overrides:
        config = dataclasses.replace(config, **overrides)
        validate(config)
    return config


def _cmd_run(args: argparse.Namespace) -> int:
    config = _load_config(args)
    manifest = run_pipeline(config)
    print(json.dumps({"out_dir": config.out_dir, "outputs": manifest.outputs}, indent=2))
    return 0


def _cmd_elbow(args: argparse.Namespace) -> int:
    config = _load_config(args)
    corpus, _ = load_corpus_stage(config)
    matrix = load_embeddings_stage(config, corpus)
    layout = reduce_stage(config, matrix)
    curve = elbow_select(
        layout,
        config.kmeans_k_min,
        config.kmeans_k_max,
        restarts=config.kmeans_restarts,
        seed=config.kmeans_seed,
        max_iter=config.kmeans_max_iter,
        tol=config.kmeans_tol,
        threads=config.threads,
    )
    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "elbow.csv").write_text(elbow_csv(curve), encoding="utf-8")
    (out_dir / "elbow.svg").write_text(
        line_chart(
            curve.k_values, curve.wcss_values, "WCSS by cluster count",
            "k", "WCSS", mark_x=curve.selected_k,
        ),
        encoding="utf-8",
    )
    print(f"selected_k = {curve.selected_k}")
    return 0


def _cmd_reduce(args: argparse.Namespace) -> int:
    config = _load_config(args)
    corpus, _ = load_corpus_stage(config)
    matrix = load_embeddings_stage(config, corpus)
    layout = reduce_stage(config, matrix)
    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "layout.csv").write_text(layout_csv(layout), encoding="utf-8")
    save_embeddings(layout.astype(np.float32), out_dir / "layout.tfemb")
    print(f"layout: {layout.shape[0]} x {layout.shape[1]} -> {out_dir / 'layout.csv'}")
    return 0


def _read_assignments(path: str | Path, n_docs: int) -> np.ndarray:
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or lines[0] != "doc_id,cluster":
        raise DataError(f"{path}: expected header 'doc_id,cluster'")
    assignments = np.full(n_docs, -1, dtype=int)
    for line in lines[1:]:
        doc_id, _, cluster = line.partition(",")
        try:
            assignments[int(doc_id)] = int(cluster)
        except (ValueError, IndexError) as exc:
            raise DataError(f"{path}: bad assignment row {line!r}") from exc
    if (assignments < 0).any():
        raise DataError(f"{path}: not every document has an assignment")
    return assignments


def _cmd_score(args: argparse.Namespace) -> int:
    config = _load_config(args)
    corpus, vocab = load_corpus_stage(config)
    assignments = _read_assignments(args.assignments, len(corpus))
    model = cluster_tfidf(
        corpus,
        assignments,
        vocab,
        top_n=config.top_n,
        tf_mode=config.tfidf_tf,
        idf_mode=config.tfidf_idf,
    )
    report = score_topics(model, corpus, top_n=config.top_n, epsilon=config.coherence_epsilon)
    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    (out_dir / "topics.json").write_text(topics_json(model), encoding="utf-8")
    (out_dir / "metrics.json").write_text(metrics_json(report), encoding="utf-8")
    (out_dir / "metrics.txt").write_text(metrics_table(report, model), encoding="utf-8")
    print(metrics_table(report, model), end="")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="topicforge",
        description="Topic modeling from document embeddings.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_parser = sub.add_parser("run", help="run the full pipeline")
    _add_common(run_parser)
    run_parser.add_argument("--k", type=int, help="fixed cluster count (skips elbow)")
    run_parser.set_defaults(func=_cmd_run)

    elbow_parser = sub.add_parser("elbow", help="scan k and report the elbow")
    _add_common(elbow_parser)
    elbow_parser.set_defaults(func=_cmd_elbow)

    reduce_parser = sub.add_parser("reduce", help="reduce embeddings to a 2-D layout")
    _add_common(reduce_parser)
    reduce_parser.set_defaults(func=_cmd_reduce)

    score_parser = sub.add_parser("score", help="extract and score topics for given assignments")
    _add_common(score_parser)
    score_parser.add_argument(
        "--assignments", required=True, help="assignments.csv from a previous run"
    )
    score_parser.set_defaults(func=_cmd_score)
    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except TopicforgeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
