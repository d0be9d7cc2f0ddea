"""Batch pipeline: corpus -> embeddings -> reduction -> clustering ->
topic terms -> metrics -> reports.

Stages run strictly in that order.  Every run produces a manifest
recording the config snapshot, per-stage timings, and the files
written; a failing stage removes partial outputs and raises an error
tagged with the stage name.
"""

from __future__ import annotations

import dataclasses
import json
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .clustering import ClusterModel, ElbowCurve, best_of_restarts, elbow_select
from .config import PipelineConfig
from .corpus import Corpus, Vocabulary, build_corpus, build_vocabulary, read_texts, resolve_stopwords
from .embeddings import fetch_embeddings, load_embeddings, save_embeddings
from .errors import DataError, PipelineError, TopicforgeError
from .metrics import MetricsReport, score_topics
from .reduction import reduce_embeddings
from .svg import hbar_chart, line_chart, scatter_chart
from .topics import TopicModel, cluster_tfidf, top_terms

logger = logging.getLogger(__name__)


@dataclass
class RunManifest:
    """What a run did: config, stage timings (in order), outputs, version."""

    config: dict
    timings: dict[str, float] = field(default_factory=dict)
    outputs: list[str] = field(default_factory=list)
    version: str = __version__


class _Run:
    """Tracks timings and written files so failures can clean up."""

    def __init__(self, config: PipelineConfig):
        self.config = config
        self.out_dir = Path(config.out_dir)
        self.manifest = RunManifest(config=dataclasses.asdict(config))
        self.written: list[Path] = []

    def stage(self, name: str, func, *args, **kwargs):
        start = time.perf_counter()
        try:
            result = func(*args, **kwargs)
        except Exception as exc:
            for path in self.written:
                path.unlink(missing_ok=True)
            exit_code = exc.exit_code if isinstance(exc, TopicforgeError) else 2
            raise PipelineError(name, str(exc), exit_code=exit_code) from exc
        self.manifest.timings[name] = time.perf_counter() - start
        return result

    def write_text(self, filename: str, text: str) -> Path:
        path = self.out_dir / filename
        path.write_text(text, encoding="utf-8")
        self.written.append(path)
        self.manifest.outputs.append(str(path))
        return path

    def write_binary(self, filename: str, writer) -> Path:
        path = self.out_dir / filename
        writer(path)
        self.written.append(path)
        self.manifest.outputs.append(str(path))
        return path


def load_corpus_stage(config: PipelineConfig) -> tuple[Corpus, Vocabulary]:
    texts = read_texts(config.texts, config.text_format, config.text_column)
    stopwords = resolve_stopwords(config.stopwords)
    corpus = build_corpus(texts, stopwords, min_token_len=config.min_token_len)
    return corpus, build_vocabulary(corpus)


def load_embeddings_stage(config: PipelineConfig, corpus: Corpus) -> np.ndarray:
    if config.embeddings:
        matrix = load_embeddings(config.embeddings)
    else:
        matrix = fetch_embeddings(
            config.embedding_url,
            corpus.raw_texts(),
            batch_size=config.embed_batch_size,
            timeout=config.embed_timeout,
            retries=config.embed_retries,
        )
    if matrix.shape[0] != len(corpus):
        raise DataError(
            f"embedding rows ({matrix.shape[0]}) do not match "
            f"document count ({len(corpus)})"
        )
    return matrix


def reduce_stage(config: PipelineConfig, matrix: np.ndarray) -> np.ndarray:
    return reduce_embeddings(
        matrix,
        n_neighbors=config.umap_neighbors,
        n_components=config.umap_components,
        metric=config.umap_metric,
        min_dist=config.umap_min_dist,
        spread=config.umap_spread,
        epochs=config.umap_epochs,
        neg_samples=config.umap_neg_samples,
        learning_rate=config.umap_learning_rate,
        init=config.umap_init,
        seed=config.umap_seed,
        threads=config.threads,
    )


def cluster_stage(
    config: PipelineConfig, layout: np.ndarray
) -> tuple[ClusterModel, ElbowCurve | None]:
    curve = None
    if config.kmeans_k is None:
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
        k = curve.selected_k
    else:
        k = config.kmeans_k
    model = best_of_restarts(
        layout,
        k,
        restarts=config.kmeans_restarts,
        seed=config.kmeans_seed,
        max_iter=config.kmeans_max_iter,
        tol=config.kmeans_tol,
        threads=config.threads,
    )
    return model, curve


def layout_csv(layout: np.ndarray) -> str:
    lines = []
    if layout.shape[1] == 2:
        lines.append("doc_id,x,y")
    else:
        lines.append("doc_id," + ",".join(f"c{d}" for d in range(layout.shape[1])))
    for i, row in enumerate(layout):
        lines.append(f"{i}," + ",".join(repr(float(v)) for v in row))
    return "\n".join(lines) + "\n"


def assignments_csv(assignments: np.ndarray) -> str:
    lines = ["doc_id,cluster"]
    lines.extend(f"{i},{int(c)}" for i, c in enumerate(assignments))
    return "\n".join(lines) + "\n"


def elbow_csv(curve: ElbowCurve) -> str:
    lines = ["k,wcss"]
    lines.extend(
        f"{k},{repr(float(w))}" for k, w in zip(curve.k_values, curve.wcss_values)
    )
    return "\n".join(lines) + "\n"


def topics_json(model: TopicModel) -> str:
    payload = [
        {
            "cluster": topic.cluster_id,
            "size": topic.size,
            "terms": [
                {"term": term, "score": score}
                for term, score in topic.terms[: model.top_n]
            ],
        }
        for topic in model.topics
    ]
    return json.dumps(payload, ensure_ascii=False, indent=2) + "\n"


def metrics_json(report: MetricsReport) -> str:
    payload = {
        "global_diversity": report.global_diversity,
        "topics": [
            {"cluster": cid, "diversity": diversity, "coherence": coherence}
            for cid, diversity, coherence in report.per_topic
        ],
    }
    return json.dumps(payload, ensure_ascii=False, indent=2) + "\n"


def metrics_table(report: MetricsReport, model: TopicModel) -> str:
    """Plain-text metrics table, one row per topic."""
    sizes = {topic.cluster_id: topic.size for topic in model.topics}
    lines = [
        f"{'Cluster':>7}  {'Size':>6}  {'Topic Diversity':>15}  {'Topic Coherence':>15}"
    ]
    for cid, diversity, coherence in report.per_topic:
        coh = f"{coherence:.4f}" if coherence is not None else "n/a"
        lines.append(
            f"{cid:>7}  {sizes.get(cid, 0):>6}  {diversity:>15.4f}  {coh:>15}"
        )
    lines.append("")
    lines.append(f"Global diversity: {report.global_diversity:.4f}")
    return "\n".join(lines) + "\n"


def run_pipeline(config: PipelineConfig) -> RunManifest:
    """Execute every stage and write all reports under ``config.out_dir``.

    Single-threaded runs with identical config and seeds write
    byte-identical topics.json and metrics.json.
    """
    run = _Run(config)
    run.out_dir.mkdir(parents=True, exist_ok=True)

    corpus, vocab = run.stage("corpus", load_corpus_stage, config)
    matrix = run.stage("embeddings", load_embeddings_stage, config, corpus)
    layout = run.stage("reduce", reduce_stage, config, matrix)
    model, curve = run.stage("cluster", cluster_stage, config, layout)
    topic_model = run.stage(
        "topics",
        cluster_tfidf,
        corpus,
        model.assignments,
        vocab,
        top_n=config.top_n,
        tf_mode=config.tfidf_tf,
        idf_mode=config.tfidf_idf,
    )
    report = run.stage(
        "metrics",
        score_topics,
        topic_model,
        corpus,
        top_n=config.top_n,
        epsilon=config.coherence_epsilon,
    )

    def render() -> None:
        run.write_text("layout.csv", layout_csv(layout))
        run.write_binary(
            "layout.tfemb", lambda p: save_embeddings(layout.astype(np.float32), p)
        )
        run.write_text("assignments.csv", assignments_csv(model.assignments))
        if curve is not None:
            run.write_text("elbow.csv", elbow_csv(curve))
            run.write_text(
                "elbow.svg",
                line_chart(
                    curve.k_values,
                    curve.wcss_values,
                    "WCSS by cluster count",
                    "k",
                    "WCSS",
                    mark_x=curve.selected_k,
                ),
            )
        run.write_text(
            "scatter.svg",
            scatter_chart(
                layout[:, :2], model.assignments, "Reduced embeddings by cluster"
            ),
        )
        run.write_text("topics.json", topics_json(topic_model))
        for cid, terms in sorted(top_terms(topic_model, config.top_n).items()):
            run.write_text(
                f"topic_{cid}.svg", hbar_chart(terms, f"Topic {cid} top terms")
            )
        run.write_text("metrics.json", metrics_json(report))
        run.write_text("metrics.txt", metrics_table(report, topic_model))

    run.stage("render", render)

    manifest_path = run.out_dir / "manifest.json"
    manifest_path.write_text(
        json.dumps(dataclasses.asdict(run.manifest), ensure_ascii=False, indent=2) + "\n",
        encoding="utf-8",
    )
    logger.info(
        "run complete: %d documents, %d topics, outputs in %s",
        len(corpus),
        len(topic_model.topics),
        run.out_dir,
    )
    return run.manifest
