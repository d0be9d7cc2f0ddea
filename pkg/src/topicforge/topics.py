"""Topic term extraction via class-level TF-IDF.

Each cluster's token lists are concatenated into one class-document;
terms are ranked by tf * idf where tf is the term's share of the
cluster's tokens and idf = ln(1 + K / df) with K the number of clusters
and df the number of clusters containing the term.
"""

from __future__ import annotations

import logging
import math
from collections import Counter
from dataclasses import dataclass

import numpy as np

from .corpus import Corpus, Vocabulary

logger = logging.getLogger(__name__)


@dataclass
class Topic:
    """Ranked (term, score) list for one cluster."""

    cluster_id: int
    terms: list[tuple[str, float]]  # score descending, ties lexicographic
    size: int  # documents in the cluster


@dataclass
class TopicModel:
    topics: list[Topic]
    top_n: int = 10


def cluster_tfidf(
    corpus: Corpus,
    assignments,
    vocab: Vocabulary | None = None,
    top_n: int = 10,
    tf_mode: str = "probability",
    idf_mode: str = "smoothed",
) -> TopicModel:
    """Score every term of every cluster with class-level TF-IDF.

    ``tf_mode`` is ``probability`` (count / cluster token total) or
    ``raw`` (plain count); ``idf_mode`` is ``smoothed`` (ln(1 + K/df))
    or ``plain`` (ln(K/df)).  When a vocabulary is given, tokens outside
    it are ignored.  A cluster whose documents have no tokens produces
    an empty topic with a warning.
    """
    assignments = np.asarray(assignments)
    if assignments.shape != (len(corpus.documents),):
        raise ValueError(
            f"assignments shape {assignments.shape} does not cover "
            f"{len(corpus.documents)} documents"
        )
    if tf_mode not in ("probability", "raw"):
        raise ValueError(f"unknown tf_mode {tf_mode!r}")
    if idf_mode not in ("smoothed", "plain"):
        raise ValueError(f"unknown idf_mode {idf_mode!r}")

    cluster_ids = sorted(int(c) for c in np.unique(assignments))
    n_clusters = len(cluster_ids)

    counts: dict[int, Counter] = {}
    sizes: dict[int, int] = {}
    for cid in cluster_ids:
        member_docs = [
            corpus.documents[i] for i in np.flatnonzero(assignments == cid)
        ]
        sizes[cid] = len(member_docs)
        counter: Counter = Counter()
        for doc in member_docs:
            tokens = doc.tokens
            if vocab is not None:
                tokens = [t for t in tokens if t in vocab]
            counter.update(tokens)
        counts[cid] = counter

    cluster_df: Counter = Counter()
    for counter in counts.values():
        cluster_df.update(counter.keys())

    topics = []
    for cid in cluster_ids:
        counter = counts[cid]
        total = sum(counter.values())
        if total == 0:
            logger.warning("cluster %d has no tokens; emitting an empty topic", cid)
            topics.append(Topic(cluster_id=cid, terms=[], size=sizes[cid]))
            continue
        scored = []
        for term, count in counter.items():
            tf = count / total if tf_mode == "probability" else float(count)
            ratio = n_clusters / cluster_df[term]
            idf = math.log(1.0 + ratio) if idf_mode == "smoothed" else math.log(ratio)
            scored.append((term, tf * idf))
        scored.sort(key=lambda pair: (-pair[1], pair[0]))
        topics.append(Topic(cluster_id=cid, terms=scored, size=sizes[cid]))
    return TopicModel(topics=topics, top_n=top_n)


def top_terms(model: TopicModel, n: int) -> dict[int, list[tuple[str, float]]]:
    """First min(n, available) ranked terms per topic, keyed by cluster id."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return {topic.cluster_id: topic.terms[:n] for topic in model.topics}
