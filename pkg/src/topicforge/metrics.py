"""Topic quality metrics: Topic Diversity and NPMI Topic Coherence.

Diversity measures how little the topics' top-term lists overlap (1 =
fully distinct).  Coherence averages normalized pointwise mutual
information over top-term pairs, with whole documents as co-occurrence
windows; it lives in [-1, 1] where 1 means the terms always appear
together.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

from .corpus import Corpus
from .errors import DataError
from .topics import Topic, TopicModel

DEFAULT_EPSILON = 1e-12


@dataclass
class MetricsReport:
    """Per-topic (cluster_id, diversity, coherence) plus global diversity.

    Coherence is None for topics with fewer than two ranked terms.
    """

    per_topic: list[tuple[int, float, float | None]]
    global_diversity: float


def topic_diversity(
    model: TopicModel, top_n: int
) -> tuple[dict[int, float], float]:
    """Uniqueness of the topics' top-``top_n`` term lists.

    Global diversity is |union of all top lists| / (K * top_n).  The
    per-topic value is the fraction of that topic's top terms appearing
    in no other topic's top list.
    """
    if top_n < 1:
        raise ValueError("top_n must be >= 1")
    if not model.topics:
        raise ValueError("model has no topics")
    for topic in model.topics:
        if not topic.terms:
            raise ValueError(f"topic {topic.cluster_id} has no terms")

    top_lists = {
        topic.cluster_id: [term for term, _ in topic.terms[:top_n]]
        for topic in model.topics
    }
    union: set[str] = set()
    for terms in top_lists.values():
        union.update(terms)
    global_diversity = len(union) / (len(top_lists) * top_n)

    per_topic: dict[int, float] = {}
    for cid, terms in top_lists.items():
        others: set[str] = set()
        for other_cid, other_terms in top_lists.items():
            if other_cid != cid:
                others.update(other_terms)
        unique = sum(1 for t in terms if t not in others)
        per_topic[cid] = unique / len(terms)
    return per_topic, global_diversity


def _document_term_sets(corpus: Corpus) -> list[frozenset[str]]:
    return [frozenset(doc.tokens) for doc in corpus.documents]


def npmi(p_i: float, p_j: float, p_ij: float, epsilon: float) -> float:
    """Normalized PMI of one term pair, epsilon-smoothed and clamped.

    With p_ij = 0 the value tends to -1 as epsilon -> 0.  The degenerate
    corner p_ij = 1 (both terms in every document) is the perfect
    association limit and scores 1.
    """
    if p_ij >= 1.0:
        return 1.0
    q = p_ij + epsilon
    value = math.log(q / (p_i * p_j)) / (-math.log(q))
    return max(-1.0, min(1.0, value))


def topic_coherence_npmi(
    topic: Topic,
    corpus: Corpus,
    top_n: int = 10,
    epsilon: float = DEFAULT_EPSILON,
) -> float:
    """Mean NPMI over all unordered pairs of the topic's top terms.

    Probabilities are document frequencies over the scoring corpus;
    every top term must occur in at least one document.
    """
    if top_n < 2:
        raise ValueError("top_n must be >= 2")
    if not corpus.documents:
        raise ValueError("scoring corpus is empty")
    terms = [term for term, _ in topic.terms[:top_n]]
    if len(terms) < 2:
        raise ValueError(
            f"topic {topic.cluster_id} has {len(terms)} terms; need at least 2"
        )

    doc_sets = _document_term_sets(corpus)
    n_docs = len(doc_sets)
    doc_count = {term: sum(1 for s in doc_sets if term in s) for term in terms}
    missing = sorted(t for t, c in doc_count.items() if c == 0)
    if missing:
        raise DataError(
            f"top terms absent from the scoring corpus: {', '.join(missing)}"
        )

    scores = []
    for w_i, w_j in combinations(terms, 2):
        co = sum(1 for s in doc_sets if w_i in s and w_j in s)
        scores.append(
            npmi(doc_count[w_i] / n_docs, doc_count[w_j] / n_docs, co / n_docs, epsilon)
        )
    return sum(scores) / len(scores)


def score_topics(
    model: TopicModel,
    corpus: Corpus,
    top_n: int = 10,
    epsilon: float = DEFAULT_EPSILON,
) -> MetricsReport:
    """Diversity and coherence for every topic with at least one term.

    Topics with a single ranked term get coherence None (no pairs to
    score); topics with no terms at all are excluded entirely.
    """
    scorable = [t for t in model.topics if t.terms]
    if not scorable:
        raise ValueError("no topics with terms to score")
    trimmed = TopicModel(topics=scorable, top_n=model.top_n)
    per_topic_div, global_div = topic_diversity(trimmed, top_n)
    rows: list[tuple[int, float, float | None]] = []
    for topic in scorable:
        if len(topic.terms) >= 2:
            coherence = topic_coherence_npmi(topic, corpus, top_n, epsilon)
        else:
            coherence = None
        rows.append((topic.cluster_id, per_topic_div[topic.cluster_id], coherence))
    return MetricsReport(per_topic=rows, global_diversity=global_div)
