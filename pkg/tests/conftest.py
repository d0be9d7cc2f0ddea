"""Shared fixtures: a small planted-topic corpus with synthetic embeddings."""

import numpy as np
import pytest

from topicforge import save_embeddings


@pytest.fixture
def planted_workspace(tmp_path):
    """Four planted topics: texts.txt, emb.tfemb, and a config file.

    Returns (config_path, tmp_path, truth_labels, vocabularies).
    """
    rng = np.random.default_rng(77)
    n_topics, docs_per, n_terms = 4, 12, 8
    vocabs = [[f"top{t}word{i}" for i in range(n_terms)] for t in range(n_topics)]
    texts, truth = [], []
    for t in range(n_topics):
        for _ in range(docs_per):
            words = rng.choice(vocabs[t], size=int(rng.integers(6, 12)))
            texts.append(" ".join(words))
            truth.append(t)
    (tmp_path / "texts.txt").write_text("\n".join(texts) + "\n", encoding="utf-8")

    means = rng.normal(size=(n_topics, 16)) * 6.0
    emb = np.vstack([means[t] + 0.8 * rng.normal(size=16) for t in truth])
    save_embeddings(emb.astype(np.float32), tmp_path / "emb.tfemb")

    config_path = tmp_path / "run.conf"
    config_path.write_text(
        "\n".join(
            [
                "# planted-topic fixture",
                f"texts = {tmp_path / 'texts.txt'}",
                "stopwords = none",
                f"embeddings = {tmp_path / 'emb.tfemb'}",
                "umap_neighbors = 8",
                "umap_epochs = 60",
                "kmeans_k = 4",
                "kmeans_restarts = 5",
                "top_n = 5",
                f"out_dir = {tmp_path / 'out'}",
            ]
        )
        + "\n",
        encoding="utf-8",
    )
    return config_path, tmp_path, truth, vocabs
