"""Pipeline configuration: flat ``key = value`` files plus validation.

Blank lines and lines starting with ``#`` are ignored.  Unknown keys
are rejected so typos fail loudly.  Exactly one embedding source (file
or service URL) must be configured.
"""

from __future__ import annotations

from dataclasses import dataclass, fields
from pathlib import Path

from .errors import ConfigError


@dataclass
class PipelineConfig:
    """Every knob of the batch pipeline, with documented defaults."""

    texts: str = ""
    text_format: str = "lines"  # lines | csv
    text_column: str = "text"
    stopwords: str = "es+en"  # builtin name(s), a file path, or "none"
    min_token_len: int = 1

    embeddings: str | None = None  # TFEMB1 file
    embedding_url: str | None = None  # HTTP service
    embed_batch_size: int = 32
    embed_timeout: float = 30.0
    embed_retries: int = 2

    umap_neighbors: int = 15
    umap_components: int = 2
    umap_metric: str = "cosine"  # cosine | euclidean
    umap_min_dist: float = 0.1
    umap_spread: float = 1.0
    umap_epochs: int = 200
    umap_neg_samples: int = 5
    umap_learning_rate: float = 1.0
    umap_init: str = "spectral"  # spectral | random
    umap_seed: int = 42

    kmeans_k: int | None = None  # fixed k; unset -> elbow scan
    kmeans_k_min: int = 2
    kmeans_k_max: int = 15
    kmeans_restarts: int = 100
    kmeans_max_iter: int = 300
    kmeans_tol: float = 1e-6
    kmeans_seed: int = 42

    top_n: int = 10
    tfidf_tf: str = "probability"  # probability | raw
    tfidf_idf: str = "smoothed"  # smoothed | plain
    coherence_epsilon: float = 1e-12

    out_dir: str = "topicforge_out"
    threads: int = 1


_INT_KEYS = {
    "min_token_len", "embed_batch_size", "embed_retries", "umap_neighbors",
    "umap_components", "umap_epochs", "umap_neg_samples", "umap_seed",
    "kmeans_k", "kmeans_k_min", "kmeans_k_max", "kmeans_restarts",
    "kmeans_max_iter", "kmeans_seed", "top_n", "threads",
}
_FLOAT_KEYS = {
    "embed_timeout", "umap_min_dist", "umap_spread", "umap_learning_rate",
    "kmeans_tol", "coherence_epsilon",
}
_OPTIONAL_KEYS = {"embeddings", "embedding_url", "kmeans_k"}
_KNOWN_KEYS = {f.name for f in fields(PipelineConfig)}


def parse_config_text(text: str, source: str = "<config>") -> PipelineConfig:
    """Parse flat ``key = value`` lines into a defaulted, validated config."""
    values: dict[str, object] = {}
    for line_no, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigError(f"{source}:{line_no}: expected 'key = value'")
        key, _, raw = stripped.partition("=")
        key = key.strip()
        raw = raw.strip()
        if key not in _KNOWN_KEYS:
            raise ConfigError(f"{source}:{line_no}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"{source}:{line_no}: duplicate key {key!r}")
        values[key] = _coerce(key, raw, source, line_no)
    config = PipelineConfig(**values)
    validate(config)
    return config


def _coerce(key: str, raw: str, source: str, line_no: int):
    if key in _OPTIONAL_KEYS and raw.lower() in ("none", ""):
        return None
    try:
        if key in _INT_KEYS:
            return int(raw)
        if key in _FLOAT_KEYS:
            return float(raw)
    except ValueError as exc:
        raise ConfigError(f"{source}:{line_no}: bad value for {key}: {raw!r}") from exc
    return raw


def validate_config(path: str | Path) -> PipelineConfig:
    """Load, default, and invariant-check a config file."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    return parse_config_text(path.read_text(encoding="utf-8"), source=str(path))


def validate(config: PipelineConfig) -> None:
    """Raise ConfigError on any invariant violation."""
    def bad(message: str):
        raise ConfigError(message)

    if not config.texts:
        bad("texts path is required")
    if config.text_format not in ("lines", "csv"):
        bad(f"text_format must be 'lines' or 'csv', got {config.text_format!r}")
    sources = [s for s in (config.embeddings, config.embedding_url) if s]
    if len(sources) != 1:
        bad("exactly one of embeddings (file) or embedding_url (service) is required")
    if config.embed_batch_size < 1:
        bad("embed_batch_size must be >= 1")
    if config.embed_retries < 0:
        bad("embed_retries must be >= 0")
    if config.min_token_len < 1:
        bad("min_token_len must be >= 1")
    if config.umap_neighbors < 1:
        bad("umap_neighbors must be >= 1")
    if config.umap_components < 2:
        bad("umap_components must be >= 2")
    if config.umap_metric not in ("cosine", "euclidean"):
        bad(f"umap_metric must be 'cosine' or 'euclidean', got {config.umap_metric!r}")
    if config.umap_min_dist < 0:
        bad("umap_min_dist must be >= 0")
    if config.umap_spread <= 0:
        bad("umap_spread must be > 0")
    if config.umap_min_dist >= 3 * config.umap_spread:
        bad("umap_min_dist must be < 3 * umap_spread")
    if config.umap_epochs < 1:
        bad("umap_epochs must be >= 1")
    if config.umap_neg_samples < 1:
        bad("umap_neg_samples must be >= 1")
    if config.umap_learning_rate <= 0:
        bad("umap_learning_rate must be > 0")
    if config.umap_init not in ("spectral", "random"):
        bad(f"umap_init must be 'spectral' or 'random', got {config.umap_init!r}")
    if config.kmeans_k is not None and config.kmeans_k < 1:
        bad("kmeans_k must be >= 1")
    if config.kmeans_k is None and config.kmeans_k_min >= config.kmeans_k_max:
        bad("kmeans_k_min must be < kmeans_k_max")
    if config.kmeans_restarts < 1:
        bad("kmeans_restarts must be >= 1")
    if config.kmeans_max_iter < 1:
        bad("kmeans_max_iter must be >= 1")
    if config.kmeans_tol <= 0:
        bad("kmeans_tol must be > 0")
    if config.top_n < 1:
        bad("top_n must be >= 1")
    if config.tfidf_tf not in ("probability", "raw"):
        bad(f"tfidf_tf must be 'probability' or 'raw', got {config.tfidf_tf!r}")
    if config.tfidf_idf not in ("smoothed", "plain"):
        bad(f"tfidf_idf must be 'smoothed' or 'plain', got {config.tfidf_idf!r}")
    if config.coherence_epsilon <= 0:
        bad("coherence_epsilon must be > 0")
    if config.threads < 1:
        bad("threads must be >= 1")
