"""topicforge: topic modeling from document embeddings.

Embed offline (or via an HTTP service), reduce with a UMAP-style
nonlinear projection, cluster with k-means, rank topic terms with
class-level TF-IDF, and score topics with diversity and NPMI coherence.
"""

__version__ = "0.1.0"

from .clustering import (
    ClusterModel,
    ElbowCurve,
    best_of_restarts,
    elbow_select,
    kmeans_pp_init,
    lloyd,
)
from .config import PipelineConfig, validate_config
from .corpus import (
    Corpus,
    Document,
    Vocabulary,
    build_corpus,
    build_vocabulary,
    builtin_stopwords,
    load_stopwords,
    preprocess,
    read_texts,
)
from .embeddings import (
    fetch_embeddings,
    load_embeddings,
    load_embeddings_csv,
    save_embeddings,
)
from .errors import (
    ConfigError,
    DataError,
    EmbeddingCorruptionError,
    EmbeddingFormatError,
    EmptyInputError,
    NumericError,
    PipelineError,
    ServiceError,
    TopicforgeError,
    ValidationError,
)
from .metrics import MetricsReport, score_topics, topic_coherence_npmi, topic_diversity
from .reduction import (
    CurveParams,
    FuzzyGraph,
    KnnGraph,
    fit_curve_params,
    fuzzy_simplicial_set,
    initialize_layout,
    knn_graph,
    optimize_layout,
    reduce_embeddings,
    smooth_knn_calibrate,
)
from .topics import Topic, TopicModel, cluster_tfidf, top_terms

__all__ = [
    "__version__",
    "ClusterModel", "ElbowCurve", "best_of_restarts", "elbow_select",
    "kmeans_pp_init", "lloyd",
    "PipelineConfig", "validate_config",
    "Corpus", "Document", "Vocabulary", "build_corpus", "build_vocabulary",
    "builtin_stopwords", "load_stopwords", "preprocess", "read_texts",
    "fetch_embeddings", "load_embeddings", "load_embeddings_csv", "save_embeddings",
    "ConfigError", "DataError", "EmbeddingCorruptionError", "EmbeddingFormatError",
    "EmptyInputError", "NumericError", "PipelineError", "ServiceError",
    "TopicforgeError", "ValidationError",
    "MetricsReport", "score_topics", "topic_coherence_npmi", "topic_diversity",
    "CurveParams", "FuzzyGraph", "KnnGraph", "fit_curve_params",
    "fuzzy_simplicial_set", "initialize_layout", "knn_graph", "optimize_layout",
    "reduce_embeddings", "smooth_knn_calibrate",
    "Topic", "TopicModel", "cluster_tfidf", "top_terms",
]
