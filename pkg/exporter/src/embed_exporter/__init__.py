"""embed_exporter: offline text-to-TFEMB1 embedding exporter."""

__version__ = "0.1.0"

from .exporter import (
    DEFAULT_MODEL,
    ExportError,
    ExportJob,
    ExportSummary,
    export,
    load_encoder,
    read_texts,
)

__all__ = [
    "__version__",
    "DEFAULT_MODEL",
    "ExportError",
    "ExportJob",
    "ExportSummary",
    "export",
    "load_encoder",
    "read_texts",
]
