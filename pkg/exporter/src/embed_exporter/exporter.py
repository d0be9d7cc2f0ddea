"""Convert a text file into a TFEMB1 embedding file.

Runs batched inference with a pretrained multilingual sentence-encoder
and streams the vectors into the binary layout consumed by the topic
pipeline.  The TFEMB1 format is written directly from its byte-level
definition so this package shares no code with the consumer:

  bytes 0-7   ASCII magic ``TFEMB1\\0\\0``
  bytes 8-11  row count, little-endian unsigned 32-bit
  bytes 12-15 column count, little-endian unsigned 32-bit
  then rows x cols little-endian IEEE-754 32-bit floats, row-major
"""

from __future__ import annotations

import csv
import struct
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

MAGIC = b"TFEMB1\x00\x00"

DEFAULT_MODEL = "sentence-transformers/paraphrase-multilingual-mpnet-base-v2"


class ExportError(Exception):
    """Any failure while exporting: bad input, model trouble, write error."""


@dataclass
class ExportJob:
    """One export request."""

    input_path: str
    output_path: str
    model: str = DEFAULT_MODEL
    batch_size: int = 32
    text_format: str = "lines"  # lines | csv
    text_column: str = "text"


@dataclass
class ExportSummary:
    rows: int
    dim: int
    elapsed: float


def read_texts(path: str | Path, fmt: str = "lines", text_column: str = "text") -> list[str]:
    """Read input documents; matches the pipeline's corpus loader rules.

    ``lines`` keeps every line (including empty ones) so row numbers
    align; ``csv`` reads the configured column.
    """
    path = Path(path)
    if fmt == "lines":
        return path.read_text(encoding="utf-8").splitlines()
    if fmt == "csv":
        texts = []
        with path.open(encoding="utf-8", newline="") as fh:
            reader = csv.DictReader(fh)
            for row_no, row in enumerate(reader):
                if text_column not in row:
                    raise ExportError(
                        f"{path} row {row_no} has no column {text_column!r}"
                    )
                texts.append(row[text_column] or "")
        return texts
    raise ExportError(f"unknown text format {fmt!r}; expected 'lines' or 'csv'")


def load_encoder(model_id: str):
    """Load a sentence-transformers checkpoint.

    Kept separate so callers (and tests) can supply any object with an
    ``encode(texts) -> 2-D array`` method instead.
    """
    try:
        from sentence_transformers import SentenceTransformer
    except ImportError as exc:
        raise ExportError(
            "sentence-transformers is not installed; install the 'model' extra"
        ) from exc
    try:
        return SentenceTransformer(model_id)
    except Exception as exc:
        raise ExportError(f"could not load model {model_id!r}: {exc}") from exc


def export(job: ExportJob, encoder=None) -> ExportSummary:
    """Embed every input text and write a TFEMB1 file.

    Row i of the output is the embedding of text i under any batch
    size.  The header is written first (the row count is known up
    front) and batches are streamed behind it.
    """
    if job.batch_size < 1:
        raise ExportError("batch size must be >= 1")
    try:
        texts = read_texts(job.input_path, job.text_format, job.text_column)
    except OSError as exc:
        raise ExportError(f"could not read {job.input_path}: {exc}") from exc
    if not texts:
        raise ExportError(f"{job.input_path}: no input texts")

    if encoder is None:
        encoder = load_encoder(job.model)

    start = time.perf_counter()
    dim: int | None = None
    output = Path(job.output_path)
    try:
        with output.open("wb") as fh:
            header_at = fh.tell()
            fh.write(MAGIC)
            fh.write(struct.pack("<II", len(texts), 0))  # dim patched below
            for lo in range(0, len(texts), job.batch_size):
                batch = texts[lo : lo + job.batch_size]
                vectors = np.asarray(encoder.encode(batch), dtype=np.float32)
                if vectors.ndim != 2 or vectors.shape[0] != len(batch):
                    raise ExportError(
                        f"encoder returned shape {vectors.shape} "
                        f"for a batch of {len(batch)}"
                    )
                if not np.all(np.isfinite(vectors)):
                    raise ExportError("encoder produced non-finite values")
                if dim is None:
                    dim = vectors.shape[1]
                elif vectors.shape[1] != dim:
                    raise ExportError(
                        f"embedding dimension changed across batches: "
                        f"{dim} then {vectors.shape[1]}"
                    )
                fh.write(vectors.astype("<f4", copy=False).tobytes())
            fh.seek(header_at + len(MAGIC))
            fh.write(struct.pack("<II", len(texts), dim))
    except OSError as exc:
        raise ExportError(f"could not write {output}: {exc}") from exc
    return ExportSummary(rows=len(texts), dim=dim, elapsed=time.perf_counter() - start)
