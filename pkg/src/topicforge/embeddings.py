"""Per-document embedding I/O.

The pipeline never runs transformer inference itself; it either loads a
binary TFEMB1 file produced offline or calls an HTTP embedding service.

TFEMB1 layout (little-endian, bit-exact):
  bytes 0-7   ASCII magic ``TFEMB1\\0\\0``
  bytes 8-11  row count, unsigned 32-bit
  bytes 12-15 column count, unsigned 32-bit
  then rows x cols IEEE-754 32-bit floats, row-major
"""

from __future__ import annotations

import struct
import time
import warnings
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np
import requests

from .errors import (
    EmbeddingCorruptionError,
    EmbeddingFormatError,
    EmptyInputError,
    ServiceError,
    ValidationError,
)

MAGIC = b"TFEMB1\x00\x00"
_HEADER = struct.Struct("<II")


def validate_matrix(matrix: np.ndarray, name: str = "embedding matrix") -> np.ndarray:
    """Check the embedding-matrix invariants, returning a float32 C-order view."""
    arr = np.asarray(matrix)
    if arr.ndim != 2:
        raise ValidationError(f"{name} must be 2-D, got shape {arr.shape}")
    if arr.shape[0] < 1:
        raise EmptyInputError(f"{name} has no rows")
    if arr.shape[1] < 1:
        raise ValidationError(f"{name} has no columns")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} contains non-finite values")
    return np.ascontiguousarray(arr, dtype=np.float32)


def save_embeddings(matrix: np.ndarray, path: str | Path) -> None:
    """Write a TFEMB1 file; ``load_embeddings`` round-trips it bit-exactly."""
    arr = validate_matrix(matrix)
    rows, cols = arr.shape
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(_HEADER.pack(rows, cols))
        fh.write(arr.astype("<f4", copy=False).tobytes())


def load_embeddings(path: str | Path) -> np.ndarray:
    """Load a TFEMB1 file into an n x d float32 matrix."""
    raw = Path(path).read_bytes()
    if len(raw) < len(MAGIC) or raw[: len(MAGIC)] != MAGIC:
        raise EmbeddingFormatError(f"{path}: not a TFEMB1 file (bad magic)")
    if len(raw) < len(MAGIC) + _HEADER.size:
        raise EmbeddingCorruptionError(f"{path}: truncated header")
    rows, cols = _HEADER.unpack_from(raw, len(MAGIC))
    if rows == 0:
        raise EmptyInputError(f"{path}: embedding file declares zero rows")
    if cols == 0:
        raise ValidationError(f"{path}: embedding file declares zero columns")
    payload = raw[len(MAGIC) + _HEADER.size :]
    expected = rows * cols * 4
    if len(payload) != expected:
        raise EmbeddingCorruptionError(
            f"{path}: payload is {len(payload)} bytes, header requires {expected}"
        )
    arr = np.frombuffer(payload, dtype="<f4").reshape(rows, cols)
    arr = arr.astype(np.float32, copy=True)
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{path}: embedding file contains non-finite values")
    return arr


def load_embeddings_csv(path: str | Path) -> np.ndarray:
    """Load a small comma-separated fixture: one embedding row per line."""
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")  # empty file warns before we raise
            arr = np.loadtxt(path, delimiter=",", dtype=np.float64, ndmin=2)
    except ValueError as exc:
        raise ValidationError(f"{path}: malformed embedding CSV: {exc}") from exc
    if arr.size == 0:
        raise EmptyInputError(f"{path}: embedding CSV is empty")
    return validate_matrix(arr, name=f"{path}")


def fetch_embeddings(
    endpoint: str,
    texts: list[str],
    batch_size: int = 32,
    timeout: float = 30.0,
    retries: int = 2,
    retry_backoff: float = 0.1,
    max_concurrency: int = 1,
) -> np.ndarray:
    """Fetch embeddings over HTTP, one POST per batch.

    The service takes ``{"texts": [...]}`` and returns
    ``{"embeddings": [[...], ...]}``.  Row i of the result is the
    embedding of ``texts[i]`` regardless of batching or concurrency.
    ``retries`` counts additional attempts per batch after the first.
    """
    if batch_size < 1:
        raise ValueError("batch_size must be >= 1")
    if not texts:
        raise EmptyInputError("cannot fetch embeddings for an empty text list")

    batches = [texts[i : i + batch_size] for i in range(0, len(texts), batch_size)]

    def fetch_batch(batch: list[str]) -> np.ndarray:
        last_error: Exception | None = None
        for attempt in range(retries + 1):
            if attempt > 0:
                time.sleep(retry_backoff * attempt)
            try:
                response = requests.post(
                    endpoint, json={"texts": batch}, timeout=timeout
                )
                response.raise_for_status()
            except requests.RequestException as exc:
                last_error = exc
                continue
            body = response.json()
            vectors = body.get("embeddings")
            if vectors is None:
                raise ValidationError(
                    f"embedding service response has no 'embeddings' field"
                )
            if len(vectors) != len(batch):
                raise ValidationError(
                    f"embedding service returned {len(vectors)} rows "
                    f"for a batch of {len(batch)}"
                )
            try:
                arr = np.asarray(vectors, dtype=np.float32)
            except ValueError as exc:
                raise ValidationError(f"ragged embedding response: {exc}") from exc
            if arr.ndim != 2:
                raise ValidationError("embedding rows must all share one dimension")
            return arr
        raise ServiceError(
            f"embedding service failed after {retries + 1} attempts: {last_error}"
        )

    if max_concurrency > 1:
        with ThreadPoolExecutor(max_workers=max_concurrency) as pool:
            results = list(pool.map(fetch_batch, batches))
    else:
        results = [fetch_batch(batch) for batch in batches]

    dims = {arr.shape[1] for arr in results}
    if len(dims) > 1:
        raise ValidationError(
            f"embedding dimension differs across batches: {sorted(dims)}"
        )
    matrix = np.vstack(results)
    return validate_matrix(matrix, name="fetched embeddings")
