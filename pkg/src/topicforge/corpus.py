"""Corpus loading and normalization.

Raw texts are normalized into bag-of-words token sequences: lowercase,
punctuation and special characters stripped, stopwords dropped.  Digits
and accents are kept.  The resulting corpus and vocabulary feed topic
extraction and coherence scoring.
"""

from __future__ import annotations

import csv
import unicodedata
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .errors import DataError, EmptyInputError

# Characters removed from texts before tokenization: every Unicode
# punctuation character plus a handful of symbol characters (currency
# and similar) that fall outside the punctuation categories.
_EXTRA_STRIPPED = frozenset("$#%&")

_strip_cache: dict[str, bool] = {}


def _is_stripped(ch: str) -> bool:
    flag = _strip_cache.get(ch)
    if flag is None:
        flag = ch in _EXTRA_STRIPPED or unicodedata.category(ch).startswith("P")
        _strip_cache[ch] = flag
    return flag


@dataclass(frozen=True)
class Document:
    """One input text with its normalized token sequence."""

    id: int
    raw_text: str
    tokens: tuple[str, ...]


@dataclass
class Corpus:
    """Document collection plus the stopword list used to build it."""

    documents: list[Document]
    stopword_list: frozenset[str] = frozenset()
    language_tags: list[str] | None = None

    def __len__(self) -> int:
        return len(self.documents)

    def token_lists(self) -> list[tuple[str, ...]]:
        return [doc.tokens for doc in self.documents]

    def raw_texts(self) -> list[str]:
        return [doc.raw_text for doc in self.documents]


@dataclass
class Vocabulary:
    """Bijective term/id map with per-term document frequencies."""

    term_to_id: dict[str, int]
    id_to_term: list[str]
    document_frequency: dict[str, int]

    def __len__(self) -> int:
        return len(self.id_to_term)

    def __contains__(self, term: str) -> bool:
        return term in self.term_to_id


def preprocess(
    raw_text: str,
    stopwords: frozenset[str] | set[str] = frozenset(),
    min_token_len: int = 1,
) -> list[str]:
    """Normalize one text into tokens.

    Lowercases, deletes punctuation/special characters, splits on
    whitespace and drops stopwords.  Token order is preserved.  Empty
    input yields an empty list.  Stopword entries must already be
    lowercase.
    """
    lowered = raw_text.lower()
    cleaned = "".join(ch for ch in lowered if not _is_stripped(ch))
    return [
        tok
        for tok in cleaned.split()
        if len(tok) >= min_token_len and tok not in stopwords
    ]


def build_corpus(
    texts: list[str],
    stopwords: frozenset[str] | set[str] = frozenset(),
    language_tags: list[str] | None = None,
    min_token_len: int = 1,
) -> Corpus:
    """Build a corpus with one document per input text, ids in order."""
    if not texts:
        raise EmptyInputError("cannot build a corpus from an empty text list")
    if language_tags is not None and len(language_tags) != len(texts):
        raise DataError(
            f"{len(language_tags)} language tags for {len(texts)} texts"
        )
    stopset = frozenset(stopwords)
    documents = [
        Document(id=i, raw_text=text, tokens=tuple(preprocess(text, stopset, min_token_len)))
        for i, text in enumerate(texts)
    ]
    return Corpus(documents=documents, stopword_list=stopset, language_tags=language_tags)


def build_vocabulary(corpus: Corpus) -> Vocabulary:
    """Assign term ids (first-appearance order) and count document frequencies.

    ``document_frequency[t]`` counts documents containing ``t`` at least
    once, not total occurrences.
    """
    if not corpus.documents:
        raise EmptyInputError("cannot build a vocabulary from an empty corpus")
    term_to_id: dict[str, int] = {}
    id_to_term: list[str] = []
    document_frequency: dict[str, int] = {}
    for doc in corpus.documents:
        for term in doc.tokens:
            if term not in term_to_id:
                term_to_id[term] = len(id_to_term)
                id_to_term.append(term)
        for term in set(doc.tokens):
            document_frequency[term] = document_frequency.get(term, 0) + 1
    return Vocabulary(term_to_id, id_to_term, document_frequency)


def load_stopwords(path: str | Path) -> frozenset[str]:
    """Read a stopword file: UTF-8, one term per line, ``#`` comments ignored."""
    words = set()
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        entry = line.strip()
        if not entry or entry.startswith("#"):
            continue
        words.add(entry)
    return frozenset(words)


_BUILTIN_LISTS = {"es": "stopwords_es.txt", "en": "stopwords_en.txt"}


def builtin_stopwords(name: str) -> frozenset[str]:
    """Return a bundled stopword list.

    ``name`` is ``"es"``, ``"en"``, a ``+``-joined combination such as
    ``"es+en"``, or ``"none"`` for the empty list.
    """
    if name == "none":
        return frozenset()
    words: set[str] = set()
    for part in name.split("+"):
        filename = _BUILTIN_LISTS.get(part.strip())
        if filename is None:
            raise DataError(
                f"unknown builtin stopword list {part!r}; expected one of "
                f"{sorted(_BUILTIN_LISTS)} or 'none'"
            )
        text = resources.files("topicforge.data").joinpath(filename).read_text("utf-8")
        for line in text.splitlines():
            entry = line.strip()
            if entry and not entry.startswith("#"):
                words.add(entry)
    return frozenset(words)


def resolve_stopwords(setting: str) -> frozenset[str]:
    """Resolve a stopword setting: builtin name, ``none``, or a file path."""
    if setting == "none" or all(p in _BUILTIN_LISTS for p in setting.split("+")):
        return builtin_stopwords(setting)
    return load_stopwords(setting)


def read_texts(
    path: str | Path,
    fmt: str = "lines",
    text_column: str = "text",
) -> list[str]:
    """Read raw documents from a UTF-8 file.

    ``lines`` format treats every line as one document (empty lines
    included, so line numbers align with embedding rows).  ``csv``
    reads the configured text column.
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
                    raise DataError(
                        f"CSV {path} row {row_no} has no column {text_column!r}"
                    )
                texts.append(row[text_column] or "")
        return texts
    raise DataError(f"unknown text format {fmt!r}; expected 'lines' or 'csv'")
