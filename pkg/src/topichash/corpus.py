"""Corpus ingestion: documents, normalization and vocabulary construction.

The primary input path is pre-lemmatized JSONL (one document per line with
``id``, ``lang``, ``lemmas`` and optional ``codes`` keys).  A rule-based
:func:`normalize` fallback is provided for raw text, but it performs no
POS filtering or true lemmatization.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .errors import DataError, FormatError


@dataclass(frozen=True)
class Document:
    """One document: identifier, language, lemma sequence, optional codes."""

    id: str
    lang: str
    lemmas: tuple[str, ...]
    codes: frozenset[str] = field(default_factory=frozenset)

    def __post_init__(self):
        if not self.id:
            raise DataError("document id must be non-empty")
        for lemma in self.lemmas:
            if not lemma or any(ch.isspace() for ch in lemma):
                raise DataError(
                    f"document {self.id!r}: lemma {lemma!r} is empty or contains whitespace"
                )


class Vocabulary:
    """Ordered set of unique lemmas with lemma -> integer id lookup.

    Term order is the identity of the vocabulary: ``index`` is the exact
    inverse of ``terms``.
    """

    __slots__ = ("terms", "index")

    def __init__(self, terms: Iterable[str]):
        self.terms: tuple[str, ...] = tuple(terms)
        self.index: dict[str, int] = {t: i for i, t in enumerate(self.terms)}
        if len(self.index) != len(self.terms):
            raise DataError("vocabulary contains duplicate terms")

    @property
    def V(self) -> int:
        return len(self.terms)

    def __len__(self) -> int:
        return len(self.terms)

    def __contains__(self, term: str) -> bool:
        return term in self.index

    def __eq__(self, other) -> bool:
        return isinstance(other, Vocabulary) and self.terms == other.terms

    def __hash__(self):
        return hash(self.terms)

    def __repr__(self):
        return f"Vocabulary(V={self.V})"


def load_corpus(path: str | Path, lang: str) -> list[Document]:
    """Load a line-delimited JSON corpus file for one language.

    Raises :class:`FormatError` on malformed lines, duplicate ids, or
    documents whose declared language differs from ``lang``.
    """
    path = Path(path)
    if not path.exists():
        raise DataError(f"corpus file not found: {path}")
    docs: list[Document] = []
    seen: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise FormatError(path, lineno, f"invalid JSON: {exc.msg}") from exc
            if not isinstance(record, dict):
                raise FormatError(path, lineno, "record is not a JSON object")
            missing = {"id", "lang", "lemmas"} - record.keys()
            if missing:
                raise FormatError(path, lineno, f"missing keys: {sorted(missing)}")
            doc_id = record["id"]
            if not isinstance(doc_id, str) or not doc_id:
                raise FormatError(path, lineno, "id must be a non-empty string")
            if doc_id in seen:
                raise FormatError(path, lineno, f"duplicate document id {doc_id!r}")
            if record["lang"] != lang:
                raise FormatError(
                    path, lineno,
                    f"document {doc_id!r} declares language {record['lang']!r}, expected {lang!r}",
                )
            lemmas = record["lemmas"]
            if not isinstance(lemmas, list) or not all(isinstance(x, str) for x in lemmas):
                raise FormatError(path, lineno, "lemmas must be an array of strings")
            codes = record.get("codes", [])
            if not isinstance(codes, list) or not all(isinstance(x, str) for x in codes):
                raise FormatError(path, lineno, "codes must be an array of strings")
            try:
                doc = Document(doc_id, lang, tuple(lemmas), frozenset(codes))
            except DataError as exc:
                raise FormatError(path, lineno, str(exc)) from exc
            seen.add(doc_id)
            docs.append(doc)
    return docs


def load_stopwords(path: str | Path) -> frozenset[str]:
    """Read a stopword file: one lemma per line, '#' comments allowed."""
    path = Path(path)
    if not path.exists():
        raise DataError(f"stopword file not found: {path}")
    words: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        for raw in fh:
            line = raw.split("#", 1)[0].strip()
            if line:
                words.add(line.lower())
    return frozenset(words)


def normalize(
    raw_text: str,
    lang: str,
    stopwords: Iterable[str] = (),
    min_len: int = 2,
) -> list[str]:
    """Rule-based fallback normalizer for raw text.

    Lowercases, tokenizes on whitespace, strips non-letter characters from
    each token, then drops stopwords and tokens shorter than ``min_len``.
    The same rules apply to every language; ``lang`` is accepted for
    interface symmetry with pre-lemmatized loading.
    """
    if min_len < 1:
        raise ValueError("min_len must be >= 1")
    stop = set(stopwords)
    out: list[str] = []
    for token in raw_text.lower().split():
        term = "".join(ch for ch in token if ch.isalpha())
        if not term or term in stop or len(term) < min_len:
            continue
        out.append(term)
    return out


def build_vocabulary(
    docs: Sequence[Document],
    min_df: int = 1,
    max_df_ratio: float = 1.0,
) -> Vocabulary:
    """Build the model vocabulary from document frequencies.

    Keeps exactly the lemmas with document frequency ``df >= min_df`` and
    ``df / len(docs) <= max_df_ratio``; terms are ordered lexicographically
    so term ids are reproducible across runs.
    """
    if not docs:
        raise DataError("cannot build a vocabulary from an empty corpus")
    if min_df < 1:
        raise ValueError("min_df must be >= 1")
    if not 0.0 < max_df_ratio <= 1.0:
        raise ValueError("max_df_ratio must be in (0, 1]")
    df: dict[str, int] = {}
    for doc in docs:
        for lemma in set(doc.lemmas):
            df[lemma] = df.get(lemma, 0) + 1
    n = len(docs)
    terms = sorted(t for t, c in df.items() if c >= min_df and c / n <= max_df_ratio)
    if not terms:
        raise DataError(
            f"vocabulary is empty after filtering (min_df={min_df}, max_df_ratio={max_df_ratio})"
        )
    return Vocabulary(terms)
