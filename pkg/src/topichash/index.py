"""Per-level inverted index for sub-quadratic candidate generation.

A document with a positive similarity to the query must share at least one
(level, label) pair with it, so the union of the query's posting lists is
a lossless candidate set: `query` is an exact accelerator of
`brute_force_query`, not an approximation, and the two must return
identical rankings.

Reads may run concurrently; `add_document` requires exclusive access
(readers-exclude-writer contract, no internal locking).
"""

from __future__ import annotations

import bisect
import json
from pathlib import Path
from typing import Iterable, Mapping

from .errors import DataError
from .hashing import HashExpression, iter_hashes, save_hashes, similarity

# Ranked (doc id, score) pairs: scores non-increasing, ties by ascending id.
QueryResult = list[tuple[str, float]]

MANIFEST_FORMAT_VERSION = 1


class InvertedIndex:
    """Mapping (level, label) -> sorted posting list, plus the hash store."""

    def __init__(self, L: int):
        if L < 1:
            raise ValueError("L must be >= 1")
        self.L = L
        self._postings: dict[tuple[int, str], list[str]] = {}
        self._store: dict[str, HashExpression] = {}

    def __len__(self) -> int:
        return len(self._store)

    def __contains__(self, doc_id: str) -> bool:
        return doc_id in self._store

    @property
    def store(self) -> Mapping[str, HashExpression]:
        return self._store

    def postings(self, level: int, label: str) -> list[str]:
        return list(self._postings.get((level, label), ()))

    def add_document(self, h: HashExpression) -> None:
        """Index one hash-expression; postings stay sorted and duplicate-free."""
        if h.L != self.L:
            raise DataError(f"hash has {h.L} levels, index expects {self.L}")
        if h.doc_id in self._store:
            raise DataError(f"document {h.doc_id!r} is already indexed")
        self._store[h.doc_id] = h
        for level, labels in enumerate(h.levels):
            for label in labels:
                bisect.insort(self._postings.setdefault((level, label), []), h.doc_id)

    def candidates(self, h: HashExpression) -> set[str]:
        """Union of posting lists over the query's (level, label) pairs."""
        if h.L != self.L:
            raise DataError(f"hash has {h.L} levels, index expects {self.L}")
        out: set[str] = set()
        for level, labels in enumerate(h.levels):
            for label in labels:
                out.update(self._postings.get((level, label), ()))
        return out

    def query(self, h: HashExpression, k: int) -> QueryResult:
        """Top-k most similar indexed documents, via candidate generation."""
        if k < 1:
            raise ValueError("k must be >= 1")
        cands = self.candidates(h)
        cands.discard(h.doc_id)
        scored = [(doc_id, similarity(h, self._store[doc_id])) for doc_id in cands]
        return _rank(scored, k)

    def brute_force_query(self, h: HashExpression, k: int) -> QueryResult:
        """Linear-scan oracle with identical scoring and tie rules."""
        if h.L != self.L:
            raise DataError(f"hash has {h.L} levels, index expects {self.L}")
        if k < 1:
            raise ValueError("k must be >= 1")
        scored = [
            (doc_id, similarity(h, stored))
            for doc_id, stored in self._store.items()
            if doc_id != h.doc_id
        ]
        return _rank(scored, k)

    def rebuild_postings(self) -> None:
        """Reconstruct postings from the store (rebuild idempotence)."""
        docs = list(self._store.values())
        self._postings.clear()
        self._store.clear()
        for h in docs:
            self.add_document(h)


def _rank(scored: list[tuple[str, float]], k: int) -> QueryResult:
    positive = [(doc_id, s) for doc_id, s in scored if s > 0.0]
    positive.sort(key=lambda item: (-item[1], item[0]))
    return positive[:k]


# ------------------------------------------------------------ persistence


def save_index(
    index: InvertedIndex,
    hashes_path: str | Path,
    manifest_path: str | Path,
    scheme: str,
    model_hashes: Mapping[str, str],
    extra: Mapping[str, object] | None = None,
) -> None:
    """Persist the index as its hash JSONL plus a manifest.

    Postings are not stored; they are rebuilt on load.  Documents are
    written in ascending id order for byte-stable output.
    """
    ordered = [index.store[doc_id] for doc_id in sorted(index.store)]
    save_hashes(ordered, hashes_path)
    manifest = {
        "format_version": MANIFEST_FORMAT_VERSION,
        "L": index.L,
        "scheme": scheme,
        "model_hashes": dict(sorted(model_hashes.items())),
    }
    if extra:
        manifest.update(extra)
    Path(manifest_path).write_text(
        json.dumps(manifest, ensure_ascii=False, sort_keys=True, separators=(",", ":")) + "\n",
        encoding="utf-8",
    )


def load_index(
    hashes_path: str | Path, manifest_path: str | Path
) -> tuple[InvertedIndex, dict]:
    """Rebuild an index from its hash JSONL and manifest files."""
    manifest_path = Path(manifest_path)
    if not manifest_path.exists():
        raise DataError(f"index manifest not found: {manifest_path}")
    try:
        manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
        L = int(manifest["L"])
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise DataError(f"index manifest {manifest_path} is malformed: {exc}") from exc
    index = InvertedIndex(L)
    for h in iter_hashes(hashes_path):
        index.add_document(h)
    return index, manifest
