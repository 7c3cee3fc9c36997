"""Retrieval evaluation: ground truth from shared codes, precision@k.

The experiment mirrors the retrieval protocol: sample query documents
uniformly from the pooled corpora of a language combination, rank the rest
by hash similarity through the inverted index, and score precision@k
against the documents sharing at least one mapped category with the query.
Queries are processed in sorted-id order so the report is deterministic
regardless of execution order.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .corpus import Document
from .errors import DataError
from .eurovoc import CategoryMapping, map_codes
from .index import InvertedIndex

logger = logging.getLogger(__name__)

SKIP_NO_GROUND_TRUTH = "no_ground_truth"
SKIP_NO_HASH = "no_in_vocab_lemmas"


@dataclass(frozen=True)
class EvalConfig:
    """One experiment: a language combination, a scheme, and the cutoffs."""

    languages: tuple[str, ...]
    scheme: str
    query_count: int = 1000
    ks: tuple[int, ...] = (3, 5, 10)
    seed: int = 0

    def __post_init__(self):
        if not self.languages:
            raise DataError("languages must be non-empty")
        if not self.ks:
            raise DataError("ks must be non-empty")
        if self.query_count < 1:
            raise DataError("query_count must be >= 1")
        if any(k < 1 for k in self.ks):
            raise DataError("every k must be >= 1")

    @property
    def combo(self) -> str:
        return "-".join(self.languages)


@dataclass
class EvalReport:
    """Mean precision per k for one (combination, scheme), plus skip counts."""

    combo: str
    scheme: str
    precisions: dict[int, float]
    evaluated: int
    skipped: dict[str, int]
    per_query: dict[str, dict[int, float]] = field(default_factory=dict)

    @property
    def sampled(self) -> int:
        return self.evaluated + sum(self.skipped.values())


def ground_truth(
    query: Document,
    corpus: Sequence[Document],
    mapping: CategoryMapping,
) -> set[str]:
    """Ids of documents sharing >= 1 mapped category with the query."""
    query_cats = map_codes(query.codes, mapping, unmappable=set())
    if not query_cats:
        raise DataError(f"query {query.id!r} has no mappable code")
    out: set[str] = set()
    for doc in corpus:
        if doc.id == query.id:
            continue
        if map_codes(doc.codes, mapping, unmappable=set()) & query_cats:
            out.add(doc.id)
    return out


def precision_at_k(ranked: Sequence[str], relevant: set[str], k: int) -> float:
    """|top-k hits| / k; missing slots count as non-relevant."""
    if k < 1:
        raise ValueError("k must be >= 1")
    hits = sum(1 for doc_id in ranked[:k] if doc_id in relevant)
    return hits / k


def run_experiment(
    cfg: EvalConfig,
    index: InvertedIndex,
    docs: Sequence[Document],
    mapping: CategoryMapping,
) -> EvalReport:
    """Sample queries, retrieve through the index, average precision@k.

    Sampled documents without an indexed hash (no in-vocabulary lemmas at
    hashing time) or without ground truth (no mappable code, or no other
    document sharing a category) are skipped and counted.
    """
    pool = [d for d in docs if d.lang in cfg.languages]
    if not pool:
        raise DataError(f"no documents for language combination {cfg.combo!r}")
    by_id = {d.id: d for d in pool}
    if len(by_id) != len(pool):
        raise DataError("duplicate document ids in the pooled corpus")

    doc_cats: dict[str, frozenset[str]] = {
        d.id: frozenset(map_codes(d.codes, mapping, unmappable=set())) for d in pool
    }
    cat_members: dict[str, set[str]] = {}
    for doc_id, cats in doc_cats.items():
        for cat in cats:
            cat_members.setdefault(cat, set()).add(doc_id)

    all_ids = sorted(by_id)
    rng = np.random.Generator(np.random.PCG64(cfg.seed))
    sample_size = min(cfg.query_count, len(all_ids))
    if sample_size < cfg.query_count:
        logger.warning(
            "query_count %d exceeds pool size %d; evaluating every document",
            cfg.query_count, len(all_ids),
        )
    sampled = sorted(rng.choice(np.array(all_ids, dtype=object), size=sample_size, replace=False))

    kmax = max(cfg.ks)
    sums = {k: 0.0 for k in cfg.ks}
    skipped = {SKIP_NO_GROUND_TRUTH: 0, SKIP_NO_HASH: 0}
    per_query: dict[str, dict[int, float]] = {}
    evaluated = 0
    for query_id in sampled:
        if query_id not in index:
            skipped[SKIP_NO_HASH] += 1
            continue
        cats = doc_cats[query_id]
        relevant: set[str] = set()
        for cat in cats:
            relevant |= cat_members.get(cat, set())
        relevant.discard(query_id)
        if not relevant:
            skipped[SKIP_NO_GROUND_TRUTH] += 1
            continue
        ranked = [doc_id for doc_id, _score in index.query(index.store[query_id], kmax)]
        per_query[query_id] = {k: precision_at_k(ranked, relevant, k) for k in cfg.ks}
        for k in cfg.ks:
            sums[k] += per_query[query_id][k]
        evaluated += 1

    precisions = {k: (sums[k] / evaluated if evaluated else 0.0) for k in cfg.ks}
    return EvalReport(cfg.combo, cfg.scheme, precisions, evaluated, skipped, per_query)


# --------------------------------------------------------------- reports


def write_report_tsv(reports: Sequence[EvalReport], path: str | Path) -> None:
    """TSV layout mirroring the result tables: one metric row per k, one
    column per (combination, scheme)."""
    if not reports:
        raise DataError("no reports to write")
    ks = sorted({k for r in reports for k in r.precisions})
    cols = [(r.combo, r.scheme) for r in reports]
    lines = ["metric\t" + "\t".join(f"{combo}:{scheme}" for combo, scheme in cols)]
    by_key = {(r.combo, r.scheme): r for r in reports}
    for k in ks:
        cells = []
        for key in cols:
            value = by_key[key].precisions.get(k)
            cells.append("" if value is None else f"{value:.4f}")
        lines.append(f"p@{k}\t" + "\t".join(cells))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_report_json(reports: Sequence[EvalReport], path: str | Path) -> None:
    doc = {
        "results": [
            {
                "combo": r.combo,
                "scheme": r.scheme,
                "precision": {str(k): v for k, v in sorted(r.precisions.items())},
                "evaluated": r.evaluated,
                "skipped": dict(sorted(r.skipped.items())),
                "per_query": {
                    qid: {str(k): v for k, v in sorted(vals.items())}
                    for qid, vals in sorted(r.per_query.items())
                },
            }
            for r in reports
        ]
    }
    Path(path).write_text(
        json.dumps(doc, ensure_ascii=False, sort_keys=True, separators=(",", ":")) + "\n",
        encoding="utf-8",
    )
