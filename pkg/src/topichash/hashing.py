"""Hierarchical hash-expressions and the level-wise Jaccard metric.

A document's topic distribution is condensed into L ordered label sets:
topics below uniform mass are discarded, the survivors are grouped by
their probability values with an exact 1-D k-means (dynamic programming,
no random initialization), and each group's topic labels are unioned into
one level.  Level 0 holds the most probable topics.

Two hash-expressions are compared by summing the per-level Jaccard
indices; J(empty, empty) counts as 0 so mutual absence of topics earns no
credit.  Ranking uses this similarity descending; the complementary
distance is L - similarity.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, Sequence

import numpy as np

from .annotate import TopicLabelSet
from .errors import DataError, FormatError

logger = logging.getLogger(__name__)

DEFAULT_LEVELS = 3


@dataclass(frozen=True)
class HashExpression:
    """Ordered sequence of label sets; level 0 is most important."""

    doc_id: str
    levels: tuple[frozenset[str], ...]

    @property
    def L(self) -> int:
        return len(self.levels)


def assign_levels(theta: Sequence[float] | np.ndarray, L: int) -> tuple[frozenset[int], ...]:
    """Partition above-uniform topics into L importance levels.

    Topics with mass below 1/K are discarded (equality survives).  The
    surviving distinct values are clustered by exact weighted 1-D k-means
    into min(L, #distinct values) groups; groups are ordered by descending
    mean, group i filling level i, trailing levels left empty.  Purely
    deterministic.
    """
    if L < 1:
        raise ValueError("L must be >= 1")
    theta = np.asarray(theta, dtype=np.float64)
    if theta.ndim != 1 or theta.size < 1:
        raise ValueError("theta must be a non-empty vector")
    if np.any(theta < 0) or abs(float(theta.sum()) - 1.0) > 1e-6:
        raise ValueError("theta must be a probability vector")
    K = theta.size
    threshold = 1.0 / K
    survivors = [k for k in range(K) if theta[k] >= threshold]
    if not survivors:
        logger.warning("all %d topics below uniform mass; hash levels are empty", K)
        return tuple(frozenset() for _ in range(L))

    by_value: dict[float, list[int]] = {}
    for k in survivors:
        by_value.setdefault(float(theta[k]), []).append(k)
    values = sorted(by_value)  # ascending
    weights = [len(by_value[v]) for v in values]
    g = min(L, len(values))
    segments = _kmeans_1d(values, weights, g)

    levels: list[frozenset[int]] = []
    for start, end in reversed(segments):  # descending mean order
        topics: set[int] = set()
        for v in values[start:end]:
            topics.update(by_value[v])
        levels.append(frozenset(topics))
    levels.extend(frozenset() for _ in range(L - len(levels)))
    return tuple(levels)


def _kmeans_1d(values: Sequence[float], weights: Sequence[int], g: int) -> list[tuple[int, int]]:
    """Exact weighted k-means on sorted 1-D values via dynamic programming.

    Returns g contiguous [start, end) segments over ``values`` minimizing
    the weighted within-cluster sum of squares.  Ties between splits are
    broken toward the earliest split point, which is deterministic.
    """
    n = len(values)
    if not 1 <= g <= n:
        raise ValueError("cluster count must be in [1, len(values)]")
    w = np.asarray(weights, dtype=np.float64)
    v = np.asarray(values, dtype=np.float64)
    cw = np.concatenate([[0.0], np.cumsum(w)])
    cs1 = np.concatenate([[0.0], np.cumsum(w * v)])
    cs2 = np.concatenate([[0.0], np.cumsum(w * v * v)])

    def cost(i: int, j: int) -> float:
        # weighted SSE of values[i:j]
        ww = cw[j] - cw[i]
        s1 = cs1[j] - cs1[i]
        s2 = cs2[j] - cs2[i]
        return max(s2 - (s1 * s1) / ww, 0.0)

    INF = float("inf")
    best = [[INF] * (g + 1) for _ in range(n + 1)]
    split = [[0] * (g + 1) for _ in range(n + 1)]
    best[0][0] = 0.0
    for j in range(1, n + 1):
        for m in range(1, min(g, j) + 1):
            for i in range(m - 1, j):
                cand = best[i][m - 1] + cost(i, j)
                if cand < best[j][m]:
                    best[j][m] = cand
                    split[j][m] = i
    segments: list[tuple[int, int]] = []
    j = n
    for m in range(g, 0, -1):
        i = split[j][m]
        segments.append((i, j))
        j = i
    segments.reverse()
    return segments


def build_hash(
    doc_id: str,
    theta: Sequence[float] | np.ndarray,
    label_sets: TopicLabelSet,
    L: int = DEFAULT_LEVELS,
) -> HashExpression:
    """Hash a document: level i is the union of its level-i topics' labels."""
    theta = np.asarray(theta, dtype=np.float64)
    if len(label_sets.labels) != theta.size:
        raise DataError(
            f"label set covers {len(label_sets.labels)} topics but theta has {theta.size}"
        )
    levels = assign_levels(theta, L)
    label_levels = tuple(
        frozenset().union(*(label_sets.labels[t] for t in topics)) if topics else frozenset()
        for topics in levels
    )
    return HashExpression(doc_id, label_levels)


def similarity(h1: HashExpression, h2: HashExpression) -> float:
    """Sum of per-level Jaccard indices, in [0, L]."""
    if h1.L != h2.L:
        raise DataError(f"hash level counts differ: {h1.L} vs {h2.L}")
    total = 0.0
    for a, b in zip(h1.levels, h2.levels):
        union = len(a | b)
        if union:
            total += len(a & b) / union
    return total


def distance(h1: HashExpression, h2: HashExpression) -> float:
    """Complementary quantity L - similarity; same ranking either way."""
    return h1.L - similarity(h1, h2)


# ------------------------------------------------------------ persistence


def save_hashes(hashes: Iterable[HashExpression], path: str | Path) -> None:
    """Write hash-expressions as JSON lines {doc_id, levels}."""
    with open(path, "w", encoding="utf-8") as fh:
        for h in hashes:
            record = {"doc_id": h.doc_id, "levels": [sorted(level) for level in h.levels]}
            fh.write(json.dumps(record, ensure_ascii=False, sort_keys=True, separators=(",", ":")))
            fh.write("\n")


def iter_hashes(path: str | Path) -> Iterator[HashExpression]:
    """Stream hash-expressions back from a JSONL file."""
    path = Path(path)
    if not path.exists():
        raise DataError(f"hash file not found: {path}")
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
                yield HashExpression(
                    record["doc_id"],
                    tuple(frozenset(level) for level in record["levels"]),
                )
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise FormatError(path, lineno, f"bad hash record: {exc}") from exc


def load_hashes(path: str | Path) -> list[HashExpression]:
    return list(iter_hashes(path))
