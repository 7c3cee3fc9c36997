"""Thesaurus flattening to an independent (antichain) category set.

The topic-independence assumption of the topic models requires categories
none of which is an ancestor of another.  We cut the broader-concept
forest at a configurable depth: categories are the concepts at exactly
that depth plus the leaves above it, and every concept maps to its unique
ancestor-or-self at the cut.

Concepts strictly above the cut with descendants at it are only mapped
(to themselves, added as categories and replacing their descendant
categories) when they actually carry document codes and none of their
descendant categories is the target of another observed code; otherwise
they stay unmapped and querying them is an error.  Conflicting codes are
flagged in a report rather than silently guessed.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

from .errors import DataError, FormatError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Taxonomy:
    """Broader-concept forest: concept -> parent (None for domain roots)."""

    parent: Mapping[str, str | None]

    @property
    def concepts(self) -> frozenset[str]:
        return frozenset(self.parent)

    @property
    def domains(self) -> frozenset[str]:
        return frozenset(c for c, p in self.parent.items() if p is None)

    def depths(self) -> dict[str, int]:
        """Depth of each concept from its root; raises on cycles/orphans."""
        depths: dict[str, int] = {}
        for concept in self.parent:
            if concept in depths:
                continue
            path = []
            node: str | None = concept
            while node is not None and node not in depths:
                if node not in self.parent:
                    raise DataError(f"concept {path[-1]!r} has undeclared parent {node!r}")
                if node in path:
                    raise DataError(f"cycle in taxonomy at concept {node!r}")
                path.append(node)
                node = self.parent[node]
            base = -1 if node is None else depths[node]
            for offset, seen in enumerate(reversed(path), 1):
                depths[seen] = base + offset
        return depths

    def children(self) -> dict[str, list[str]]:
        out: dict[str, list[str]] = {c: [] for c in self.parent}
        for concept, parent in self.parent.items():
            if parent is not None:
                out[parent].append(concept)
        for kids in out.values():
            kids.sort()
        return out


def load_taxonomy(path: str | Path) -> Taxonomy:
    """Read a TSV edge list: ``concept_id<TAB>parent_id``, empty parent = root."""
    path = Path(path)
    if not path.exists():
        raise DataError(f"taxonomy file not found: {path}")
    parent: dict[str, str | None] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.rstrip("\n")
            if not line.strip() or line.startswith("#"):
                continue
            cols = line.split("\t")
            if len(cols) != 2:
                raise FormatError(path, lineno, f"expected 2 tab-separated columns, got {len(cols)}")
            concept, par = cols[0].strip(), cols[1].strip()
            if not concept:
                raise FormatError(path, lineno, "empty concept id")
            if concept in parent:
                raise FormatError(path, lineno, f"concept {concept!r} declared twice")
            parent[concept] = par or None
    if not parent:
        raise DataError(f"taxonomy file {path} declares no concepts")
    tax = Taxonomy(parent)
    tax.depths()  # validates forest structure
    return tax


@dataclass(frozen=True)
class CategoryMapping:
    """Antichain category set plus the concept -> category map.

    ``unmapped`` holds concepts with no category (above-cut interior
    concepts that carry no codes); querying them is an error.
    ``conflicts`` is the flagged report of observed codes whose mapping
    had to be refused to preserve the antichain.
    """

    depth: int
    categories: frozenset[str]
    to_category: Mapping[str, str]
    unmapped: frozenset[str] = field(default_factory=frozenset)
    conflicts: Mapping[str, str] = field(default_factory=dict)

    def category_of(self, concept: str) -> str:
        if concept in self.to_category:
            return self.to_category[concept]
        if concept in self.unmapped:
            raise DataError(f"concept {concept!r} has no category at depth {self.depth}")
        raise DataError(f"unknown concept {concept!r}")

    @property
    def concepts(self) -> frozenset[str]:
        return frozenset(self.to_category) | self.unmapped


def flatten(
    tax: Taxonomy,
    depth: int,
    observed_codes: Iterable[str] = (),
) -> CategoryMapping:
    """Cut the taxonomy at ``depth`` and map every concept onto the cut.

    ``observed_codes`` are the concept ids actually used as document codes
    in the corpus at hand; they drive the edge rule for concepts strictly
    above the cut (see module docstring).
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    observed = set(observed_codes)
    unknown = observed - set(tax.parent)
    if unknown:
        raise DataError(f"observed codes not in taxonomy: {sorted(unknown)[:5]}")
    depths = tax.depths()
    children = tax.children()

    categories: set[str] = set()
    target: dict[str, str | None] = {}
    for concept in sorted(tax.parent, key=lambda c: (depths[c], c)):
        d = depths[concept]
        if d == depth or (d < depth and not children[concept]):
            categories.add(concept)
            target[concept] = concept
        elif d < depth:
            target[concept] = None  # above-cut interior: edge rule below
        else:
            target[concept] = target[tax.parent[concept]]  # type: ignore[index]

    conflicts: dict[str, str] = {}
    candidates = sorted(
        (c for c in observed if target[c] is None),
        key=lambda c: (-depths[c], c),
    )
    for cand in candidates:
        subtree = _subtree(cand, children)
        used_below = sorted(
            code
            for code in observed
            if code != cand and target[code] is not None and target[code] in subtree and target[code] != cand
        )
        if used_below:
            conflicts[cand] = (
                f"cannot become a category: descendant categories already serve codes {used_below[:5]}"
            )
            logger.warning("code %r unmappable at depth %d: %s", cand, depth, conflicts[cand])
            continue
        categories.add(cand)
        for node in subtree:
            if node != cand:
                categories.discard(node)
            target[node] = cand

    to_category = {c: t for c, t in target.items() if t is not None}
    unmapped = frozenset(c for c, t in target.items() if t is None)
    mapping = CategoryMapping(depth, frozenset(categories), to_category, unmapped, conflicts)
    _assert_antichain(mapping, tax)
    return mapping


def _subtree(root: str, children: Mapping[str, list[str]]) -> set[str]:
    out = {root}
    stack = [root]
    while stack:
        node = stack.pop()
        for child in children[node]:
            out.add(child)
            stack.append(child)
    return out


def _assert_antichain(mapping: CategoryMapping, tax: Taxonomy) -> None:
    categories = mapping.categories
    for cat in categories:
        node = tax.parent[cat]
        while node is not None:
            if node in categories:
                raise DataError(
                    f"internal error: categories {cat!r} and {node!r} violate the antichain"
                )
            node = tax.parent[node]


def map_codes(
    codes: Iterable[str],
    mapping: CategoryMapping,
    unmappable: set[str] | None = None,
) -> set[str]:
    """Map document codes onto categories.

    Unmappable codes are warned about and collected into ``unmappable``
    when a collector is given; unknown concept ids are an error.
    """
    out: set[str] = set()
    for code in sorted(set(codes)):
        if code in mapping.to_category:
            out.add(mapping.to_category[code])
        elif code in mapping.unmapped:
            logger.warning("document code %r has no category at depth %d", code, mapping.depth)
            if unmappable is not None:
                unmappable.add(code)
        else:
            raise DataError(f"unknown concept {code!r}")
    return out


# ------------------------------------------------------------ persistence


def save_mapping(mapping: CategoryMapping, path: str | Path) -> None:
    doc = {
        "depth": mapping.depth,
        "categories": sorted(mapping.categories),
        "to_category": dict(sorted(mapping.to_category.items())),
        "unmapped": sorted(mapping.unmapped),
        "conflicts": dict(sorted(mapping.conflicts.items())),
    }
    Path(path).write_text(
        json.dumps(doc, ensure_ascii=False, sort_keys=True, separators=(",", ":")) + "\n",
        encoding="utf-8",
    )


def load_mapping(path: str | Path) -> CategoryMapping:
    path = Path(path)
    if not path.exists():
        raise DataError(f"mapping file not found: {path}")
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
        return CategoryMapping(
            depth=int(doc["depth"]),
            categories=frozenset(doc["categories"]),
            to_category=dict(doc["to_category"]),
            unmapped=frozenset(doc.get("unmapped", [])),
            conflicts=dict(doc.get("conflicts", {})),
        )
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise DataError(f"mapping file {path} is malformed: {exc}") from exc
