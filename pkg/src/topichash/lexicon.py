"""Open Multilingual WordNet tab-file parsing and synset lookup.

A lexicon answers (lemma, language) -> set of synset ids.  Synset ids are
the language-independent "offset-pos" keys shared across OMW editions,
e.g. ``06254669-n``.  All parts of speech for a lemma are merged; lookup is
case-insensitive.
"""

from __future__ import annotations

import re
from pathlib import Path
from typing import Mapping

from .errors import DataError, FormatError

SYNSET_ID_PATTERN = re.compile(r"^\d+-[nvasr]$")

_LEMMA_RELATION_SUFFIX = ":lemma"


def is_synset_id(value: str) -> bool:
    """True if ``value`` matches the "offset-pos" synset id pattern."""
    return bool(SYNSET_ID_PATTERN.match(value))


class SynsetLexicon:
    """Immutable mapping (lang, lowercased lemma) -> frozenset of synset ids."""

    __slots__ = ("_entries", "langs")

    def __init__(self, entries: Mapping[tuple[str, str], frozenset[str]], langs):
        self._entries = dict(entries)
        self.langs = frozenset(langs)

    def __len__(self) -> int:
        return len(self._entries)

    def synsets_of(self, lemma: str, lang: str) -> frozenset[str]:
        """Synsets for a lemma; empty set when absent, error when the
        language was never loaded."""
        if lang not in self.langs:
            raise DataError(f"language {lang!r} is not loaded in this lexicon")
        return self._entries.get((lang, lemma.lower()), frozenset())

    def entries(self):
        """Iterate over ((lang, lemma), synset set) pairs."""
        return self._entries.items()


def load_omw(paths: Mapping[str, str | Path]) -> SynsetLexicon:
    """Parse OMW tab files, one per language.

    Expected row format: ``synset-id<TAB>lang:lemma<TAB>lemma``.  Lines
    starting with '#' are comments.  Rows whose relation key is not
    ``*:lemma`` (e.g. gloss rows) carry no lemma and are skipped.
    Underscores in multiword lemmas are normalized to spaces.
    """
    entries: dict[tuple[str, str], set[str]] = {}
    for lang in sorted(paths):
        path = Path(paths[lang])
        if not path.exists():
            raise DataError(f"OMW file for {lang!r} not found: {path}")
        rows = 0
        with open(path, encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, 1):
                line = raw.rstrip("\n")
                if not line or line.startswith("#"):
                    continue
                cols = line.split("\t")
                if len(cols) != 3:
                    raise FormatError(path, lineno, f"expected 3 tab-separated columns, got {len(cols)}")
                synset_id, relation, lemma = cols
                if not relation.endswith(_LEMMA_RELATION_SUFFIX):
                    continue
                if not is_synset_id(synset_id):
                    raise FormatError(path, lineno, f"invalid synset id {synset_id!r}")
                lemma = lemma.strip().lower().replace("_", " ")
                if not lemma:
                    raise FormatError(path, lineno, "empty lemma")
                entries.setdefault((lang, lemma), set()).add(synset_id)
                rows += 1
        if rows == 0:
            raise DataError(f"no valid lemma rows in OMW file {path}")
    return SynsetLexicon(
        {key: frozenset(ids) for key, ids in entries.items()},
        langs=set(paths),
    )
