"""Cross-lingual topic labels.

Unsupervised path: each topic is labeled with the union of the synsets of
its top-n words (n=5 by default), making labels comparable across
languages without any aligned corpora.  Semi-supervised baseline: each
topic of a label-constrained model is labeled with its bound category id.
Synsets are not weighted by word rank or probability; the label set is a
plain union.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

from .errors import DataError
from .lexicon import SynsetLexicon
from .topicmodel import TopicModel, top_words

logger = logging.getLogger(__name__)

DEFAULT_TOP_N = 5

SCHEME_SYNSET = "synset"
SCHEME_CATEGORY = "category"


@dataclass(frozen=True)
class TopicLabelSet:
    """Per-topic label sets for one model; scheme is 'synset' or 'category'."""

    scheme: str
    lang: str
    n: int | None
    labels: Mapping[int, frozenset[str]]
    model_ref: str

    def __post_init__(self):
        if self.scheme not in (SCHEME_SYNSET, SCHEME_CATEGORY):
            raise DataError(f"unknown labeling scheme {self.scheme!r}")
        if sorted(self.labels) != list(range(len(self.labels))):
            raise DataError("labels must cover exactly the topics [0, K)")
        if self.scheme == SCHEME_CATEGORY:
            for k, labels in self.labels.items():
                if len(labels) != 1:
                    raise DataError(f"category labels must be singletons; topic {k} has {len(labels)}")

    @property
    def K(self) -> int:
        return len(self.labels)


def annotate_topics_synset(
    model: TopicModel,
    lexicon: SynsetLexicon,
    n: int = DEFAULT_TOP_N,
) -> TopicLabelSet:
    """Label each topic with the union of its top-n words' synsets.

    Words absent from the lexicon contribute nothing; a topic whose top
    words all miss the lexicon ends up with an empty label set (warned,
    not fatal: such topics simply lose retrieval signal).
    """
    if model.lang not in lexicon.langs:
        raise DataError(f"lexicon has no data for model language {model.lang!r}")
    if not 1 <= n <= model.vocab.V:
        raise ValueError(f"n must be in [1, {model.vocab.V}]")
    labels: dict[int, frozenset[str]] = {}
    for k in range(model.K):
        union: set[str] = set()
        for lemma, _prob in top_words(model, k, n):
            union |= lexicon.synsets_of(lemma, model.lang)
        if not union:
            logger.warning(
                "topic %d (%s): none of the top-%d words has a synset; empty label set",
                k, model.lang, n,
            )
        labels[k] = frozenset(union)
    return TopicLabelSet(SCHEME_SYNSET, model.lang, n, labels, model.content_hash())


def annotate_topics_category(model: TopicModel) -> TopicLabelSet:
    """Label each topic of a label-constrained model with its category id."""
    if model.category_of is None:
        raise DataError("model has no topic/category binding; train the labeled variant")
    labels = {k: frozenset({model.category_of[k]}) for k in range(model.K)}
    return TopicLabelSet(SCHEME_CATEGORY, model.lang, None, labels, model.content_hash())


# ------------------------------------------------------------ persistence


def save_labels(label_set: TopicLabelSet, path: str | Path) -> None:
    doc = {
        "scheme": label_set.scheme,
        "lang": label_set.lang,
        "n": label_set.n,
        "labels": {str(k): sorted(v) for k, v in label_set.labels.items()},
        "model_ref": label_set.model_ref,
    }
    Path(path).write_text(
        json.dumps(doc, ensure_ascii=False, sort_keys=True, separators=(",", ":")) + "\n",
        encoding="utf-8",
    )


def load_labels(path: str | Path) -> TopicLabelSet:
    path = Path(path)
    if not path.exists():
        raise DataError(f"label file not found: {path}")
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
        labels = {int(k): frozenset(v) for k, v in doc["labels"].items()}
        return TopicLabelSet(doc["scheme"], doc["lang"], doc["n"], labels, doc["model_ref"])
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise DataError(f"label file {path} is malformed: {exc}") from exc
