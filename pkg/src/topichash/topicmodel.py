"""Per-language topic models trained by collapsed Gibbs sampling.

Two variants share one sampler: plain LDA, and the label-constrained
variant in which each document's topic assignments are restricted to its
category set, giving a one-to-one topic/category correspondence.  Point
estimates are taken from the final sample state; no averaging across
samples.

Randomness comes from numpy's PCG64 generator seeded with the caller's
integer seed.  Fixed inputs and seed give bit-identical models; the
generator name is recorded in the model file.
"""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from ._sampler import foldin_sweep, gibbs_sweep
from .corpus import Document, Vocabulary
from .errors import DataError, NoInVocabularyLemmas

logger = logging.getLogger(__name__)

RNG_ALGORITHM = "pcg64"
MODEL_FORMAT_VERSION = 1

# Sweep audit callback: receives a SweepState after each full sweep.
OnSweep = Callable[["SweepState"], None]


@dataclass(frozen=True)
class SweepState:
    """Read-only view of sampler state after one sweep, for audits."""

    sweep: int
    z: np.ndarray            # int32[N] topic per token
    doc_offsets: np.ndarray  # int64[D+1]
    n_dk: np.ndarray         # int32[D,K]
    n_kw: np.ndarray         # int32[K,V]
    n_k: np.ndarray          # int64[K]


class TopicModel:
    """Trained topic-word distributions for one language.

    ``phi`` is a K x V row-stochastic matrix.  ``category_of`` is present
    only for label-constrained models and maps topic id -> category id,
    bijectively over [0, K).
    """

    __slots__ = ("lang", "K", "alpha", "beta", "phi", "vocab", "category_of", "seed")

    def __init__(
        self,
        lang: str,
        alpha: float,
        beta: float,
        phi: np.ndarray,
        vocab: Vocabulary,
        seed: int,
        category_of: Mapping[int, str] | None = None,
    ):
        phi = np.asarray(phi, dtype=np.float64)
        if phi.ndim != 2:
            raise DataError("phi must be a K x V matrix")
        K, V = phi.shape
        if K < 1:
            raise DataError("topic count must be >= 1")
        if V != vocab.V:
            raise DataError(f"phi has {V} columns but the vocabulary has {vocab.V} terms")
        if alpha <= 0 or beta <= 0:
            raise DataError("alpha and beta must be positive")
        if np.any(phi <= 0):
            raise DataError("phi entries must be strictly positive")
        if np.max(np.abs(phi.sum(axis=1) - 1.0)) > 1e-9:
            raise DataError("phi rows must sum to 1 within 1e-9")
        if category_of is not None:
            if sorted(category_of) != list(range(K)):
                raise DataError("category_of must cover exactly the topics [0, K)")
            if len(set(category_of.values())) != K:
                raise DataError("category_of must be a bijection onto the category set")
            category_of = dict(category_of)
        phi = phi.copy()
        phi.setflags(write=False)
        self.lang = lang
        self.K = K
        self.alpha = float(alpha)
        self.beta = float(beta)
        self.phi = phi
        self.vocab = vocab
        self.category_of = category_of
        self.seed = int(seed)

    # ---------------------------------------------------------------- io

    def to_json_bytes(self) -> bytes:
        """Canonical serialization: fixed key order, floats at 17
        significant digits (exact round-trip for doubles)."""
        parts = [
            '{"format_version":%d' % MODEL_FORMAT_VERSION,
            ',"rng":"%s"' % RNG_ALGORITHM,
            ',"lang":%s' % json.dumps(self.lang, ensure_ascii=False),
            ',"K":%d' % self.K,
            ',"alpha":%s' % _fmt_float(self.alpha),
            ',"beta":%s' % _fmt_float(self.beta),
            ',"seed":%d' % self.seed,
            ',"vocab":%s' % json.dumps(list(self.vocab.terms), ensure_ascii=False, separators=(",", ":")),
        ]
        if self.category_of is not None:
            cats = [self.category_of[k] for k in range(self.K)]
            parts.append(',"category_of":%s' % json.dumps(cats, ensure_ascii=False, separators=(",", ":")))
        rows = ",".join(
            "[" + ",".join(_fmt_float(v) for v in row) + "]" for row in self.phi
        )
        parts.append(',"phi":[%s]}' % rows)
        return "".join(parts).encode("utf-8")

    def content_hash(self) -> str:
        """SHA-256 of the canonical serialization; identifies the model."""
        return hashlib.sha256(self.to_json_bytes()).hexdigest()

    def save(self, path: str | Path) -> None:
        Path(path).write_bytes(self.to_json_bytes())

    @classmethod
    def load(cls, path: str | Path) -> TopicModel:
        path = Path(path)
        if not path.exists():
            raise DataError(f"model file not found: {path}")
        try:
            doc = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise DataError(f"model file {path} is not valid JSON: {exc.msg}") from exc
        if doc.get("format_version") != MODEL_FORMAT_VERSION:
            raise DataError(f"unsupported model format_version in {path}")
        if doc.get("rng") != RNG_ALGORITHM:
            raise DataError(f"model {path} was produced with RNG {doc.get('rng')!r}, expected {RNG_ALGORITHM!r}")
        category_of = None
        if "category_of" in doc:
            category_of = {k: c for k, c in enumerate(doc["category_of"])}
        return cls(
            lang=doc["lang"],
            alpha=doc["alpha"],
            beta=doc["beta"],
            phi=np.array(doc["phi"], dtype=np.float64),
            vocab=Vocabulary(doc["vocab"]),
            seed=doc["seed"],
            category_of=category_of,
        )


def _fmt_float(x: float) -> str:
    return format(float(x), ".17g")


# ------------------------------------------------------------- training


def train_lda(
    docs: Sequence[Document],
    vocab: Vocabulary,
    K: int,
    alpha: float,
    beta: float,
    sweeps: int,
    seed: int,
    on_sweep: OnSweep | None = None,
) -> TopicModel:
    """Train plain LDA by collapsed Gibbs sampling.

    Out-of-vocabulary lemmas are dropped; every document must retain at
    least one in-vocabulary lemma.  ``on_sweep``, when given, is called
    with a :class:`SweepState` after every sweep (used for count audits).
    """
    _check_train_params(K, alpha, beta, sweeps)
    doc_tokens, lang = _encode_docs(docs, vocab)
    allowed = [list(range(K))] * len(doc_tokens)
    n_kw, n_k = _run_gibbs(doc_tokens, vocab.V, K, alpha, beta, sweeps, seed, allowed, on_sweep)
    phi = _estimate_phi(n_kw, n_k, beta, vocab.V)
    return TopicModel(lang, alpha, beta, phi, vocab, seed)


def train_labeled_lda(
    docs: Sequence[Document],
    vocab: Vocabulary,
    categories: Sequence[str],
    alpha: float,
    beta: float,
    sweeps: int,
    seed: int,
    on_sweep: OnSweep | None = None,
) -> TopicModel:
    """Train the label-constrained variant: one topic per category.

    Each document's ``codes`` must be a non-empty subset of ``categories``
    (category ids, not raw thesaurus codes); its tokens are only ever
    assigned to topics of those categories.
    """
    categories = list(categories)
    if not categories:
        raise DataError("categories must be non-empty")
    if len(set(categories)) != len(categories):
        raise DataError("categories contain duplicates")
    K = len(categories)
    _check_train_params(K, alpha, beta, sweeps)
    cat_index = {c: i for i, c in enumerate(categories)}
    allowed: list[list[int]] = []
    for doc in docs:
        if not doc.codes:
            raise DataError(f"document {doc.id!r} has an empty category set")
        unknown = doc.codes - cat_index.keys()
        if unknown:
            raise DataError(f"document {doc.id!r} has unknown categories: {sorted(unknown)}")
        allowed.append(sorted(cat_index[c] for c in doc.codes))
    doc_tokens, lang = _encode_docs(docs, vocab)
    n_kw, n_k = _run_gibbs(doc_tokens, vocab.V, K, alpha, beta, sweeps, seed, allowed, on_sweep)
    phi = _estimate_phi(n_kw, n_k, beta, vocab.V)
    category_of = dict(enumerate(categories))
    return TopicModel(lang, alpha, beta, phi, vocab, seed, category_of=category_of)


def infer_theta(
    model: TopicModel,
    lemmas: Iterable[str],
    sweeps: int,
    seed: int,
) -> np.ndarray:
    """Fold-in Gibbs inference of a document-topic distribution.

    phi is held fixed; theta = (n_dk + alpha) / (len + K*alpha) from the
    final state.  Raises :class:`NoInVocabularyLemmas` when no lemma is in
    the model vocabulary, so callers may skip the document.
    """
    if sweeps < 1:
        raise ValueError("sweeps must be >= 1")
    ids = [model.vocab.index[l] for l in lemmas if l in model.vocab.index]
    if not ids:
        raise NoInVocabularyLemmas("document has no lemma in the model vocabulary")
    K = model.K
    words = np.asarray(ids, dtype=np.int32)
    n = len(ids)
    rng = np.random.Generator(np.random.PCG64(seed))
    z = np.minimum((rng.random(n) * K), K - 1).astype(np.int32)
    counts = np.bincount(z, minlength=K).astype(np.int64)
    buf = np.empty(K, dtype=np.float64)
    for _ in range(sweeps):
        foldin_sweep(words, z, counts, model.phi, model.alpha, rng.random(n), buf)
    theta = (counts + model.alpha) / (n + K * model.alpha)
    return theta


def top_words(model: TopicModel, topic: int, n: int) -> list[tuple[str, float]]:
    """Top-n lemmas of a topic by probability, ties broken lexicographically."""
    if not 0 <= topic < model.K:
        raise ValueError(f"topic {topic} out of range [0, {model.K})")
    if not 1 <= n <= model.vocab.V:
        raise ValueError(f"n must be in [1, {model.vocab.V}]")
    row = model.phi[topic]
    order = sorted(range(model.vocab.V), key=lambda w: (-row[w], model.vocab.terms[w]))
    return [(model.vocab.terms[w], float(row[w])) for w in order[:n]]


# ------------------------------------------------------------- internals


def _check_train_params(K: int, alpha: float, beta: float, sweeps: int) -> None:
    if K < 1:
        raise ValueError("K must be >= 1")
    if sweeps < 1:
        raise ValueError("sweeps must be >= 1")
    if alpha <= 0 or beta <= 0:
        raise ValueError("alpha and beta must be positive")


def _encode_docs(
    docs: Sequence[Document], vocab: Vocabulary
) -> tuple[list[np.ndarray], str]:
    """Map documents to in-vocabulary word-id arrays; OOV lemmas dropped."""
    if not docs:
        raise DataError("cannot train on an empty corpus")
    langs = {doc.lang for doc in docs}
    if len(langs) != 1:
        raise DataError(f"corpus mixes languages: {sorted(langs)}")
    doc_tokens: list[np.ndarray] = []
    for doc in docs:
        ids = [vocab.index[l] for l in doc.lemmas if l in vocab.index]
        if not ids:
            raise DataError(
                f"document {doc.id!r} has no lemma in the vocabulary "
                "(vocabulary/document mismatch)"
            )
        doc_tokens.append(np.asarray(ids, dtype=np.int32))
    return doc_tokens, langs.pop()


def _run_gibbs(
    doc_tokens: list[np.ndarray],
    V: int,
    K: int,
    alpha: float,
    beta: float,
    sweeps: int,
    seed: int,
    allowed_sets: list[list[int]],
    on_sweep: OnSweep | None,
) -> tuple[np.ndarray, np.ndarray]:
    """Sequential collapsed Gibbs over the flattened corpus."""
    D = len(doc_tokens)
    doc_offsets = np.zeros(D + 1, dtype=np.int64)
    for d, toks in enumerate(doc_tokens):
        doc_offsets[d + 1] = doc_offsets[d] + len(toks)
    N = int(doc_offsets[-1])
    token_words = np.concatenate(doc_tokens).astype(np.int32)
    token_docs = np.repeat(np.arange(D, dtype=np.int64), [len(t) for t in doc_tokens])

    allowed = np.concatenate([np.asarray(a, dtype=np.int32) for a in allowed_sets])
    widths = np.asarray([len(a) for a in allowed_sets], dtype=np.int64)
    allowed_end = np.cumsum(widths)
    allowed_start = allowed_end - widths

    rng = np.random.Generator(np.random.PCG64(seed))
    pick = np.minimum(
        (rng.random(N) * widths[token_docs]).astype(np.int64), widths[token_docs] - 1
    )
    z = allowed[allowed_start[token_docs] + pick].astype(np.int32)

    n_dk = np.zeros((D, K), dtype=np.int32)
    np.add.at(n_dk, (token_docs, z), 1)
    n_kw = np.zeros((K, V), dtype=np.int32)
    np.add.at(n_kw, (z, token_words), 1)
    n_k = np.bincount(z, minlength=K).astype(np.int64)

    buf = np.empty(K, dtype=np.float64)
    for sweep in range(sweeps):
        gibbs_sweep(
            doc_offsets, token_words, z, allowed, allowed_start, allowed_end,
            n_dk, n_kw, n_k, alpha, beta, V, rng.random(N), buf,
        )
        if on_sweep is not None:
            on_sweep(SweepState(sweep, z, doc_offsets, n_dk, n_kw, n_k))
    return n_kw, n_k


def _estimate_phi(n_kw: np.ndarray, n_k: np.ndarray, beta: float, V: int) -> np.ndarray:
    return (n_kw + beta) / (n_k[:, None] + V * beta)
