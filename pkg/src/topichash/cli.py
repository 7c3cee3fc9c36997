"""Command-line pipeline: train | annotate | flatten | index | query | eval.

One TOML config file drives a run; command-line flags override config
values.  Paths inside the config resolve relative to the config file's
directory.  All artifact writes are atomic (temp file + rename), so
commands are safely rerunnable.  Every random stage derives its seed from
the single run seed (see :mod:`topichash.seeds`).

Exit codes: 0 success, 1 usage error, 2 data error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Mapping, Sequence

try:
    import tomllib
except ImportError:  # Python < 3.11
    import tomli as tomllib

from . import annotate as annotate_mod
from . import evalharness, eurovoc, hashing
from .corpus import Document, build_vocabulary, load_corpus, load_stopwords, normalize
from .errors import DataError, NoInVocabularyLemmas, TopicHashError, UsageError
from .evalharness import EvalConfig, run_experiment, write_report_json, write_report_tsv
from .index import InvertedIndex, load_index, save_index
from .lexicon import load_omw
from .seeds import derive_seed
from .topicmodel import TopicModel, infer_theta, train_labeled_lda, train_lda

logger = logging.getLogger(__name__)

SCHEMES = (annotate_mod.SCHEME_SYNSET, annotate_mod.SCHEME_CATEGORY)


@dataclass
class RunConfig:
    """Validated run parameters; one instance drives every command."""

    languages: tuple[str, ...]
    corpus: dict[str, Path]
    out_dir: Path
    seed: int
    stopwords: dict[str, Path] = field(default_factory=dict)
    omw: dict[str, Path] = field(default_factory=dict)
    taxonomy: Path | None = None
    depth: int = 1
    K: int = 100
    alpha: float | None = None  # defaults to 50 / K
    beta: float = 0.01
    sweeps: int = 1000
    infer_sweeps: int = 100
    min_df: int = 1
    max_df_ratio: float = 1.0
    min_len: int = 2
    top_n: int = 5
    L: int = hashing.DEFAULT_LEVELS
    scheme: str = annotate_mod.SCHEME_SYNSET
    ks: tuple[int, ...] = (3, 5, 10)
    query_count: int = 1000

    def __post_init__(self):
        if not self.languages:
            raise UsageError("config must declare at least one language")
        missing = [lang for lang in self.languages if lang not in self.corpus]
        if missing:
            raise UsageError(f"no corpus path configured for languages: {missing}")
        if self.K < 1 or self.sweeps < 1 or self.infer_sweeps < 1:
            raise UsageError("k, sweeps and infer_sweeps must be >= 1")
        if self.alpha is None:
            self.alpha = 50.0 / self.K
        if self.alpha <= 0 or self.beta <= 0:
            raise UsageError("alpha and beta must be positive")
        if self.min_df < 1 or not 0.0 < self.max_df_ratio <= 1.0:
            raise UsageError("min_df must be >= 1 and max_df_ratio in (0, 1]")
        if self.min_len < 1 or self.top_n < 1 or self.L < 1 or self.depth < 1:
            raise UsageError("min_len, top_n, levels and depth must be >= 1")
        if self.scheme not in SCHEMES:
            raise UsageError(f"scheme must be one of {SCHEMES}")
        if not self.ks or any(k < 1 for k in self.ks):
            raise UsageError("eval ks must be a non-empty list of integers >= 1")
        if self.query_count < 1:
            raise UsageError("query_count must be >= 1")

    # -------- artifact paths

    def model_path(self, lang: str) -> Path:
        name = f"model-labeled-{lang}.json" if self.scheme == "category" else f"model-{lang}.json"
        return self.out_dir / name

    def labels_path(self, lang: str) -> Path:
        return self.out_dir / f"labels-{self.scheme}-{lang}.json"

    def hashes_path(self) -> Path:
        return self.out_dir / f"hashes-{self.scheme}.jsonl"

    def index_manifest_path(self) -> Path:
        return self.out_dir / f"index-{self.scheme}.json"

    def mapping_path(self) -> Path:
        return self.out_dir / "mapping.json"


def load_config(path: str | Path, overrides: Mapping[str, object] | None = None) -> RunConfig:
    """Parse the TOML config; ``overrides`` (from flags) win over the file."""
    path = Path(path)
    if not path.exists():
        raise DataError(f"config file not found: {path}")
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise DataError(f"config file {path} is not valid TOML: {exc}") from exc
    base = path.parent
    overrides = dict(overrides or {})

    def section(name: str) -> dict:
        value = raw.get(name, {})
        if not isinstance(value, dict):
            raise UsageError(f"config section [{name}] must be a table")
        return value

    def paths_of(name: str) -> dict[str, Path]:
        return {lang: base / p for lang, p in section(name).items()}

    model = section("model")
    vocab = section("vocab")
    hash_sec = section("hash")
    ev = section("eval")
    euro = section("eurovoc")
    out_dir = overrides.get("out_dir") or raw.get("out_dir", "out")
    seed = overrides.get("seed")
    if seed is None:
        seed = raw.get("seed", 0)
    taxonomy = euro.get("taxonomy")
    try:
        return RunConfig(
            languages=tuple(raw.get("languages", ())),
            corpus=paths_of("corpus"),
            stopwords=paths_of("stopwords"),
            omw=paths_of("omw"),
            taxonomy=(base / taxonomy) if taxonomy else None,
            depth=int(euro.get("depth", 1)),
            out_dir=Path(out_dir) if Path(out_dir).is_absolute() else base / out_dir,
            seed=int(seed),
            K=int(model.get("k", 100)),
            alpha=model.get("alpha"),
            beta=float(model.get("beta", 0.01)),
            sweeps=int(model.get("sweeps", 1000)),
            infer_sweeps=int(model.get("infer_sweeps", 100)),
            min_df=int(vocab.get("min_df", 1)),
            max_df_ratio=float(vocab.get("max_df_ratio", 1.0)),
            min_len=int(vocab.get("min_len", 2)),
            top_n=int(hash_sec.get("top_n", 5)),
            L=int(hash_sec.get("levels", hashing.DEFAULT_LEVELS)),
            scheme=str(overrides.get("scheme") or ev.get("scheme", "synset")),
            ks=tuple(int(k) for k in ev.get("ks", (3, 5, 10))),
            query_count=int(ev.get("query_count", 1000)),
        )
    except (TypeError, ValueError) as exc:
        raise UsageError(f"bad config value: {exc}") from exc


def _atomic_write(path: Path, write_fn: Callable[[Path], None]) -> None:
    """Write through a temp file in the same directory, then rename."""
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    write_fn(tmp)
    os.replace(tmp, path)


def _require(path: Path | None, what: str) -> Path:
    if path is None:
        raise UsageError(f"config does not declare a {what}")
    if not path.exists():
        raise DataError(f"{what} not found: {path}")
    return path


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _load_all_docs(cfg: RunConfig) -> dict[str, list[Document]]:
    return {
        lang: load_corpus(_require(cfg.corpus[lang], f"corpus for {lang}"), lang)
        for lang in cfg.languages
    }


# ------------------------------------------------------------- commands


def cmd_flatten(cfg: RunConfig) -> int:
    tax = eurovoc.load_taxonomy(_require(cfg.taxonomy, "taxonomy file"))
    observed: set[str] = set()
    for docs in _load_all_docs(cfg).values():
        for doc in docs:
            observed |= doc.codes
    mapping = eurovoc.flatten(tax, cfg.depth, observed)
    _atomic_write(cfg.mapping_path(), lambda p: eurovoc.save_mapping(mapping, p))
    logger.info(
        "flattened %d concepts to %d categories at depth %d (%d conflicts)",
        len(tax.concepts), len(mapping.categories), cfg.depth, len(mapping.conflicts),
    )
    print(cfg.mapping_path())
    return 0


def _train_docs(cfg: RunConfig, lang: str):
    """Load a corpus, build its vocabulary, drop untrainable documents."""
    docs = load_corpus(_require(cfg.corpus[lang], f"corpus for {lang}"), lang)
    vocab = build_vocabulary(docs, cfg.min_df, cfg.max_df_ratio)
    usable = [d for d in docs if any(l in vocab for l in d.lemmas)]
    dropped = len(docs) - len(usable)
    if dropped:
        logger.warning("%s: dropped %d documents with no in-vocabulary lemma", lang, dropped)
    return usable, vocab


def cmd_train(cfg: RunConfig) -> int:
    mapping = None
    if cfg.scheme == "category":
        mapping = eurovoc.load_mapping(_require(cfg.mapping_path(), "category mapping (run flatten first)"))
        categories = sorted(mapping.categories)
    for lang in cfg.languages:
        docs, vocab = _train_docs(cfg, lang)
        if cfg.scheme == "category":
            labeled = []
            for doc in docs:
                cats = eurovoc.map_codes(doc.codes, mapping, unmappable=set())
                if cats:
                    labeled.append(Document(doc.id, doc.lang, doc.lemmas, frozenset(cats)))
            if not labeled:
                raise DataError(f"{lang}: no documents with mappable categories")
            dropped = len(docs) - len(labeled)
            if dropped:
                logger.warning("%s: dropped %d unlabeled documents for the labeled model", lang, dropped)
            model = train_labeled_lda(
                labeled, vocab, categories, cfg.alpha, cfg.beta, cfg.sweeps,
                derive_seed(cfg.seed, "train-labeled", lang),
            )
        else:
            model = train_lda(
                docs, vocab, cfg.K, cfg.alpha, cfg.beta, cfg.sweeps,
                derive_seed(cfg.seed, "train", lang),
            )
        path = cfg.model_path(lang)
        _atomic_write(path, lambda p: model.save(p))
        logger.info("%s: trained K=%d model on %d documents -> %s", lang, model.K, len(docs), path)
        print(path)
    return 0


def cmd_annotate(cfg: RunConfig) -> int:
    for lang in cfg.languages:
        model = TopicModel.load(_require(cfg.model_path(lang), f"model for {lang} (run train first)"))
        if cfg.scheme == "synset":
            lex = load_omw({lang: _require(cfg.omw.get(lang), f"OMW tab file for {lang}")})
            labels = annotate_mod.annotate_topics_synset(model, lex, cfg.top_n)
        else:
            labels = annotate_mod.annotate_topics_category(model)
        path = cfg.labels_path(lang)
        _atomic_write(path, lambda p: annotate_mod.save_labels(labels, p))
        print(path)
    return 0


def cmd_index(cfg: RunConfig) -> int:
    index = InvertedIndex(cfg.L)
    model_hashes: dict[str, str] = {}
    skipped: dict[str, int] = {}
    for lang in cfg.languages:
        model = TopicModel.load(_require(cfg.model_path(lang), f"model for {lang} (run train first)"))
        labels = annotate_mod.load_labels(_require(cfg.labels_path(lang), f"labels for {lang} (run annotate first)"))
        if labels.model_ref != model.content_hash():
            raise DataError(
                f"{lang}: label file was produced from a different model "
                f"({labels.model_ref[:12]} != {model.content_hash()[:12]})"
            )
        model_hashes[lang] = model.content_hash()
        docs = load_corpus(_require(cfg.corpus[lang], f"corpus for {lang}"), lang)
        skipped[lang] = 0
        for doc in docs:
            try:
                theta = infer_theta(
                    model, doc.lemmas, cfg.infer_sweeps,
                    derive_seed(cfg.seed, "infer", lang, doc.id),
                )
            except NoInVocabularyLemmas:
                skipped[lang] += 1
                continue
            index.add_document(hashing.build_hash(doc.id, theta, labels, cfg.L))
        if skipped[lang]:
            logger.warning("%s: skipped %d documents with no in-vocabulary lemma", lang, skipped[lang])
    hashes_path, manifest_path = cfg.hashes_path(), cfg.index_manifest_path()
    hashes_tmp = hashes_path.with_name(hashes_path.name + ".tmp")
    manifest_tmp = manifest_path.with_name(manifest_path.name + ".tmp")
    save_index(
        index, hashes_tmp, manifest_tmp, cfg.scheme, model_hashes,
        extra={"skipped": dict(sorted(skipped.items()))},
    )
    os.replace(hashes_tmp, hashes_path)
    os.replace(manifest_tmp, manifest_path)
    logger.info("indexed %d documents -> %s", len(index), cfg.hashes_path())
    print(cfg.hashes_path())
    return 0


def cmd_query(cfg: RunConfig, doc_id: str | None, text: str | None, lang: str | None, k: int) -> int:
    if k < 1:
        raise UsageError("k must be >= 1")
    if (doc_id is None) == (text is None):
        raise UsageError("provide exactly one of --id or --text")
    index, _manifest = load_index(
        _require(cfg.hashes_path(), "hash file (run index first)"),
        _require(cfg.index_manifest_path(), "index manifest (run index first)"),
    )
    if doc_id is not None:
        if doc_id not in index:
            raise DataError(f"document {doc_id!r} is not indexed")
        query_hash = index.store[doc_id]
    else:
        if lang is None:
            raise UsageError("--text requires --lang")
        if lang not in cfg.languages:
            raise UsageError(f"language {lang!r} is not declared in the config")
        model = TopicModel.load(_require(cfg.model_path(lang), f"model for {lang}"))
        labels = annotate_mod.load_labels(_require(cfg.labels_path(lang), f"labels for {lang}"))
        stop = load_stopwords(cfg.stopwords[lang]) if lang in cfg.stopwords else frozenset()
        lemmas = normalize(text, lang, stop, cfg.min_len)
        theta = infer_theta(model, lemmas, cfg.infer_sweeps, derive_seed(cfg.seed, "query", lang))
        query_hash = hashing.build_hash("<query>", theta, labels, cfg.L)
    for ranked_id, score in index.query(query_hash, k):
        print(f"{ranked_id}\t{score:.6f}")
    return 0


def cmd_eval(cfg: RunConfig) -> int:
    index, _manifest = load_index(
        _require(cfg.hashes_path(), "hash file (run index first)"),
        _require(cfg.index_manifest_path(), "index manifest (run index first)"),
    )
    mapping = eurovoc.load_mapping(_require(cfg.mapping_path(), "category mapping (run flatten first)"))
    docs = [doc for lang_docs in _load_all_docs(cfg).values() for doc in lang_docs]
    eval_cfg = EvalConfig(
        languages=cfg.languages,
        scheme=cfg.scheme,
        query_count=cfg.query_count,
        ks=cfg.ks,
        seed=derive_seed(cfg.seed, "eval"),
    )
    report = run_experiment(eval_cfg, index, docs, mapping)
    tsv_path = cfg.out_dir / "results.tsv"
    json_path = cfg.out_dir / "results.json"
    _atomic_write(tsv_path, lambda p: write_report_tsv([report], p))
    _atomic_write(json_path, lambda p: write_report_json([report], p))
    inputs = {str(cfg.corpus[lang]): _sha256(cfg.corpus[lang]) for lang in cfg.languages}
    inputs[str(cfg.hashes_path())] = _sha256(cfg.hashes_path())
    inputs[str(cfg.mapping_path())] = _sha256(cfg.mapping_path())
    manifest = {
        "config": {
            "languages": list(cfg.languages),
            "scheme": cfg.scheme,
            "seed": cfg.seed,
            "ks": list(cfg.ks),
            "query_count": cfg.query_count,
            "levels": cfg.L,
            "top_n": cfg.top_n,
        },
        "inputs": dict(sorted(inputs.items())),
    }
    _atomic_write(
        cfg.out_dir / "run-manifest.json",
        lambda p: p.write_text(
            json.dumps(manifest, ensure_ascii=False, sort_keys=True, separators=(",", ":")) + "\n",
            encoding="utf-8",
        ),
    )
    for k in sorted(report.precisions):
        print(f"{report.combo}\t{report.scheme}\tp@{k}\t{report.precisions[k]:.4f}")
    logger.info(
        "evaluated %d queries (%s skipped) -> %s",
        report.evaluated, dict(report.skipped), tsv_path,
    )
    return 0


# ----------------------------------------------------------------- main


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse default exits with code 2
        raise UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="topichash", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in [
        ("train", "train per-language topic models"),
        ("annotate", "label topics with synsets or categories"),
        ("flatten", "flatten the thesaurus into independent categories"),
        ("index", "hash all documents and build the inverted index"),
        ("query", "rank indexed documents against a query"),
        ("eval", "run the retrieval experiment and write reports"),
    ]:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="TOML run configuration")
        p.add_argument("--seed", type=int, default=None, help="override the run seed")
        p.add_argument("--out-dir", default=None, help="override the artifact directory")
        p.add_argument("--scheme", choices=SCHEMES, default=None, help="override the labeling scheme")
        if name == "query":
            p.add_argument("--id", help="query by the id of an indexed document")
            p.add_argument("--text", help="query by raw text (requires --lang)")
            p.add_argument("--lang", help="language of --text")
            p.add_argument("--k", type=int, default=10)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    logging.basicConfig(
        level=os.environ.get("TOPICHASH_LOGLEVEL", "INFO"),
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        cfg = load_config(
            args.config,
            overrides={"seed": args.seed, "out_dir": args.out_dir, "scheme": args.scheme},
        )
        cfg.out_dir.mkdir(parents=True, exist_ok=True)
        if args.command == "train":
            return cmd_train(cfg)
        if args.command == "annotate":
            return cmd_annotate(cfg)
        if args.command == "flatten":
            return cmd_flatten(cfg)
        if args.command == "index":
            return cmd_index(cfg)
        if args.command == "query":
            return cmd_query(cfg, args.id, args.text, args.lang, args.k)
        if args.command == "eval":
            return cmd_eval(cfg)
        raise UsageError(f"unknown command {args.command!r}")
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except TopicHashError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
