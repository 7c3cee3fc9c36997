"""Synthetic cross-lingual fixture generator.

Builds two artificial "languages" with disjoint vocabularies that a toy
lexicon maps onto one shared pseudo-synset inventory, plus themed
documents, a flat taxonomy of theme concepts, and a ready-to-run pipeline
configuration.  Every retrieval-relevant signal is planted, so the
generated corpus has known ground truth (documents of the same theme) and
exercises the whole pipeline end to end in seconds.

Usage: ``python -m topichash.synth OUT_DIR [--seed N]``.
"""

from __future__ import annotations

import argparse
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .corpus import Document

DEFAULT_SEED = 20240809


@dataclass(frozen=True)
class SyntheticFixture:
    languages: tuple[str, ...]
    themes: int
    synsets_per_theme: int
    docs: dict[str, list[Document]]        # per language, corpus order
    omw_rows: dict[str, list[tuple[str, str, str]]]  # (synset id, lang, word)
    taxonomy_edges: list[tuple[str, str]]  # (concept, parent or "")
    theme_of: dict[str, int]               # doc id -> planted theme

    @property
    def synset_count(self) -> int:
        return self.themes * self.synsets_per_theme


def _synset_id(i: int) -> str:
    return f"{90000000 + i:08d}-n"


def _word(lang: str, i: int) -> str:
    return f"{lang}w{i:03d}"


def build_fixture(
    languages: tuple[str, ...] = ("xx", "yy"),
    themes: int = 5,
    docs_per_theme: int = 40,
    doc_len: int = 30,
    synsets_per_theme: int = 10,
    seed: int = DEFAULT_SEED,
) -> SyntheticFixture:
    """Generate the planted corpus; deterministic for a fixed seed."""
    rng = np.random.Generator(np.random.PCG64(seed))
    total_synsets = themes * synsets_per_theme
    docs: dict[str, list[Document]] = {}
    omw_rows: dict[str, list[tuple[str, str, str]]] = {}
    theme_of: dict[str, int] = {}
    for lang in languages:
        omw_rows[lang] = [
            (_synset_id(i), lang, _word(lang, i)) for i in range(total_synsets)
        ]
        corpus: list[Document] = []
        for theme in range(themes):
            word_ids = np.arange(
                theme * synsets_per_theme, (theme + 1) * synsets_per_theme
            )
            for j in range(docs_per_theme):
                doc_id = f"{lang}-t{theme}-d{j:03d}"
                lemmas = tuple(
                    _word(lang, i) for i in rng.choice(word_ids, size=doc_len)
                )
                corpus.append(Document(doc_id, lang, lemmas, frozenset({f"T{theme}"})))
                theme_of[doc_id] = theme
        docs[lang] = corpus
    taxonomy_edges = [(f"T{t}", "") for t in range(themes)]
    return SyntheticFixture(
        tuple(languages), themes, synsets_per_theme, docs, omw_rows, taxonomy_edges, theme_of
    )


def write_fixture(fixture: SyntheticFixture, out_dir: str | Path, seed: int = 7) -> Path:
    """Write corpus/lexicon/taxonomy files and a config.toml into out_dir.

    Paths inside the config are relative to the config file's directory.
    Returns the config path.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for lang in fixture.languages:
        with open(out / f"corpus-{lang}.jsonl", "w", encoding="utf-8") as fh:
            for doc in fixture.docs[lang]:
                record = {
                    "id": doc.id,
                    "lang": doc.lang,
                    "lemmas": list(doc.lemmas),
                    "codes": sorted(doc.codes),
                }
                fh.write(json.dumps(record, ensure_ascii=False, separators=(",", ":")) + "\n")
        with open(out / f"omw-{lang}.tab", "w", encoding="utf-8") as fh:
            fh.write(f"# toy open-wordnet tab data for {lang}\n")
            for sid, lg, word in fixture.omw_rows[lang]:
                fh.write(f"{sid}\t{lg}:lemma\t{word}\n")
    with open(out / "taxonomy.tsv", "w", encoding="utf-8") as fh:
        for concept, parent in fixture.taxonomy_edges:
            fh.write(f"{concept}\t{parent}\n")

    lang_list = ", ".join(f'"{lang}"' for lang in fixture.languages)
    corpus_lines = "\n".join(
        f'{lang} = "corpus-{lang}.jsonl"' for lang in fixture.languages
    )
    omw_lines = "\n".join(f'{lang} = "omw-{lang}.tab"' for lang in fixture.languages)
    config = f"""# synthetic fixture pipeline configuration
languages = [{lang_list}]
seed = {seed}
out_dir = "out"

[corpus]
{corpus_lines}

[omw]
{omw_lines}

[vocab]
min_df = 1
max_df_ratio = 1.0

[model]
k = 10
alpha = 0.5
beta = 0.01
sweeps = 300
infer_sweeps = 60

[hash]
top_n = 5
levels = 3

[eurovoc]
taxonomy = "taxonomy.tsv"
depth = 1

[eval]
scheme = "synset"
ks = [3, 5, 10]
query_count = 100
"""
    config_path = out / "config.toml"
    config_path.write_text(config, encoding="utf-8")
    return config_path


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description="write the synthetic fixture")
    parser.add_argument("out_dir")
    parser.add_argument("--seed", type=int, default=DEFAULT_SEED)
    args = parser.parse_args(argv)
    fixture = build_fixture(seed=args.seed)
    config_path = write_fixture(fixture, args.out_dir)
    print(config_path)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
