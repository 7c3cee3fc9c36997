"""Cross-lingual document retrieval over topic hierarchies.

Documents are represented as hierarchical hash-expressions over topic
labels (synset sets for the unsupervised path, shared category ids for the
semi-supervised baseline) and ranked by a level-wise Jaccard similarity,
with an inverted index for sub-quadratic candidate generation and an
evaluation harness for precision@k against code-sharing ground truth.
"""

from .annotate import (
    TopicLabelSet,
    annotate_topics_category,
    annotate_topics_synset,
    load_labels,
    save_labels,
)
from .corpus import (
    Document,
    Vocabulary,
    build_vocabulary,
    load_corpus,
    load_stopwords,
    normalize,
)
from .errors import (
    DataError,
    FormatError,
    NoInVocabularyLemmas,
    TopicHashError,
    UsageError,
)
from .eurovoc import (
    CategoryMapping,
    Taxonomy,
    flatten,
    load_mapping,
    load_taxonomy,
    map_codes,
    save_mapping,
)
from .evalharness import (
    EvalConfig,
    EvalReport,
    ground_truth,
    precision_at_k,
    run_experiment,
    write_report_json,
    write_report_tsv,
)
from .hashing import (
    HashExpression,
    assign_levels,
    build_hash,
    distance,
    load_hashes,
    save_hashes,
    similarity,
)
from .index import InvertedIndex, QueryResult, load_index, save_index
from .lexicon import SynsetLexicon, load_omw
from .seeds import derive_seed
from .topicmodel import (
    SweepState,
    TopicModel,
    infer_theta,
    top_words,
    train_labeled_lda,
    train_lda,
)

__version__ = "0.1.0"

__all__ = [
    "CategoryMapping",
    "DataError",
    "Document",
    "EvalConfig",
    "EvalReport",
    "FormatError",
    "HashExpression",
    "InvertedIndex",
    "NoInVocabularyLemmas",
    "QueryResult",
    "SweepState",
    "SynsetLexicon",
    "Taxonomy",
    "TopicHashError",
    "TopicLabelSet",
    "TopicModel",
    "UsageError",
    "Vocabulary",
    "annotate_topics_category",
    "annotate_topics_synset",
    "assign_levels",
    "build_hash",
    "build_vocabulary",
    "derive_seed",
    "distance",
    "flatten",
    "ground_truth",
    "infer_theta",
    "load_corpus",
    "load_hashes",
    "load_index",
    "load_labels",
    "load_mapping",
    "load_omw",
    "load_stopwords",
    "load_taxonomy",
    "map_codes",
    "normalize",
    "precision_at_k",
    "run_experiment",
    "save_hashes",
    "save_index",
    "save_labels",
    "save_mapping",
    "similarity",
    "top_words",
    "train_labeled_lda",
    "train_lda",
    "write_report_json",
    "write_report_tsv",
]
