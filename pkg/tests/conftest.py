import numpy as np
import pytest

from topichash.corpus import Document, Vocabulary, build_vocabulary


def make_planted_corpus(n_docs=200, doc_len=20, seed=0):
    """Two planted topics: A uniform over {a,b}, B uniform over {c,d}.

    Half the documents are pure draws from each topic.
    """
    rng = np.random.default_rng(seed)
    docs = []
    for i in range(n_docs // 2):
        lemmas = tuple(str(w) for w in rng.choice(["a", "b"], size=doc_len))
        docs.append(Document(f"a{i:04d}", "xx", lemmas))
    for i in range(n_docs // 2):
        lemmas = tuple(str(w) for w in rng.choice(["c", "d"], size=doc_len))
        docs.append(Document(f"b{i:04d}", "xx", lemmas))
    vocab = build_vocabulary(docs)
    assert vocab.terms == ("a", "b", "c", "d")
    return docs, vocab


def planted_pair_mass(model):
    """Max over topic permutations of the min per-row mass on its planted
    word pair ({a,b} for one topic, {c,d} for the other)."""
    ab = [model.vocab.index["a"], model.vocab.index["b"]]
    cd = [model.vocab.index["c"], model.vocab.index["d"]]
    direct = min(model.phi[0, ab].sum(), model.phi[1, cd].sum())
    swapped = min(model.phi[0, cd].sum(), model.phi[1, ab].sum())
    return max(direct, swapped)


@pytest.fixture(scope="session")
def planted_corpus():
    return make_planted_corpus()
