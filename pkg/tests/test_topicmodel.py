import numpy as np
import pytest

from conftest import make_planted_corpus, planted_pair_mass
from topichash.corpus import Document, Vocabulary, build_vocabulary
from topichash.errors import DataError, NoInVocabularyLemmas
from topichash.topicmodel import (
    TopicModel,
    infer_theta,
    top_words,
    train_labeled_lda,
    train_lda,
)


def docs_of(rows, lang="xx"):
    return [Document(f"d{i}", lang, tuple(lemmas), frozenset(codes)) for i, (lemmas, codes) in enumerate(rows)]


class TestTrainLda:
    def test_single_term_simplex(self):
        docs = docs_of([(["a", "a"], [])])
        vocab = build_vocabulary(docs)
        model = train_lda(docs, vocab, K=1, alpha=0.1, beta=0.01, sweeps=5, seed=0)
        assert model.phi.shape == (1, 1)
        assert model.phi[0, 0] == 1.0

    def test_planted_recovery_single_seed(self, planted_corpus):
        docs, vocab = planted_corpus
        model = train_lda(docs, vocab, K=2, alpha=0.1, beta=0.01, sweeps=500, seed=13)
        assert planted_pair_mass(model) >= 0.9

    def test_count_consistency_every_sweep(self):
        docs, vocab = make_planted_corpus(n_docs=50, doc_len=12, seed=3)
        lengths = [sum(1 for l in d.lemmas if l in vocab) for d in docs]
        audited = []

        def audit(state):
            doc_lens = np.diff(state.doc_offsets)
            assert (state.n_dk.sum(axis=1) == doc_lens).all()
            assert (state.n_kw.sum(axis=1) == state.n_k).all()
            assert state.n_dk.sum() == sum(lengths)
            audited.append(state.sweep)

        train_lda(docs, vocab, K=3, alpha=0.5, beta=0.01, sweeps=20, seed=1, on_sweep=audit)
        assert audited == list(range(20))

    def test_fixed_seed_bit_identical(self, planted_corpus):
        docs, vocab = planted_corpus
        kwargs = dict(K=2, alpha=0.1, beta=0.01, sweeps=50, seed=99)
        m1 = train_lda(docs, vocab, **kwargs)
        m2 = train_lda(docs, vocab, **kwargs)
        assert m1.to_json_bytes() == m2.to_json_bytes()
        assert np.array_equal(m1.phi, m2.phi)

    def test_phi_rows_sum_to_one(self, planted_corpus):
        docs, vocab = planted_corpus
        model = train_lda(docs, vocab, K=4, alpha=0.2, beta=0.05, sweeps=30, seed=5)
        assert np.allclose(model.phi.sum(axis=1), 1.0, atol=1e-9)
        assert (model.phi > 0).all()

    def test_empty_corpus_rejected(self):
        with pytest.raises(DataError):
            train_lda([], Vocabulary(["a"]), K=1, alpha=0.1, beta=0.1, sweeps=1, seed=0)

    def test_doc_without_vocab_lemma_rejected(self):
        docs = docs_of([(["a"], []), (["zzz"], [])])
        with pytest.raises(DataError, match="mismatch"):
            train_lda(docs, Vocabulary(["a"]), K=1, alpha=0.1, beta=0.1, sweeps=1, seed=0)

    def test_mixed_language_corpus_rejected(self):
        docs = [Document("d1", "xx", ("a",)), Document("d2", "yy", ("a",))]
        with pytest.raises(DataError, match="languages"):
            train_lda(docs, Vocabulary(["a"]), K=1, alpha=0.1, beta=0.1, sweeps=1, seed=0)

    def test_parameter_validation(self):
        docs = docs_of([(["a"], [])])
        vocab = Vocabulary(["a"])
        with pytest.raises(ValueError):
            train_lda(docs, vocab, K=0, alpha=0.1, beta=0.1, sweeps=1, seed=0)
        with pytest.raises(ValueError):
            train_lda(docs, vocab, K=1, alpha=0.1, beta=0.1, sweeps=0, seed=0)
        with pytest.raises(ValueError):
            train_lda(docs, vocab, K=1, alpha=-1, beta=0.1, sweeps=1, seed=0)


class TestTrainLabeledLda:
    def test_labels_force_topic_words(self):
        rows = [(["a", "a", "a"], ["X"])] * 5 + [(["b", "b"], ["Y"])] * 5
        docs = docs_of(rows)
        vocab = build_vocabulary(docs)
        model = train_labeled_lda(docs, vocab, ["X", "Y"], alpha=0.5, beta=0.01, sweeps=10, seed=0)
        assert model.category_of == {0: "X", 1: "Y"}
        assert top_words(model, 0, 1)[0][0] == "a"
        assert top_words(model, 1, 1)[0][0] == "b"

    def test_single_category_equals_smoothed_frequencies(self):
        docs = docs_of([(["a", "b", "a"], ["X"]), (["b", "c"], ["X"])])
        vocab = build_vocabulary(docs)
        model = train_labeled_lda(docs, vocab, ["X"], alpha=0.5, beta=0.25, sweeps=3, seed=0)
        counts = np.array([2, 2, 1], dtype=float)  # a, b, c over 5 tokens
        expected = (counts + 0.25) / (5 + 3 * 0.25)
        assert np.allclose(model.phi[0], expected, atol=1e-12)

    def test_multi_label_doc_stays_in_label_set(self):
        rows = [(["a", "b", "c", "d"], ["X", "Y"])] * 4 + [(["a", "c"], ["Z"])] * 2
        docs = docs_of(rows)
        vocab = build_vocabulary(docs)
        categories = ["X", "Y", "Z"]
        allowed = []
        for doc in docs:
            allowed.append(sorted(categories.index(c) for c in doc.codes))

        def audit(state):
            for d in range(len(docs)):
                z_doc = state.z[state.doc_offsets[d]:state.doc_offsets[d + 1]]
                assert set(z_doc.tolist()) <= set(allowed[d])

        train_labeled_lda(docs, vocab, categories, alpha=0.5, beta=0.01, sweeps=15, seed=2, on_sweep=audit)

    def test_empty_category_set_rejected(self):
        docs = docs_of([(["a"], [])])
        with pytest.raises(DataError, match="empty category"):
            train_labeled_lda(docs, Vocabulary(["a"]), ["X"], 0.1, 0.1, 1, 0)

    def test_unknown_category_rejected(self):
        docs = docs_of([(["a"], ["Q"])])
        with pytest.raises(DataError, match="unknown"):
            train_labeled_lda(docs, Vocabulary(["a"]), ["X"], 0.1, 0.1, 1, 0)

    def test_category_binding_is_bijection(self):
        rows = [(["a"], ["X"]), (["b"], ["Y"])]
        docs = docs_of(rows)
        vocab = build_vocabulary(docs)
        model = train_labeled_lda(docs, vocab, ["X", "Y"], 0.1, 0.1, 2, 0)
        assert sorted(model.category_of) == [0, 1]
        assert set(model.category_of.values()) == {"X", "Y"}


class TestInferTheta:
    def test_k1_is_point_mass(self):
        docs = docs_of([(["a", "a"], [])])
        vocab = build_vocabulary(docs)
        model = train_lda(docs, vocab, K=1, alpha=0.1, beta=0.01, sweeps=2, seed=0)
        theta = infer_theta(model, ["a", "a", "a"], sweeps=10, seed=4)
        assert theta.tolist() == [1.0]

    def test_planted_doc_concentrates(self, planted_corpus):
        docs, vocab = planted_corpus
        model = train_lda(docs, vocab, K=2, alpha=0.1, beta=0.01, sweeps=500, seed=13)
        rng = np.random.default_rng(8)
        lemmas = [str(w) for w in rng.choice(["a", "b"], size=50)]
        theta = infer_theta(model, lemmas, sweeps=200, seed=21)
        # find which topic is the {a,b} topic
        ab = [vocab.index["a"], vocab.index["b"]]
        topic_a = int(np.argmax(model.phi[:, ab].sum(axis=1)))
        assert theta[topic_a] >= 0.9

    def test_deterministic(self, planted_corpus):
        docs, vocab = planted_corpus
        model = train_lda(docs, vocab, K=2, alpha=0.1, beta=0.01, sweeps=50, seed=1)
        t1 = infer_theta(model, ["a", "b", "c"], sweeps=40, seed=77)
        t2 = infer_theta(model, ["a", "b", "c"], sweeps=40, seed=77)
        assert np.array_equal(t1, t2)

    def test_sums_to_one(self, planted_corpus):
        docs, vocab = planted_corpus
        model = train_lda(docs, vocab, K=2, alpha=0.1, beta=0.01, sweeps=50, seed=1)
        theta = infer_theta(model, ["a", "c"], sweeps=30, seed=5)
        assert theta.min() >= 0
        assert abs(theta.sum() - 1.0) <= 1e-9

    def test_no_in_vocab_lemma_is_distinct_error(self, planted_corpus):
        docs, vocab = planted_corpus
        model = train_lda(docs, vocab, K=2, alpha=0.1, beta=0.01, sweeps=5, seed=1)
        with pytest.raises(NoInVocabularyLemmas):
            infer_theta(model, ["zzz"], sweeps=5, seed=0)


def make_model(phi, terms, lang="xx", category_of=None):
    return TopicModel(lang, 0.1, 0.01, np.array(phi, dtype=float), Vocabulary(terms), 0, category_of)


class TestTopWords:
    def test_direct_sort(self):
        model = make_model([[0.5, 0.3, 0.2]], ["a", "b", "c"])
        assert top_words(model, 0, 2) == [("a", 0.5), ("b", 0.3)]

    def test_tie_broken_lexicographically(self):
        model = make_model([[0.5, 0.25, 0.25]], ["a", "c", "b"])
        assert top_words(model, 0, 2) == [("a", 0.5), ("b", 0.25)]

    def test_out_of_range_topic(self):
        model = make_model([[1.0]], ["a"])
        with pytest.raises(ValueError):
            top_words(model, 1, 1)
        with pytest.raises(ValueError):
            top_words(model, -1, 1)

    def test_n_range(self):
        model = make_model([[1.0]], ["a"])
        with pytest.raises(ValueError):
            top_words(model, 0, 2)


class TestModelIO:
    def test_round_trip_exact(self, tmp_path, planted_corpus):
        docs, vocab = planted_corpus
        model = train_lda(docs, vocab, K=2, alpha=0.1, beta=0.01, sweeps=20, seed=6)
        path = tmp_path / "m.json"
        model.save(path)
        loaded = TopicModel.load(path)
        assert np.array_equal(loaded.phi, model.phi)
        assert loaded.vocab == model.vocab
        assert (loaded.lang, loaded.K, loaded.alpha, loaded.beta, loaded.seed) == (
            model.lang, model.K, model.alpha, model.beta, model.seed,
        )
        assert loaded.content_hash() == model.content_hash()

    def test_round_trip_labeled(self, tmp_path):
        docs = docs_of([(["a"], ["X"]), (["b"], ["Y"])])
        vocab = build_vocabulary(docs)
        model = train_labeled_lda(docs, vocab, ["X", "Y"], 0.1, 0.1, 2, 0)
        path = tmp_path / "m.json"
        model.save(path)
        assert TopicModel.load(path).category_of == {0: "X", 1: "Y"}

    def test_rejects_other_rng(self, tmp_path, planted_corpus):
        docs, vocab = planted_corpus
        model = train_lda(docs, vocab, K=2, alpha=0.1, beta=0.01, sweeps=2, seed=6)
        path = tmp_path / "m.json"
        raw = model.to_json_bytes().decode("utf-8").replace('"rng":"pcg64"', '"rng":"mt19937"')
        path.write_text(raw, encoding="utf-8")
        with pytest.raises(DataError, match="RNG"):
            TopicModel.load(path)

    def test_invalid_phi_rejected(self):
        with pytest.raises(DataError):
            make_model([[0.6, 0.6]], ["a", "b"])  # row sums to 1.2
        with pytest.raises(DataError):
            make_model([[1.0, 0.0]], ["a", "b"])  # zero entry
