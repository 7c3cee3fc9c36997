import numpy as np
import pytest

from topichash.errors import DataError
from topichash.hashing import HashExpression
from topichash.index import InvertedIndex, load_index, save_index


def hx(doc_id, *levels):
    return HashExpression(doc_id, tuple(frozenset(l) for l in levels))


def random_hash(rng, doc_id, L=3, n_labels=20, max_per_level=4):
    labels = [f"s{i:02d}" for i in range(n_labels)]
    return hx(doc_id, *[
        {labels[j] for j in rng.integers(0, n_labels, size=rng.integers(0, max_per_level + 1))}
        for _ in range(L)
    ])


def random_index(rng, n_docs, L=3, n_labels=20):
    index = InvertedIndex(L)
    for i in range(n_docs):
        index.add_document(random_hash(rng, f"d{i:05d}", L, n_labels))
    return index


class TestAddDocument:
    def test_postings_structure(self):
        index = InvertedIndex(3)
        index.add_document(hx("d1", {"a"}, {"b"}, set()))
        assert index.postings(0, "a") == ["d1"]
        assert index.postings(1, "b") == ["d1"]
        assert index.postings(2, "a") == []

    def test_duplicate_id_rejected(self):
        index = InvertedIndex(2)
        index.add_document(hx("d1", {"a"}, set()))
        with pytest.raises(DataError, match="already indexed"):
            index.add_document(hx("d1", {"b"}, set()))

    def test_all_empty_levels_stored_without_postings(self):
        index = InvertedIndex(2)
        index.add_document(hx("d1", set(), set()))
        assert "d1" in index
        assert index.candidates(hx("q", {"a"}, {"b"})) == set()

    def test_mismatched_levels_rejected(self):
        index = InvertedIndex(2)
        with pytest.raises(DataError, match="levels"):
            index.add_document(hx("d1", {"a"}))

    def test_posting_lists_sorted(self):
        index = InvertedIndex(1)
        for doc_id in ["d3", "d1", "d2"]:
            index.add_document(hx(doc_id, {"a"}))
        assert index.postings(0, "a") == ["d1", "d2", "d3"]


class TestQuery:
    def test_zero_score_docs_excluded(self):
        index = InvertedIndex(2)
        index.add_document(hx("d1", {"a"}, set()))
        index.add_document(hx("d2", {"b"}, set()))
        assert index.query(hx("q", {"a"}, set()), 5) == [("d1", 1.0)]

    def test_empty_index(self):
        index = InvertedIndex(2)
        assert index.query(hx("q", {"a"}, {"b"}), 3) == []

    def test_query_doc_excluded_from_results(self):
        index = InvertedIndex(1)
        index.add_document(hx("d1", {"a"}))
        index.add_document(hx("d2", {"a"}))
        assert index.query(index.store["d1"], 5) == [("d2", 1.0)]

    def test_ties_broken_by_ascending_id(self):
        index = InvertedIndex(1)
        for doc_id in ["d2", "d1", "d3"]:
            index.add_document(hx(doc_id, {"a"}))
        assert index.query(hx("q", {"a"}), 3) == [("d1", 1.0), ("d2", 1.0), ("d3", 1.0)]

    def test_oracle_equivalence_randomized(self):
        rng = np.random.default_rng(7)
        for _ in range(10):
            index = random_index(rng, int(rng.integers(5, 200)))
            for q in range(10):
                query = random_hash(rng, f"q{q}")
                k = int(rng.integers(1, 12))
                assert index.query(query, k) == index.brute_force_query(query, k)

    def test_candidate_bound_by_posting_lengths(self):
        rng = np.random.default_rng(9)
        index = random_index(rng, 150)
        query = random_hash(rng, "q")
        bound = sum(
            len(index.postings(level, label))
            for level, labels in enumerate(query.levels)
            for label in labels
        )
        assert len(index.candidates(query)) <= bound

    def test_k_validated(self):
        index = InvertedIndex(1)
        with pytest.raises(ValueError):
            index.query(hx("q", {"a"}), 0)


class TestRebuild:
    def test_rebuild_idempotent(self):
        rng = np.random.default_rng(11)
        index = random_index(rng, 80)
        before = {key: index.postings(*key) for key in index._postings}
        index.rebuild_postings()
        after = {key: index.postings(*key) for key in index._postings}
        assert before == after


class TestPersistence:
    def test_round_trip(self, tmp_path):
        rng = np.random.default_rng(13)
        index = random_index(rng, 60)
        hp, mp = tmp_path / "h.jsonl", tmp_path / "m.json"
        save_index(index, hp, mp, "synset", {"xx": "deadbeef"})
        loaded, manifest = load_index(hp, mp)
        assert manifest["L"] == 3
        assert manifest["scheme"] == "synset"
        assert manifest["model_hashes"] == {"xx": "deadbeef"}
        assert loaded.store == index.store
        query = random_hash(rng, "q")
        assert loaded.query(query, 10) == index.query(query, 10)

    def test_save_deterministic_bytes(self, tmp_path):
        rng1, rng2 = np.random.default_rng(17), np.random.default_rng(17)
        i1, i2 = random_index(rng1, 40), random_index(rng2, 40)
        p1, p2 = tmp_path / "1.jsonl", tmp_path / "2.jsonl"
        save_index(i1, p1, tmp_path / "1.json", "synset", {})
        save_index(i2, p2, tmp_path / "2.json", "synset", {})
        assert p1.read_bytes() == p2.read_bytes()

    def test_missing_manifest(self, tmp_path):
        with pytest.raises(DataError):
            load_index(tmp_path / "h.jsonl", tmp_path / "nope.json")
