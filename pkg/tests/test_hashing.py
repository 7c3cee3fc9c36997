import numpy as np
import pytest

from topichash.annotate import TopicLabelSet
from topichash.errors import DataError
from topichash.hashing import (
    HashExpression,
    assign_levels,
    build_hash,
    distance,
    load_hashes,
    save_hashes,
    similarity,
)


def hx(doc_id, *levels):
    return HashExpression(doc_id, tuple(frozenset(l) for l in levels))


def label_set(mapping, scheme="synset"):
    return TopicLabelSet(scheme, "xx", 5 if scheme == "synset" else None,
                         {k: frozenset(v) for k, v in mapping.items()}, "h")


class TestAssignLevels:
    def test_two_survivors_two_levels(self):
        levels = assign_levels([0.5, 0.3, 0.15, 0.05], 3)
        assert levels == (frozenset({0}), frozenset({1}), frozenset())

    def test_uniform_theta_one_cluster(self):
        K = 4
        levels = assign_levels([1.0 / K] * K, 3)
        assert levels == (frozenset(range(K)), frozenset(), frozenset())

    def test_point_mass(self):
        levels = assign_levels([1.0, 0.0, 0.0], 4)
        assert levels == (frozenset({0}), frozenset(), frozenset(), frozenset())

    def test_three_clusters_by_value_gaps(self):
        # K=8, 1/K=0.125; survivors 0.41, 0.32, 0.14, 0.13
        theta = [0.41, 0.32, 0.14, 0.13, 0.0, 0.0, 0.0, 0.0]
        levels = assign_levels(theta, 3)
        assert levels == (frozenset({0}), frozenset({1}), frozenset({2, 3}))

    def test_near_uniform_dip_is_discarded(self):
        theta = [0.2499, 0.2501, 0.25, 0.25]
        levels = assign_levels(theta, 2)
        assert levels == (frozenset({1}), frozenset({2, 3}))

    def test_all_below_uniform_warns_empty(self, caplog):
        # only representable through the sum tolerance: every entry < 1/K
        import logging

        theta = [0.2499999] * 4
        with caplog.at_level(logging.WARNING):
            levels = assign_levels(theta, 2)
        assert levels == (frozenset(), frozenset())
        assert any("below uniform" in r.message for r in caplog.records)

    def test_properties_random(self):
        rng = np.random.default_rng(23)
        for _ in range(300)        :
            K = int(rng.integers(1, 12))
            L = int(rng.integers(1, 5))
            raw = rng.random(K) + 1e-9
            theta = raw / raw.sum()
            levels = assign_levels(theta, L)
            assert len(levels) == L
            flat = [t for lv in levels for t in lv]
            assert len(flat) == len(set(flat))  # pairwise disjoint
            survivors = {k for k in range(K) if theta[k] >= 1.0 / K}
            assert set(flat) == survivors
            # ordering: every value in level i >= every value in level i+1
            for i in range(L - 1):
                if levels[i] and levels[i + 1]:
                    assert min(theta[t] for t in levels[i]) >= max(theta[t] for t in levels[i + 1])

    def test_rejects_bad_theta(self):
        with pytest.raises(ValueError):
            assign_levels([0.5, 0.4], 2)  # sums to 0.9
        with pytest.raises(ValueError):
            assign_levels([0.5, 0.5], 0)


class TestBuildHash:
    def test_direct_substitution(self):
        labels = label_set({0: {"s1", "s2"}, 1: {"s2", "s3"}, 2: set(), 3: set()})
        h = build_hash("d1", [0.5, 0.3, 0.15, 0.05], labels, 3)
        assert h.levels == (frozenset({"s1", "s2"}), frozenset({"s2", "s3"}), frozenset())

    def test_empty_label_topic_gives_empty_level(self):
        labels = label_set({0: {"s1"}, 1: set(), 2: set(), 3: set()})
        h = build_hash("d1", [0.5, 0.3, 0.15, 0.05], labels, 3)
        assert h.levels[1] == frozenset()

    def test_category_scheme_singleton_unions(self):
        labels = label_set({0: {"c1"}, 1: {"c2"}, 2: {"c3"}, 3: {"c4"}}, scheme="category")
        h = build_hash("d1", [0.3, 0.3, 0.2, 0.2], labels, 3)
        assert h.levels == (frozenset({"c1", "c2"}), frozenset(), frozenset())

    def test_label_model_mismatch(self):
        labels = label_set({0: {"s1"}})
        with pytest.raises(DataError):
            build_hash("d1", [0.5, 0.5], labels, 3)

    def test_matches_brute_force_recomputation(self):
        rng = np.random.default_rng(31)
        for _ in range(100):
            K = int(rng.integers(1, 10))
            L = int(rng.integers(1, 5))
            raw = rng.random(K) + 1e-9
            theta = raw / raw.sum()
            labels = label_set({
                k: {f"s{rng.integers(0, 12)}" for _ in range(rng.integers(0, 4))}
                for k in range(K)
            })
            h = build_hash("d", theta, labels, L)
            levels = assign_levels(theta, L)
            for i in range(L):
                expected = set()
                for t in levels[i]:
                    expected |= labels.labels[t]
                assert h.levels[i] == expected


class TestSimilarity:
    def test_identical_hashes_score_nonempty_level_count(self):
        h = hx("d", {"a", "b", "c"}, {"d", "e", "f"}, set())
        assert similarity(h, h) == 2.0

    def test_hand_computed_half_plus_half(self):
        h1 = hx("d1", {"a", "b"}, {"c"})
        h2 = hx("d2", {"a"}, {"c", "d"})
        assert similarity(h1, h2) == 1.0

    def test_disjoint_labels_zero(self):
        h1 = hx("d1", {"a"}, {"b"})
        h2 = hx("d2", {"x"}, {"y"})
        assert similarity(h1, h2) == 0.0

    def test_mismatched_levels_error(self):
        with pytest.raises(DataError):
            similarity(hx("a", {"x"}), hx("b", {"x"}, {"y"}))

    def test_distance_complement(self):
        h1 = hx("d1", {"a", "b"}, {"c"})
        h2 = hx("d2", {"a"}, {"c", "d"})
        assert distance(h1, h2) == h1.L - similarity(h1, h2)

    def test_invariants_random(self):
        rng = np.random.default_rng(41)
        labels = [f"s{i}" for i in range(10)]
        for _ in range(500):
            L = int(rng.integers(1, 4))
            def rand_hash(name):
                return hx(name, *[
                    {labels[j] for j in rng.integers(0, 10, size=rng.integers(0, 5))}
                    for _ in range(L)
                ])
            h1, h2 = rand_hash("h1"), rand_hash("h2")
            s = similarity(h1, h2)
            assert similarity(h2, h1) == s
            assert 0.0 <= s <= L
            assert similarity(h1, h1) == sum(1 for lv in h1.levels if lv)
            # same-level insertion into both hashes never decreases similarity
            i = int(rng.integers(0, L))
            new = f"s{rng.integers(0, 10)}"
            g1 = hx("g1", *[set(lv) | ({new} if j == i else set()) for j, lv in enumerate(h1.levels)])
            g2 = hx("g2", *[set(lv) | ({new} if j == i else set()) for j, lv in enumerate(h2.levels)])
            assert similarity(g1, g2) >= s - 1e-12


class TestHashIO:
    def test_round_trip(self, tmp_path):
        hashes = [
            hx("d1", {"a", "b"}, set(), {"c"}),
            hx("d2", set(), set(), set()),
        ]
        path = tmp_path / "h.jsonl"
        save_hashes(hashes, path)
        assert load_hashes(path) == hashes

    def test_malformed_line_names_position(self, tmp_path):
        path = tmp_path / "h.jsonl"
        path.write_text('{"doc_id":"d1","levels":[["a"]]}\n{broken\n', encoding="utf-8")
        with pytest.raises(DataError, match=":2"):
            load_hashes(path)
