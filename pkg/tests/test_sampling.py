import pytest

from policylabel.sampling import (
    LabeledPair,
    PairOrigin,
    SamplingConfig,
    SamplingExhaustionWarning,
    build_training_set,
    positives_from,
    read_training_set,
    sample_cluster_negatives,
    sample_random_negatives,
    sample_training_set,
    write_training_set,
)

from conftest import make_corpus


def texts(n, prefix):
    return [f"{prefix} excerpt number {i} with a few extra words" for i in range(n)]


class TestPositives:
    def test_positives_carry_titles_and_texts(self):
        corpus = make_corpus({"a": texts(2, "a"), "b": texts(2, "b")})
        positives = positives_from(corpus.annotations.for_case("a"), corpus)
        assert len(positives) == 2
        assert all(p.label == 1 and p.origin is PairOrigin.POSITIVE for p in positives)
        assert all(p.case_title == "practice a described" for p in positives)
        assert all(p.excerpt_text.startswith("a excerpt") for p in positives)


class TestRandomSampling:
    def test_count_contract(self):
        corpus = make_corpus({c: texts(10, c) for c in "abcde"})
        partition = corpus.annotations.for_case("a")
        negatives = sample_random_negatives(partition, corpus, ratio=3, seed=0)
        assert len(negatives) == 30
        assert all(p.label == 0 for p in negatives)
        assert all(p.origin is PairOrigin.RANDOM_NEGATIVE for p in negatives)

    def test_two_case_forced_outcome(self):
        corpus = make_corpus({"a": ["only a text"], "b": ["only b text"]})
        negatives = sample_random_negatives(
            list(corpus.annotations), corpus, ratio=1, seed=0
        )
        keys = {(n.case_id, n.excerpt_text) for n in negatives}
        assert keys == {("a", "only b text"), ("b", "only a text")}

    def test_single_case_exhaustion(self):
        corpus = make_corpus({"a": texts(3, "a")})
        with pytest.warns(SamplingExhaustionWarning):
            negatives = sample_random_negatives(
                list(corpus.annotations), corpus, ratio=1, seed=0
            )
        assert negatives == []

    def test_no_collision_with_any_approved_pair(self):
        # the same excerpt text+service annotated to two cases: it must never
        # appear as a negative for either of them
        corpus = make_corpus({"a": texts(4, "x"), "b": texts(4, "y")})
        shared = corpus.annotations.excerpt_ids_by_case()
        approved = corpus.annotations.approved_pair_keys()
        negatives = sample_random_negatives(
            corpus.annotations.for_case("a"), corpus, ratio=3, seed=1
        )
        assert all((n.case_id, n.excerpt_id) not in approved for n in negatives)
        del shared

    def test_deterministic_per_seed(self):
        corpus = make_corpus({c: texts(6, c) for c in "abcd"})
        partition = list(corpus.annotations)
        a = sample_random_negatives(partition, corpus, ratio=2, seed=5)
        b = sample_random_negatives(partition, corpus, ratio=2, seed=5)
        c = sample_random_negatives(partition, corpus, ratio=2, seed=6)
        assert [p.key for p in a] == [p.key for p in b]
        assert [p.key for p in a] != [p.key for p in c]

    def test_unique_keys(self):
        corpus = make_corpus({c: texts(8, c) for c in "abc"})
        negatives = sample_random_negatives(
            list(corpus.annotations), corpus, ratio=2, seed=3
        )
        keys = [n.key for n in negatives]
        assert len(keys) == len(set(keys))


class TestClusterSampling:
    def test_sibling_first_then_topup(self):
        # c1 has 4 positives, its only sibling c2 has 1 excerpt: that excerpt
        # must be used before any out-of-cluster negative, plus 3 top-ups
        corpus = make_corpus(
            {
                "c1": texts(4, "one"),
                "c2": ["sibling excerpt lives here"],
                "d": texts(6, "outside"),
            },
            clusters=[["c1", "c2"]],
        )
        negatives = sample_cluster_negatives(
            corpus.annotations.for_case("c1"), corpus, corpus.clusters, ratio=1, seed=0
        )
        c1_negatives = [n for n in negatives if n.case_id == "c1"]
        assert len(c1_negatives) == 4
        within = [n for n in c1_negatives if n.origin is PairOrigin.WITHIN_CLUSTER_NEGATIVE]
        assert [n.excerpt_text for n in within] == ["sibling excerpt lives here"]
        topups = [n for n in c1_negatives if n.origin is PairOrigin.RANDOM_NEGATIVE]
        assert len(topups) == 3
        assert all(n.excerpt_text.startswith("outside") for n in topups)

    def test_standalone_case_matches_rs(self):
        corpus = make_corpus(
            {"s": texts(3, "solo"), "x": texts(5, "x"), "y": texts(5, "y")},
            clusters=[["x", "y"]],
        )
        partition = corpus.annotations.for_case("s")
        cbs = sample_cluster_negatives(partition, corpus, corpus.clusters, 2, seed=9)
        rs = sample_random_negatives(partition, corpus, 2, seed=9)
        assert [p.key for p in cbs] == [p.key for p in rs]

    def test_all_within_when_siblings_sufficient(self):
        corpus = make_corpus(
            {"c1": ["single positive text"], "c2": texts(10, "sib"), "z": texts(5, "z")},
            clusters=[["c1", "c2"]],
        )
        negatives = sample_cluster_negatives(
            corpus.annotations.for_case("c1"), corpus, corpus.clusters, ratio=3, seed=4
        )
        assert len(negatives) == 3
        assert all(n.origin is PairOrigin.WITHIN_CLUSTER_NEGATIVE for n in negatives)

    def test_within_cluster_dominance(self):
        # whenever a sibling excerpt is unused, no out-of-cluster negative exists
        corpus = make_corpus(
            {
                "c1": texts(3, "one"),
                "c2": texts(4, "two"),
                "c3": texts(2, "three"),
                "d": texts(6, "out"),
            },
            clusters=[["c1", "c2", "c3"]],
        )
        for seed in range(20):
            for ratio in (1, 2, 3):
                negatives = sample_cluster_negatives(
                    list(corpus.annotations), corpus, corpus.clusters, ratio, seed
                )
                for case_id in ("c1", "c2", "c3"):
                    mine = [n for n in negatives if n.case_id == case_id]
                    sibling_pool = {
                        eid
                        for sib in corpus.clusters.siblings_of(case_id)
                        for eid in corpus.annotations.excerpt_ids_by_case()[sib]
                    }
                    used = {n.excerpt_id for n in mine}
                    has_out = any(
                        n.origin is PairOrigin.RANDOM_NEGATIVE for n in mine
                    )
                    if has_out:
                        assert sibling_pool <= used

    def test_rs_equals_cbs_without_clusters(self):
        corpus = make_corpus({c: texts(5, c) for c in "abcde"}, clusters=[])
        partition = list(corpus.annotations)
        for seed in range(10):
            rs = sample_random_negatives(partition, corpus, 2, seed)
            cbs = sample_cluster_negatives(partition, corpus, corpus.clusters, 2, seed)
            assert [p.key for p in rs] == [p.key for p in cbs]


class TestBuildTrainingSet:
    def _pairs(self, n, label, origin, case="a"):
        return [
            LabeledPair(case, "title text", f"e{label}{i}", f"text {label} {i}", label, origin)
            for i in range(n)
        ]

    def test_counts(self):
        positives = self._pairs(10, 1, PairOrigin.POSITIVE)
        negatives = self._pairs(30, 0, PairOrigin.RANDOM_NEGATIVE)
        ts = build_training_set(positives, negatives, seed=0)
        assert len(ts) == 40
        assert ts.counts["positive"] == 10
        assert ts.counts["random_negative"] == 30

    def test_overlap_rejected(self):
        positives = self._pairs(2, 1, PairOrigin.POSITIVE)
        bad = LabeledPair("a", "title text", "e10", "text", 0, PairOrigin.RANDOM_NEGATIVE)
        with pytest.raises(ValueError, match="overlap"):
            build_training_set(positives, [bad])

    def test_shuffle_deterministic(self):
        positives = self._pairs(5, 1, PairOrigin.POSITIVE)
        negatives = self._pairs(5, 0, PairOrigin.RANDOM_NEGATIVE)
        a = build_training_set(positives, negatives, seed=3)
        b = build_training_set(list(reversed(positives)), negatives, seed=3)
        assert [p.key for p in a.pairs] == [p.key for p in b.pairs]

    def test_label_origin_consistency_enforced(self):
        with pytest.raises(ValueError, match="origin"):
            LabeledPair("a", "t", "e", "x", 1, PairOrigin.RANDOM_NEGATIVE)


class TestEndToEnd:
    def test_negative_quota_invariant(self):
        corpus = make_corpus(
            {c: texts(4, c) for c in "abcdef"},
            clusters=[["a", "b"], ["c", "d"]],
        )
        for strategy in ("rs", "cbs"):
            for ratio in (1, 2, 3):
                config = SamplingConfig(strategy=strategy, ratio=ratio, seed=1)
                ts = sample_training_set(list(corpus.annotations), corpus, config)
                n_pos = ts.counts["positive"]
                n_neg = len(ts) - n_pos
                assert n_neg <= ratio * n_pos

    def test_no_negative_is_an_approved_pair(self):
        corpus = make_corpus(
            {c: texts(5, c) for c in "abcd"}, clusters=[["a", "b"]]
        )
        approved = corpus.annotations.approved_pair_keys()
        for strategy in ("rs", "cbs"):
            config = SamplingConfig(strategy=strategy, ratio=3, seed=2)
            ts = sample_training_set(list(corpus.annotations), corpus, config)
            for pair in ts.pairs:
                if pair.label == 0:
                    assert (pair.case_id, pair.excerpt_id) not in approved

    def test_jsonl_round_trip(self, tmp_path):
        corpus = make_corpus({c: texts(4, c) for c in "ab"})
        config = SamplingConfig(strategy="rs", ratio=1, seed=0)
        ts = sample_training_set(list(corpus.annotations), corpus, config)
        path = tmp_path / "training_set.jsonl"
        manifest_path = write_training_set(ts, path)
        reloaded = read_training_set(path)
        assert [(p.case_id, p.excerpt_text, p.label) for p in reloaded] == [
            (p.case_id, p.excerpt_text, p.label) for p in ts.pairs
        ]
        assert manifest_path.exists()

    def test_ratio_validation(self):
        with pytest.raises(ValueError, match="ratio"):
            SamplingConfig(strategy="rs", ratio=0, seed=0)
        with pytest.raises(ValueError, match="strategy"):
            SamplingConfig(strategy="nearest", ratio=1, seed=0)
