"""Description comparison, change detection, cuts, and compatibility stats."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tmfusion.dataset import BinaryDataset
from tmfusion.description import ClauseRecord, GlobalDescription
from tmfusion.fusion import (ComparisonError, clause_jaccard,
                             compatibility_report, description_overlap,
                             detect_change, localize_inconsistencies,
                             make_cuts, mean_asd)
from tmfusion.machine import ConfigurationError, HyperParams, train

literal_sets = st.frozensets(st.integers(0, 9), max_size=6)


class TestClauseJaccard:
    @given(literal_sets, literal_sets)
    def test_symmetric_and_bounded(self, a, b):
        j = clause_jaccard(a, b)
        assert 0.0 <= j <= 1.0
        assert j == clause_jaccard(b, a)

    @given(literal_sets)
    def test_self_similarity_is_one(self, a):
        assert clause_jaccard(a, a) == 1.0

    def test_both_empty_count_as_identical(self):
        assert clause_jaccard(frozenset(), frozenset()) == 1.0

    def test_disjoint_sets_score_zero(self):
        assert clause_jaccard(frozenset({1}), frozenset({2})) == 0.0


def desc(records, num_features=3, classes=(0, 1)) -> GlobalDescription:
    return GlobalDescription(num_features=num_features, classes=list(classes),
                             records=list(records), params_fingerprint="x",
                             feature_names=None)


def rec(cls, pol, lits, w=1) -> ClauseRecord:
    return ClauseRecord(class_label=cls, polarity=pol,
                        literals=tuple(sorted(lits)), weight=w)


class TestDescriptionOverlap:
    def test_identical_descriptions_score_one(self):
        g = desc([rec(0, 1, [0, 4]), rec(1, -1, [2])])
        assert description_overlap(g, g).overall == pytest.approx(1.0)

    def test_disjoint_descriptions_score_zero(self):
        g1 = desc([rec(0, 1, [0])])
        g2 = desc([rec(0, 1, [1])])
        assert description_overlap(g1, g2).overall == pytest.approx(0.0)

    def test_symmetric(self):
        g1 = desc([rec(0, 1, [0, 1]), rec(1, 1, [2, 3])])
        g2 = desc([rec(0, 1, [0, 2]), rec(1, 1, [2])])
        assert (description_overlap(g1, g2).overall
                == pytest.approx(description_overlap(g2, g1).overall))

    def test_matching_respects_class_and_polarity(self):
        # same literals but opposite polarity must not match
        g1 = desc([rec(0, 1, [0, 1])])
        g2 = desc([rec(0, -1, [0, 1])])
        assert description_overlap(g1, g2).overall == pytest.approx(0.0)

    def test_width_mismatch_raises(self):
        g1 = desc([rec(0, 1, [0])], num_features=3)
        g2 = desc([rec(0, 1, [0])], num_features=4)
        with pytest.raises(ComparisonError):
            description_overlap(g1, g2)

    def test_class_mismatch_raises(self):
        g1 = desc([rec(0, 1, [0])], classes=(0, 1))
        g2 = desc([rec(0, 1, [0])], classes=(0, 2))
        with pytest.raises(ComparisonError):
            description_overlap(g1, g2)

    def test_heavier_clauses_dominate_the_average(self):
        match = rec(0, 1, [0, 1], w=9)
        miss = rec(0, 1, [2], w=1)
        g1 = desc([match, miss])
        g2 = desc([rec(0, 1, [0, 1], w=1)])
        # the matching clause carries 90% of g1's weight
        assert description_overlap(g1, g2).overall > 0.8


class TestDetectChange:
    def test_no_change_on_identical_descriptions(self):
        g = desc([rec(0, 1, [0, 1]), rec(1, 1, [2])])
        report = detect_change(g, g, threshold=0.8)
        assert not report.changed
        assert report.new_literal_patterns == []
        assert report.vanished_patterns == []

    def test_new_pattern_triggers_change(self):
        g1 = desc([rec(0, 1, [0, 1])])
        g2 = desc([rec(0, 1, [0, 1]), rec(0, 1, [4, 5])])
        report = detect_change(g1, g2, threshold=0.1)
        assert report.changed
        assert any(r.literals == (4, 5) for r in report.new_literal_patterns)

    def test_vanished_pattern_is_reported(self):
        g1 = desc([rec(0, 1, [0, 1]), rec(0, 1, [4, 5])])
        g2 = desc([rec(0, 1, [0, 1])])
        report = detect_change(g1, g2, threshold=0.1)
        assert any(r.literals == (4, 5) for r in report.vanished_patterns)

    def test_threshold_bounds(self):
        g = desc([rec(0, 1, [0])])
        with pytest.raises(ConfigurationError):
            detect_change(g, g, threshold=0.0)
        with pytest.raises(ConfigurationError):
            detect_change(g, g, threshold=1.0)

    def test_weight_shift_reported_for_matched_pairs(self):
        g1 = desc([rec(0, 1, [0, 1], w=40)])
        g2 = desc([rec(0, 1, [0, 1], w=10)])
        report = detect_change(g1, g2, threshold=0.1, weight_ratio=2.0)
        assert len(report.weight_shifts) == 1


def tiny_dataset(n=60, seed=0) -> BinaryDataset:
    rng = np.random.default_rng(seed)
    X = rng.integers(0, 2, size=(n, 4)).astype(np.uint8)
    labels = [int(x[0]) for x in X]
    return BinaryDataset([f"f{i}" for i in range(4)], X, labels,
                         np.arange(n, dtype=np.int64))


class TestMakeCuts:
    def test_sizes_and_membership(self):
        d = tiny_dataset()
        cuts = make_cuts(d, 5, 0.5, np.random.default_rng(0))
        assert len(cuts) == 5
        for cut in cuts:
            assert len(cut.row_ids) == 30
            assert len(np.unique(cut.row_ids)) == 30
            assert set(cut.row_ids.tolist()) <= set(d.ids.tolist())

    def test_deterministic_under_seed(self):
        d = tiny_dataset()
        a = make_cuts(d, 5, 0.5, np.random.default_rng(7))
        b = make_cuts(d, 5, 0.5, np.random.default_rng(7))
        for ca, cb in zip(a, b):
            assert np.array_equal(ca.row_ids, cb.row_ids)

    def test_fraction_bounds(self):
        d = tiny_dataset()
        for bad in (0.0, 1.0, 1.5):
            with pytest.raises(ConfigurationError):
                make_cuts(d, 5, bad, np.random.default_rng(0))

    def test_needs_at_least_two_cuts(self):
        with pytest.raises(ConfigurationError):
            make_cuts(tiny_dataset(), 1, 0.5, np.random.default_rng(0))


class TestLocalize:
    PARAMS = HyperParams(clauses_per_class=4, threshold=5, specificity=3.9,
                         ta_states=50, epochs=3, seed=0)

    def test_report_shape(self):
        from tmfusion.description import global_description
        d = tiny_dataset(80)
        g = global_description(train(self.PARAMS, d))
        report = localize_inconsistencies(g, d, 4, 2, 0.5, self.PARAMS,
                                          np.random.default_rng(0))
        assert len(report.cuts) == 4
        assert len(report.removal_candidates) == 2
        deltas = [r.delta for r in report.removal_candidates]
        assert deltas == sorted(deltas, reverse=True)
        for r in report.removal_candidates:
            assert r.flagged == (r.delta > 0)

    def test_m_remove_cannot_exceed_n(self):
        from tmfusion.description import global_description
        d = tiny_dataset(80)
        g = global_description(train(self.PARAMS, d))
        with pytest.raises(ConfigurationError):
            localize_inconsistencies(g, d, 2, 3, 0.5, self.PARAMS,
                                     np.random.default_rng(0))


class TestCompatibility:
    def test_mean_asd_nonnegative(self):
        d = tiny_dataset(80)
        params = HyperParams(clauses_per_class=4, threshold=5,
                             specificity=3.9, ta_states=50, epochs=3, seed=0)
        model = train(params, d)
        assert mean_asd(model, d) >= 0.0

    def test_groups_cover_truth_pred_combinations(self):
        d = tiny_dataset(120)
        params = HyperParams(clauses_per_class=4, threshold=5,
                             specificity=3.9, ta_states=50, epochs=10, seed=0)
        model = train(params, d)
        groups = compatibility_report(model, d)
        seen = {(g.truth, g.predicted) for g in groups}
        assert len(seen) == len(groups)  # no duplicate groups
        total = sum(g.count for g in groups)
        assert total == len(d)

    def test_unseen_truth_labels_get_their_own_groups(self):
        d = tiny_dataset(100)
        params = HyperParams(clauses_per_class=4, threshold=5,
                             specificity=3.9, ta_states=50, epochs=10, seed=0)
        model = train(params, d)
        other = BinaryDataset(d.feature_names, d.X[:10], ["mystery"] * 10,
                              np.arange(1000, 1010, dtype=np.int64))
        groups = compatibility_report(model, d.concat(other))
        assert any(g.truth == "mystery" for g in groups)
