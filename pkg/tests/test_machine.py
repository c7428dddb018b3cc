"""Core classifier behaviour: validation, feedback rules, voting, training."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tmfusion.machine import (ConfigurationError, DimensionError, HyperParams,
                              UnknownClassError, accuracy, batch_asd,
                              batch_class_sums, batch_classify, class_sum,
                              classify, clip_sum, decision_trace,
                              evaluate_clause, fit, new_classifier, train,
                              type_i_feedback, type_ii_feedback)


def make_params(**overrides) -> HyperParams:
    base = dict(clauses_per_class=4, threshold=2, specificity=3.9,
                ta_states=100, epochs=10, seed=0)
    base.update(overrides)
    return HyperParams(**base)


class TestHyperParams:
    def test_rejects_odd_clause_count(self):
        with pytest.raises(ConfigurationError):
            make_params(clauses_per_class=5)

    def test_rejects_specificity_at_or_below_one(self):
        with pytest.raises(ConfigurationError, match="exceed 1"):
            make_params(specificity=1.0)

    def test_rejects_nonpositive_threshold(self):
        with pytest.raises(ConfigurationError):
            make_params(threshold=0)

    def test_round_trips_through_dict(self):
        p = make_params(boost_true_positives=True, seed=42)
        assert HyperParams.from_dict(p.to_dict()) == p

    def test_fingerprint_changes_with_any_field(self):
        p = make_params()
        assert p.fingerprint() != make_params(seed=1).fingerprint()
        assert p.fingerprint() != make_params(threshold=3).fingerprint()


class TestClauseEvaluation:
    def test_fresh_clause_sits_at_the_decision_boundary(self):
        model = new_classifier(make_params(ta_states=100), 2, [0, 1],
                               np.random.default_rng(0))
        for states in model.states:
            assert set(np.unique(states)) <= {100, 101}

    def test_empty_clause_votes_in_training_but_not_inference(self):
        model = new_classifier(make_params(), 2, [0, 1],
                               np.random.default_rng(0))
        model.states[0][0, :] = model.params.ta_states  # exclude everything
        clause = model.clause(0, 0)
        x = np.array([1, 0], dtype=np.uint8)
        assert evaluate_clause(clause, x, mode="training") == 1
        assert evaluate_clause(clause, x, mode="inference") == 0

    def test_conjunction_over_included_literals(self):
        model = new_classifier(make_params(), 2, [0, 1],
                               np.random.default_rng(0))
        states = model.states[0]
        n = model.params.ta_states
        # include x0 and NOT x1 in clause 0
        states[0, :] = n
        states[0, 0] = n + 1
        states[0, 3] = n + 1
        clause = model.clause(0, 0)
        assert evaluate_clause(clause, np.array([1, 0], dtype=np.uint8)) == 1
        assert evaluate_clause(clause, np.array([1, 1], dtype=np.uint8)) == 0
        assert evaluate_clause(clause, np.array([0, 0], dtype=np.uint8)) == 0

    def test_wrong_width_raises(self):
        model = new_classifier(make_params(), 2, [0, 1],
                               np.random.default_rng(0))
        with pytest.raises(DimensionError):
            class_sum(model, 0, np.array([1, 0, 1], dtype=np.uint8))

    def test_unknown_class_raises(self):
        model = new_classifier(make_params(), 2, [0, 1],
                               np.random.default_rng(0))
        with pytest.raises(UnknownClassError):
            class_sum(model, "nope", np.array([1, 0], dtype=np.uint8))


class TestClipSum:
    @given(st.integers(-1000, 1000), st.integers(1, 50))
    def test_clip_bounds(self, v, t):
        c = clip_sum(v, t)
        assert -t <= c <= t
        if -t <= v <= t:
            assert c == v


def random_clause_states(rng, n_states, num_features):
    return rng.integers(1, 2 * n_states + 1, size=2 * num_features,
                        dtype=np.int32)


class TestFeedbackRules:
    N_TRIALS = 200

    def test_states_stay_in_bounds_under_random_feedback(self):
        rng = np.random.default_rng(7)
        n = 50
        for _ in range(self.N_TRIALS):
            model = new_classifier(make_params(ta_states=n), 3, [0, 1],
                                   np.random.default_rng(rng.integers(1000)))
            model.states[0][0] = random_clause_states(rng, n, 3)
            clause = model.clause(0, 0)
            x = rng.integers(0, 2, size=3).astype(np.uint8)
            if rng.random() < 0.5:
                clause = type_i_feedback(clause, x, 3.9, False, rng)
            else:
                clause = type_ii_feedback(clause, x)
            assert clause.ta_states.min() >= 1
            assert clause.ta_states.max() <= 2 * n

    def test_type_ii_never_touches_included_tas(self):
        # exhaustive over all inputs and all include/exclude splits for f=2
        n = 10
        for mask in range(16):
            for xbits in range(4):
                model = new_classifier(make_params(ta_states=n), 2, [0, 1],
                                       np.random.default_rng(0))
                states = np.where(
                    [(mask >> k) & 1 for k in range(4)], n + 3, n - 2
                ).astype(np.int32)
                model.states[0][0] = states
                clause = model.clause(0, 0)
                x = np.array([(xbits >> k) & 1 for k in range(2)],
                             dtype=np.uint8)
                after = type_ii_feedback(clause, x)
                included = states > n
                assert np.array_equal(after.ta_states[included],
                                      states[included])
                # excluded TAs move at most one step, and only upward
                delta = after.ta_states - states
                assert np.all(delta[~included] >= 0)
                assert np.all(delta <= 1)

    def test_type_i_on_firing_clause_reinforces_matching_literals(self):
        n = 10
        model = new_classifier(make_params(ta_states=n), 2, [0, 1],
                               np.random.default_rng(0))
        # clause includes x0; input has x0=1 so the clause fires
        states = np.array([n + 1, n, n, n], dtype=np.int32)
        model.states[0][0] = states
        clause = model.clause(0, 0)
        x = np.array([1, 0], dtype=np.uint8)
        after = type_i_feedback(clause, x, 3.9, boost=True,
                                rng=np.random.default_rng(0))
        # boost makes the matching-literal reward deterministic
        assert after.ta_states[0] == n + 2  # literal x0 is 1: strengthened
        assert after.ta_states[3] == n + 1  # literal NOT x1 is 1: strengthened

    def test_weight_grows_on_type_i_fire_and_shrinks_on_type_ii(self):
        n = 10
        model = new_classifier(make_params(ta_states=n), 2, [0, 1],
                               np.random.default_rng(0))
        model.states[0][0] = np.array([n + 1, n, n, n], dtype=np.int32)
        model.weights[0][0] = 5
        x = np.array([1, 0], dtype=np.uint8)
        after = type_i_feedback(model.clause(0, 0), x, 3.9, True,
                                np.random.default_rng(0))
        assert after.weight == 6
        model.weights[0][0] = 5
        after = type_ii_feedback(model.clause(0, 0), x)
        assert after.weight == 4

    def test_weight_never_drops_below_one(self):
        n = 10
        model = new_classifier(make_params(ta_states=n), 2, [0, 1],
                               np.random.default_rng(0))
        model.states[0][0] = np.array([n + 1, n, n, n], dtype=np.int32)
        model.weights[0][0] = 1
        x = np.array([1, 0], dtype=np.uint8)
        after = type_ii_feedback(model.clause(0, 0), x)
        assert after.weight == 1


class TestTraining:
    def test_xor_learnable(self, xor_data, small_params):
        model = train(small_params, xor_data)
        assert accuracy(model, xor_data) == 1.0

    def test_training_is_deterministic(self, xor_data, small_params):
        m1 = train(small_params, xor_data)
        m2 = train(small_params, xor_data)
        for a, b in zip(m1.states, m2.states):
            assert np.array_equal(a, b)
        for a, b in zip(m1.weights, m2.weights):
            assert np.array_equal(a, b)

    def test_zero_epochs_leaves_model_untrained(self, xor_data):
        model = train(make_params(epochs=0), xor_data)
        for w in model.weights:
            assert np.all(w == 1)

    def test_multiclass_argmax_with_low_index_tiebreak(self):
        model = new_classifier(make_params(), 2, ["a", "b", "c"],
                               np.random.default_rng(0))
        # untrained model: all sums equal, lowest class index wins
        assert classify(model, np.array([1, 0], dtype=np.uint8)) == "a"

    def test_fit_rejects_unknown_labels(self, small_params):
        from tmfusion.dataset import BinaryDataset
        model = new_classifier(small_params, 2, [0, 1],
                               np.random.default_rng(0))
        bad = BinaryDataset(["a", "b"],
                            np.array([[1, 0]], dtype=np.uint8), [7],
                            np.array([0], dtype=np.int64))
        with pytest.raises(UnknownClassError):
            fit(model, bad)


class TestBatchOps:
    def test_batch_matches_scalar_paths(self, xor_data, small_params):
        model = train(small_params, xor_data)
        sums = batch_class_sums(model, xor_data.X)
        preds = batch_classify(model, xor_data.X)
        asds = batch_asd(model, xor_data.X)
        for i, x in enumerate(xor_data.X):
            assert sums[i, 0] == class_sum(model, 0, x)
            assert sums[i, 1] == class_sum(model, 1, x)
            assert preds[i] == classify(model, x)
            tr = decision_trace(model, x)
            assert asds[i] == tr.asd


class TestDecisionTrace:
    def test_trace_fields_are_consistent(self, xor_data, small_params):
        model = train(small_params, xor_data)
        x = xor_data.X[1]
        tr = decision_trace(model, x)
        assert tr.predicted == classify(model, x)
        assert tr.asd == abs(class_sum(model, 0, x) - class_sum(model, 1, x))
        for label in (0, 1):
            assert 0 <= tr.positive_cnt[label] <= tr.clause_cnt[label]
            assert tr.clause_cnt[label] <= model.params.clauses_per_class


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_epsilon_zero_update_is_identity(seed):
    """When the vote sum already sits at the clipped target, the per-clause
    selection probability is 0 and nothing may change."""
    rng = np.random.default_rng(seed)
    params = make_params(ta_states=10, threshold=1)
    model = new_classifier(params, 2, [0, 1], np.random.default_rng(seed))
    n = params.ta_states
    x = rng.integers(0, 2, size=2).astype(np.uint8)
    lit = np.concatenate([x, 1 - x])
    # force one positive clause that fires on x (includes exactly the true
    # literals) with a large weight: v >= T
    model.states[0][0] = np.where(lit == 1, n + 1, n).astype(np.int32)
    model.weights[0][0] = 10
    before_states = model.states[0].copy()
    before_weights = model.weights[0].copy()
    from tmfusion.machine import _update_pool
    _update_pool(model.states[0], model.weights[0], lit, 1, params, rng)
    assert np.array_equal(model.states[0], before_states)
    assert np.array_equal(model.weights[0], before_weights)
