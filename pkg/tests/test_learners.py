"""Base learners, ensemble training, and the combination-code matrix."""

import math
import warnings

import numpy as np
import pytest

from conftest import find_middle_reference, triangle_reference
from elbt.learners import (
    CLASSIFICATION,
    CLASSIFICATION_COMBOS,
    REGRESSION,
    REGRESSION_COMBOS,
    Dataset,
    DecisionTreeParams,
    Ensemble,
    EnsembleSpec,
    LinearRegressionParams,
    LogisticRegressionParams,
    combo_base_code,
    combo_family,
    fit_linear,
    fit_logistic,
    fit_tree,
    parse_combo,
    predict,
    predict_members,
    train,
)


def triangle_dataset(n=50, seed=0):
    rng = np.random.default_rng(seed)
    X = rng.integers(1, 201, size=(n, 3)).astype(float)
    y = np.array([triangle_reference(*map(int, row)) for row in X], dtype=object)
    return Dataset(X, y, CLASSIFICATION)

def middle_dataset(n=50, seed=0):
    rng = np.random.default_rng(seed)
    X = rng.integers(-100, 101, size=(n, 3)).astype(float)
    y = np.array([find_middle_reference(*map(int, row)) for row in X], dtype=float)
    return Dataset(X, y, REGRESSION)


class TestComboCodes:
    def test_all_codes_parse(self):
        for code in CLASSIFICATION_COMBOS:
            spec = parse_combo(code)
            assert spec.task == CLASSIFICATION
        for code in REGRESSION_COMBOS:
            spec = parse_combo(code)
            assert spec.task == REGRESSION

    def test_methods_and_bases(self):
        assert parse_combo("bc-dtc").method == "bagging"
        assert isinstance(parse_combo("bc-dtc").resolved_base(), DecisionTreeParams)
        assert isinstance(parse_combo("bc-lor").base, LogisticRegressionParams)
        assert isinstance(parse_combo("abr-lir").base, LinearRegressionParams)
        assert parse_combo("rfc").method == "random_forest"
        assert parse_combo("etr").method == "extra_trees"
        assert parse_combo("gbc").method == "gradient_boosting"
        assert parse_combo("abc-dtc").method == "adaboost"

    def test_nested_combos_use_inner_forest(self):
        for code in ("bc-rfc", "abc-rfc", "br-rfr", "abr-rfr"):
            base = parse_combo(code).base
            assert isinstance(base, EnsembleSpec)
            assert base.method == "random_forest"
            assert base.n_members == 5

    def test_family_taxonomy(self):
        bagging = [c for c in CLASSIFICATION_COMBOS if combo_family(c) == "Bagging"]
        boosting = [c for c in CLASSIFICATION_COMBOS if combo_family(c) == "Boosting"]
        assert len(bagging) == 5 and len(boosting) == 4
        with pytest.raises(ValueError):
            combo_family("xyz")

    def test_base_codes(self):
        assert combo_base_code("bc-lor") == "lor"
        assert combo_base_code("rfc") is None

    def test_unknown_code_rejected(self):
        with pytest.raises(ValueError):
            parse_combo("bc-xyz")


class TestSpecValidation:
    def test_forest_requires_tree_base(self):
        with pytest.raises(ValueError):
            EnsembleSpec("random_forest", CLASSIFICATION, base=LogisticRegressionParams())

    def test_too_few_members(self):
        with pytest.raises(ValueError):
            EnsembleSpec("bagging", CLASSIFICATION, n_members=1)

    def test_task_compat(self):
        with pytest.raises(ValueError):
            EnsembleSpec("bagging", REGRESSION, base=LogisticRegressionParams())
        with pytest.raises(ValueError):
            EnsembleSpec("bagging", CLASSIFICATION, base=LinearRegressionParams())
        inner = EnsembleSpec("random_forest", REGRESSION)
        with pytest.raises(ValueError):
            EnsembleSpec("bagging", CLASSIFICATION, base=inner)

    def test_train_task_mismatch(self):
        with pytest.raises(ValueError, match="incompatible"):
            train(parse_combo("bc-dtc"), middle_dataset(), seed=0)

    def test_bad_committee_mode(self):
        with pytest.raises(ValueError):
            EnsembleSpec("gradient_boosting", REGRESSION, gb_committee="nope")

    def test_dataset_shape_checks(self):
        with pytest.raises(ValueError):
            Dataset(np.zeros((3, 2)), np.zeros(2), REGRESSION)
        with pytest.raises(ValueError):
            Dataset(np.zeros((0, 2)), np.zeros(0), REGRESSION)


class TestDecisionTree:
    def test_memorizes_consistent_classification(self):
        data = triangle_dataset(50, seed=3)
        index = {l: i for i, l in enumerate(data.labels)}
        y = np.array([index[t] for t in data.targets])
        tree = fit_tree(data.features, y, task=CLASSIFICATION, labels=data.labels)
        assert all(
            tree.predict_one(row) == target for row, target in zip(data.features, data.targets)
        )

    def test_memorizes_consistent_regression(self):
        data = middle_dataset(40, seed=4)
        tree = fit_tree(data.features, data.targets, task=REGRESSION)
        preds = tree.predict(data.features)
        assert np.allclose(preds, data.targets)

    def test_max_depth_restricts(self):
        data = middle_dataset(60, seed=5)
        stump = fit_tree(data.features, data.targets, task=REGRESSION, max_depth=1)
        assert len(set(stump.predict(data.features))) <= 2

    def test_tie_break_prefers_lower_feature(self):
        # Feature 1 duplicates feature 0, so gains tie on every threshold.
        X = np.array([[0.0, 0.0], [1.0, 1.0], [2.0, 2.0], [3.0, 3.0]])
        y = np.array([0, 0, 1, 1])
        tree = fit_tree(X, y, task=CLASSIFICATION, labels=("a", "b"))
        assert tree._root.feature == 0
        assert tree._root.threshold == 1.5  # midpoint between 1 and 2

    def test_sample_weights_steer_leaf(self):
        X = np.array([[0.0], [0.0], [0.0]])
        y = np.array([0, 1, 1])
        heavy_zero = fit_tree(
            X, y, task=CLASSIFICATION, labels=("a", "b"), sample_weight=np.array([10.0, 1, 1])
        )
        assert heavy_zero.predict_one([0.0]) == "a"

    def test_weighted_regression_leaf_mean(self):
        X = np.array([[0.0], [0.0]])
        y = np.array([0.0, 10.0])
        tree = fit_tree(X, y, task=REGRESSION, sample_weight=np.array([3.0, 1.0]))
        assert math.isclose(tree.predict_one([0.0]), 2.5)

    def test_dimension_mismatch(self):
        data = middle_dataset(10)
        tree = fit_tree(data.features, data.targets, task=REGRESSION)
        with pytest.raises(ValueError):
            tree.predict_one([1.0, 2.0])


class TestLinearModels:
    def test_least_squares_recovers_plant(self):
        X = np.arange(1, 11, dtype=float).reshape(-1, 1)
        y = 2 * X[:, 0] + 1
        model = fit_linear(X, y)
        assert abs(model.coef[0] - 2.0) < 1e-9
        assert abs(model.intercept - 1.0) < 1e-9

    def test_weighted_least_squares(self):
        X = np.array([[0.0], [1.0], [2.0]])
        y = np.array([0.0, 1.0, 100.0])
        heavy_line = fit_linear(X, y, sample_weight=np.array([1.0, 1.0, 1e-9]))
        assert abs(heavy_line.coef[0] - 1.0) < 1e-3

    def test_logistic_separable(self):
        X = np.array([[v] for v in (-5.0, -4.0, -3.0, 3.0, 4.0, 5.0)])
        y = np.array([0, 0, 0, 1, 1, 1])
        model = fit_logistic(X, y, ("neg", "pos"), LogisticRegressionParams())
        assert [model.predict_one([v]) for v in (-4.0, 4.0)] == ["neg", "pos"]

    def test_logistic_constant_feature_stable(self):
        X = np.array([[1.0, -2.0], [1.0, 2.0]])
        y = np.array([0, 1])
        model = fit_logistic(X, y, ("a", "b"), LogisticRegressionParams())
        assert model.predict_one([1.0, 2.0]) == "b"


class TestBaggingCommittees:
    def test_bootstrap_cardinality_and_omission(self):
        rng = np.random.default_rng(0)
        X = rng.normal(size=(100, 3))
        y = (X[:, 0] > 0).astype(float)
        data = Dataset(X, y, REGRESSION)
        ensemble = train(parse_combo("br-dtr"), data, seed=1)
        assert all(len(idx) == 100 for idx in ensemble.bootstrap_indices)
        omissions = [100 - len(set(idx)) for idx in ensemble.bootstrap_indices]
        assert any(o >= 1 for o in omissions)

    def test_training_points_win_majority_vote(self):
        # Clearly separable labels: members that saw a point memorize it and
        # the others generalize the boundary.
        rng = np.random.default_rng(7)
        X = np.vstack([rng.normal(-5, 1, (10, 2)), rng.normal(5, 1, (10, 2))])
        y = np.array(["lo"] * 10 + ["hi"] * 10, dtype=object)
        data = Dataset(X, y, CLASSIFICATION)
        ensemble = train(parse_combo("bc-dtc"), data, seed=2)
        hits = 0
        for row, target in zip(X, y):
            members = predict_members(ensemble, row)
            if sum(1 for p in members if p == target) >= len(members) / 2:
                hits += 1
        assert hits == 20

    def test_member_count_and_stability(self):
        data = triangle_dataset(30, seed=9)
        ensemble = train(parse_combo("rfc"), data, seed=5)
        assert ensemble.n_members == 10
        x = data.features[0]
        assert predict_members(ensemble, x) == predict_members(ensemble, x)

    def test_extra_trees_trains_and_predicts(self):
        data = middle_dataset(30, seed=2)
        ensemble = train(parse_combo("etr"), data, seed=3)
        assert isinstance(predict(ensemble, data.features[0]), float)

    def test_nested_bagged_forest(self):
        data = triangle_dataset(25, seed=11)
        ensemble = train(parse_combo("bc-rfc"), data, seed=4)
        assert ensemble.n_members == 10
        assert all(isinstance(m, Ensemble) and m.n_members == 5 for m in ensemble.members)


class TestAdaBoost:
    def test_sample_weights_normalized_each_round(self):
        data = triangle_dataset(40, seed=1)
        ensemble = train(parse_combo("abc-lor"), data, seed=6)
        assert ensemble.sample_weight_history  # at least one reweighting happened
        for w in ensemble.sample_weight_history:
            assert (w >= 0).all()
            assert abs(float(w.sum()) - 1.0) <= 1e-9

    def test_perfect_first_member_degenerates(self):
        data = triangle_dataset(30, seed=2)
        ensemble = train(parse_combo("abc-dtc"), data, seed=0)
        assert ensemble.n_members == 1
        assert list(ensemble.member_weights) == [1.0]

    def test_half_error_gets_zero_weight(self):
        # Two identical rows with different labels: the tree leaf predicts the
        # lexicographically first label, so weighted error is exactly 0.5.
        X = np.array([[0.0], [0.0]])
        y = np.array(["a", "b"], dtype=object)
        ensemble = train(parse_combo("abc-dtc"), Dataset(X, y, CLASSIFICATION), seed=0)
        assert list(ensemble.member_weights) == [0.0]
        assert predict(ensemble, [0.0]) == "a"  # uniform fallback keeps it usable

    def test_r2_reweights_and_combines(self):
        data = middle_dataset(40, seed=8)
        ensemble = train(parse_combo("abr-lir"), data, seed=1)
        assert ensemble.n_members >= 1
        for w in ensemble.sample_weight_history:
            assert abs(float(w.sum()) - 1.0) <= 1e-9
        assert isinstance(predict(ensemble, data.features[0]), float)

    def test_r2_perfect_fit_stops_with_full_weight(self):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            X = np.array([[float(i)] for i in range(6)])
            y = np.zeros(6)
            ensemble = train(parse_combo("abr-dtr"), Dataset(X, y, REGRESSION), seed=0)
        assert list(ensemble.member_weights) == [1.0]


class TestGradientBoosting:
    def test_staged_member_count(self):
        data = middle_dataset(40, seed=3)
        model = train(parse_combo("gbr"), data, seed=0)
        assert model.n_members == 10
        assert len(predict_members(model, data.features[0])) == 10

    def test_training_loss_non_increasing(self):
        data = middle_dataset(60, seed=6)
        spec = EnsembleSpec(
            "gradient_boosting", REGRESSION, n_members=10, gb_committee="staged_prefix"
        )
        model = train(spec, data, seed=0)
        staged = np.array([model.staged_scores(row) for row in data.features])
        losses = [float(np.mean((staged[:, m] - data.targets) ** 2)) for m in range(10)]
        for earlier, later in zip(losses, losses[1:]):
            assert later <= earlier + 1e-9

    def test_beats_single_depth3_tree(self):
        # 50 stages at lr 0.1 vs one depth-3 tree on middle-labeled triples.
        data = middle_dataset(100, seed=12)
        spec = EnsembleSpec("gradient_boosting", REGRESSION, n_members=50, learning_rate=0.1)
        model = train(spec, data, seed=0)
        gb_mse = np.mean(
            [(predict(model, row) - t) ** 2 for row, t in zip(data.features, data.targets)]
        )
        tree = fit_tree(data.features, data.targets, task=REGRESSION, max_depth=3)
        tree_mse = np.mean((tree.predict(data.features) - data.targets) ** 2)
        assert gb_mse < tree_mse

    def test_classification_staged_labels(self):
        data = triangle_dataset(40, seed=5)
        model = train(parse_combo("gbc"), data, seed=0)
        members = predict_members(model, data.features[0])
        assert len(members) == 10
        assert all(m in data.labels for m in members)
        assert predict(model, data.features[0]) == members[-1]

    def test_committee_modes_differ_only_in_members(self):
        data = middle_dataset(30, seed=1)
        prefix = train(
            EnsembleSpec("gradient_boosting", REGRESSION, gb_committee="staged_prefix"),
            data,
            seed=0,
        )
        stages = train(
            EnsembleSpec("gradient_boosting", REGRESSION, gb_committee="stage_trees"),
            data,
            seed=0,
        )
        x = data.features[0]
        assert predict(prefix, x) == predict(stages, x)
        prefix_members = predict_members(prefix, x)
        stage_members = predict_members(stages, x)
        # Stage contributions telescope into the prefix predictions.
        acc = prefix_members[-1] - sum(stage_members)
        assert math.isclose(prefix_members[0], acc + stage_members[0], rel_tol=1e-9)


class TestCombinedPrediction:
    class _Const:
        def __init__(self, value):
            self._value = value

        def predict_one(self, x):
            return self._value

    def test_weighted_vote(self):
        ensemble = Ensemble(
            CLASSIFICATION,
            [self._Const("A"), self._Const("B")],
            np.array([0.6, 0.4]),
            ("A", "B"),
        )
        assert ensemble.predict_one([0.0]) == "A"

    def test_vote_tie_lexicographic(self):
        ensemble = Ensemble(
            CLASSIFICATION,
            [self._Const("B"), self._Const("A")],
            np.array([0.5, 0.5]),
            ("A", "B"),
        )
        assert ensemble.predict_one([0.0]) == "A"

    def test_uniform_mean(self):
        ensemble = Ensemble(
            REGRESSION,
            [self._Const(1.0), self._Const(2.0), self._Const(3.0)],
            np.ones(3),
            (),
        )
        assert ensemble.predict_one([0.0]) == 2.0

    def test_constant_members_agree(self):
        ensemble = Ensemble(
            CLASSIFICATION, [self._Const("x")] * 4, np.ones(4), ("x",)
        )
        assert set(ensemble.member_predictions([0.0])) == {"x"}


class TestDeterminismAndDegeneracy:
    @pytest.mark.parametrize("code", ["bc-dtc", "rfc", "etc", "abc-lor", "gbc"])
    def test_classification_deterministic(self, code):
        data = triangle_dataset(30, seed=7)
        a = train(parse_combo(code), data, seed=99)
        b = train(parse_combo(code), data, seed=99)
        grid = np.random.default_rng(0).integers(1, 201, size=(25, 3)).astype(float)
        assert [predict(a, r) for r in grid] == [predict(b, r) for r in grid]

    @pytest.mark.parametrize("code", ["br-dtr", "rfr", "etr", "abr-dtr", "gbr"])
    def test_regression_deterministic(self, code):
        data = middle_dataset(30, seed=7)
        a = train(parse_combo(code), data, seed=99)
        b = train(parse_combo(code), data, seed=99)
        grid = np.random.default_rng(0).integers(-100, 101, size=(25, 3)).astype(float)
        assert [predict(a, r) for r in grid] == [predict(b, r) for r in grid]

    def test_seed_changes_bootstraps(self):
        data = triangle_dataset(30, seed=7)
        a = train(parse_combo("bc-dtc"), data, seed=1)
        b = train(parse_combo("bc-dtc"), data, seed=2)
        assert a.bootstrap_indices != b.bootstrap_indices

    def test_degenerate_data_warns_and_predicts_constant(self):
        X = np.arange(8, dtype=float).reshape(-1, 1)
        y = np.array(["same"] * 8, dtype=object)
        with pytest.warns(UserWarning, match="identical"):
            ensemble = train(parse_combo("bc-dtc"), Dataset(X, y, CLASSIFICATION), seed=0)
        assert predict(ensemble, [3.0]) == "same"
