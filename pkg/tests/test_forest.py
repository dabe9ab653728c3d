import numpy as np
import pytest

from verisim.forest import ForestModel, RegressionTree, fit_forest, fit_rfr, predict_cpu_time
from verisim.stats import regression_metrics

KNOTS = np.asarray([1e4, 1e6, 3e6, 8e6])
LEVELS = np.asarray([0.01, 0.2, 0.25, 0.9])


def monotone_sample(n, seed, noise=True):
    rng = np.random.default_rng(seed)
    xs = rng.uniform(1e4, 8e6, n)
    ys = np.interp(xs, KNOTS, LEVELS)
    if noise:
        ys = ys + rng.normal(0, 0.05 * (LEVELS.max() - LEVELS.min()), n)
    return xs, ys


class TestFitRfr:
    def test_monotone_synthetic_r2(self):
        xs, ys = monotone_sample(2000, seed=1)
        model = fit_rfr(xs, ys, d_grid=[20, 50], s_grid=[8, 32], folds=10, seed=2)
        xt, yt = monotone_sample(1000, seed=3)
        assert regression_metrics(yt, model.predict(xt))["r2"] >= 0.8

    def test_constant_target(self):
        xs = np.linspace(1, 100, 50)
        model = fit_rfr(xs, np.full(50, 0.5), d_grid=[5], s_grid=[3], folds=5, seed=0)
        assert predict_cpu_time(model, 17.0) == pytest.approx(0.5)

    def test_leave_one_out_boundary(self):
        xs = np.linspace(1, 10, 10)
        ys = xs * 2.0
        model = fit_rfr(xs, ys, d_grid=[4], s_grid=[2], folds=10, seed=1)
        assert model.tree_count == 4

    def test_fewer_samples_than_folds(self):
        with pytest.raises(ValueError):
            fit_rfr([1.0, 2.0], [1.0, 2.0], d_grid=[2], s_grid=[1], folds=10, seed=0)

    def test_empty_grid(self):
        with pytest.raises(ValueError):
            fit_rfr([1.0] * 20, [1.0] * 20, d_grid=[], s_grid=[1], folds=2, seed=0)

    def test_deterministic(self):
        xs, ys = monotone_sample(300, seed=4)
        a = fit_rfr(xs, ys, d_grid=[5, 10], s_grid=[4], folds=5, seed=5)
        b = fit_rfr(xs, ys, d_grid=[5, 10], s_grid=[4], folds=5, seed=5)
        assert a.to_dict() == b.to_dict()

    def test_monotone_ordering_preserved(self):
        xs, ys = monotone_sample(2000, seed=6)
        model = fit_rfr(xs, ys, d_grid=[30], s_grid=[32], folds=5, seed=7)
        low, high = model.predict([1e5, 7e6])
        assert low < high


class TestPredict:
    def test_single_leaf(self):
        tree = RegressionTree(np.asarray([0.0]), np.asarray([-1]), np.asarray([-1]), np.asarray([0.2]))
        model = ForestModel(1, 1, [tree])
        assert predict_cpu_time(model, 123.0) == pytest.approx(0.2)
        assert predict_cpu_time(model, 1e9) == pytest.approx(0.2)

    def test_three_tree_mean(self):
        trees = [
            RegressionTree(np.asarray([0.0]), np.asarray([-1]), np.asarray([-1]), np.asarray([v]))
            for v in (0.1, 0.2, 0.3)
        ]
        model = ForestModel(3, 1, trees)
        assert predict_cpu_time(model, 1e6) == pytest.approx(0.2)

    def test_prediction_is_mean_of_trees(self):
        xs, ys = monotone_sample(500, seed=8)
        model = fit_forest(xs, ys, tree_count=7, split_budget=10, seed=9)
        for x in (2e4, 5e5, 2e6, 7.9e6):
            assert predict_cpu_time(model, x) == pytest.approx(model.predict_per_tree(x).mean(), rel=1e-12)

    def test_tree_order_permutation_invariant(self):
        xs, ys = monotone_sample(400, seed=10)
        model = fit_forest(xs, ys, tree_count=6, split_budget=8, seed=11)
        shuffled = ForestModel(model.tree_count, model.split_budget, list(reversed(model.trees)))
        grid = np.linspace(1e4, 8e6, 50)
        assert np.allclose(model.predict(grid), shuffled.predict(grid), rtol=1e-12)

    def test_bounded_by_leaf_range(self):
        xs, ys = monotone_sample(400, seed=12)
        model = fit_forest(xs, ys, tree_count=5, split_budget=12, seed=13)
        leaves = np.concatenate([t.values[t.left < 0] for t in model.trees])
        grid = np.linspace(1.0, 1e7, 200)
        preds = model.predict(grid)
        assert np.all(preds >= leaves.min() - 1e-12)
        assert np.all(preds <= leaves.max() + 1e-12)

    def test_nonpositive_input_rejected(self):
        tree = RegressionTree(np.asarray([0.0]), np.asarray([-1]), np.asarray([-1]), np.asarray([0.2]))
        with pytest.raises(ValueError):
            predict_cpu_time(ForestModel(1, 1, [tree]), 0.0)


class TestTreeStructure:
    def test_split_budget_respected(self):
        xs, ys = monotone_sample(600, seed=14)
        for budget in (1, 5, 17):
            model = fit_forest(xs, ys, tree_count=4, split_budget=budget, seed=15)
            assert all(t.split_count <= budget for t in model.trees)
            assert model.split_budget == budget

    def test_serialization_round_trip(self):
        xs, ys = monotone_sample(300, seed=16)
        model = fit_forest(xs, ys, tree_count=3, split_budget=6, seed=17)
        restored = ForestModel.from_dict(model.to_dict())
        grid = np.linspace(1e4, 8e6, 64)
        assert np.array_equal(model.predict(grid), restored.predict(grid))

    def test_step_function_consistent_with_walk(self):
        xs, ys = monotone_sample(500, seed=18)
        model = fit_forest(xs, ys, tree_count=1, split_budget=9, seed=19)
        tree = model.trees[0]
        for x in np.linspace(1e4, 8e6, 101):
            assert model.predict(x) == pytest.approx(tree.predict_one(x), rel=1e-12)
