"""Ensemble training: bagging, forests, AdaBoost (SAMME / R2), gradient boosting.

Bagging-style committees train members independently on bootstrap resamples;
boosting is sequential, reweighting rows (SAMME), resampling by weight (R2),
or fitting residuals (gradient boosting). All randomness flows from derived
seeds, so training is reproducible bit for bit.
"""

from __future__ import annotations

import math
import warnings
from typing import Optional, Sequence

import numpy as np

from elbt.learners.config import (
    CLASSIFICATION,
    REGRESSION,
    Dataset,
    DecisionTreeParams,
    EnsembleSpec,
    LinearRegressionParams,
    LogisticRegressionParams,
)
from elbt.learners.linear import fit_linear, fit_logistic
from elbt.learners.tree import fit_tree
from elbt.rng import derive_seed

_EPS = 1e-12


class Ensemble:
    """Trained committee combined by weighted vote (classification) or mean."""

    def __init__(
        self,
        task: str,
        members: list,
        weights: np.ndarray,
        labels: tuple[str, ...],
        bootstrap_indices: Optional[tuple[tuple[int, ...], ...]] = None,
        sample_weight_history: Optional[tuple[np.ndarray, ...]] = None,
    ):
        self.task = task
        self.members = members
        self.member_weights = np.asarray(weights, dtype=np.float64)
        self.labels = labels
        self.bootstrap_indices = bootstrap_indices
        # Boosting only: the sample-weight vector after each reweighting round.
        self.sample_weight_history = sample_weight_history
        if len(self.members) != len(self.member_weights):
            raise ValueError("one weight per member required")
        if (self.member_weights < 0).any():
            raise ValueError("member weights must be nonnegative")

    @property
    def n_members(self) -> int:
        return len(self.members)

    def member_predictions(self, x: Sequence[float]) -> list:
        """One prediction per member, in stable member order."""
        return [member.predict_one(x) for member in self.members]

    def predict_one(self, x: Sequence[float]):
        preds = self.member_predictions(x)
        weights = self.member_weights
        if float(weights.sum()) <= 0:
            # Degenerate committee (every boosting stage rejected): fall back
            # to an unweighted combination so prediction stays usable.
            weights = np.ones(len(preds))
        if self.task == REGRESSION:
            return float(np.dot(weights, preds) / weights.sum())
        totals: dict[str, float] = {}
        for pred, weight in zip(preds, weights):
            totals[pred] = totals.get(pred, 0.0) + float(weight)
        best_label, best_total = None, -math.inf
        for label in sorted(totals):
            if totals[label] > best_total:
                best_label, best_total = label, totals[label]
        return best_label


class GradientBoostingModel:
    """Additive staged model with a configurable committee view.

    Regression members are either each stage's additive contribution
    ('stage_trees') or the partial-sum predictors F_1..F_n ('staged_prefix');
    classification members are the staged argmax labels. The combined
    prediction is always the fully-boosted final stage.
    """

    def __init__(self, task, labels, init, stage_trees, learning_rate, n_features, committee):
        self.task = task
        self.labels = labels
        self._init = init  # float (regression) or (K,) array (classification)
        self._stage_trees = stage_trees  # [tree] or [[tree per class] per stage]
        self.learning_rate = learning_rate
        self.n_features = n_features
        self.committee = committee

    @property
    def n_members(self) -> int:
        return len(self._stage_trees)

    def _check(self, x) -> None:
        if len(x) != self.n_features:
            raise ValueError(f"expected {self.n_features} features, got {len(x)}")

    def staged_scores(self, x: Sequence[float]) -> list:
        """Raw additive score after each stage."""
        self._check(x)
        out = []
        if self.task == REGRESSION:
            acc = self._init
            for tree in self._stage_trees:
                acc = acc + self.learning_rate * tree.predict_one(x)
                out.append(float(acc))
        else:
            acc = self._init.copy()
            for trees in self._stage_trees:
                for c, tree in enumerate(trees):
                    acc[c] += self.learning_rate * tree.predict_one(x)
                out.append(acc.copy())
        return out

    def member_predictions(self, x: Sequence[float]) -> list:
        if self.task == REGRESSION and self.committee == "stage_trees":
            self._check(x)
            return [
                float(self.learning_rate * tree.predict_one(x)) for tree in self._stage_trees
            ]
        scores = self.staged_scores(x)
        if self.task == REGRESSION:
            return scores
        return [self.labels[int(np.argmax(s))] for s in scores]

    def predict_one(self, x: Sequence[float]):
        final = self.staged_scores(x)[-1]
        if self.task == REGRESSION:
            return final
        return self.labels[int(np.argmax(final))]


# ---------------------------------------------------------------------------
# Training


def _normalized(w: Optional[np.ndarray], n: int) -> np.ndarray:
    if w is None:
        return np.full(n, 1.0 / n)
    w = np.asarray(w, dtype=np.float64)
    total = w.sum()
    if total <= 0:
        raise ValueError("sample weights must have positive total")
    return w / total


def _fit_base(kind, X, y, w, labels, task, seed):
    if isinstance(kind, DecisionTreeParams):
        return fit_tree(
            X, y, task=task, labels=labels, sample_weight=w, max_depth=kind.max_depth
        )
    if isinstance(kind, LogisticRegressionParams):
        return fit_logistic(X, y, labels, kind, sample_weight=w)
    if isinstance(kind, LinearRegressionParams):
        return fit_linear(X, y, sample_weight=w)
    if isinstance(kind, EnsembleSpec):
        return _train_encoded(kind, X, y, w, labels, seed)
    raise TypeError(f"unknown base learner kind {kind!r}")


def _bootstrap_committee(spec: EnsembleSpec, X, y, w, labels, seed) -> Ensemble:
    n, n_features = X.shape
    members = []
    indices = []
    for m in range(spec.n_members):
        rng = np.random.default_rng(derive_seed(seed, "member", m))
        idx = rng.integers(0, n, size=n)
        indices.append(tuple(int(i) for i in idx))
        x_m, y_m = X[idx], y[idx]
        w_m = None if w is None else w[idx]
        if spec.method == "bagging":
            member = _fit_base(
                spec.resolved_base(), x_m, y_m, w_m, labels, spec.task, derive_seed(seed, "base", m)
            )
        else:
            tree_params = spec.resolved_base()
            if spec.method == "random_forest":
                subset = spec.feature_subset or math.ceil(math.sqrt(n_features))
                member = fit_tree(
                    x_m,
                    y_m,
                    task=spec.task,
                    labels=labels,
                    sample_weight=w_m,
                    max_depth=tree_params.max_depth,
                    feature_subset=subset,
                    rng=rng,
                )
            else:  # extra_trees
                member = fit_tree(
                    x_m,
                    y_m,
                    task=spec.task,
                    labels=labels,
                    sample_weight=w_m,
                    max_depth=tree_params.max_depth,
                    random_thresholds=True,
                    rng=rng,
                )
        members.append(member)
    return Ensemble(
        spec.task, members, np.ones(len(members)), labels, bootstrap_indices=tuple(indices)
    )


def _fit_samme(spec: EnsembleSpec, X, y, w, labels, seed) -> Ensemble:
    """Discrete multiclass AdaBoost.

    A stage with weighted error 0 ends boosting with full weight (nothing
    left to reweight); a stage at or past the worse-than-random bound
    1 - 1/K gets weight 0 and ends boosting (reweighting cannot recover
    with a deterministic base).
    """
    n = len(y)
    k = len(labels)
    w = _normalized(w, n)
    index_of = {label: i for i, label in enumerate(labels)}
    members: list = []
    alphas: list[float] = []
    history: list[np.ndarray] = []
    base = spec.resolved_base()
    for m in range(spec.n_members):
        model = _fit_base(base, X, y, w, labels, spec.task, derive_seed(seed, "stage", m))
        pred = np.array([index_of[model.predict_one(row)] for row in X], dtype=np.intp)
        miss = pred != y
        eps = float(w[miss].sum())
        if eps <= _EPS:
            members.append(model)
            alphas.append(1.0)
            break
        if eps >= 1.0 - 1.0 / k:
            members.append(model)
            alphas.append(0.0)
            break
        alpha = math.log((1.0 - eps) / eps) + math.log(k - 1)
        members.append(model)
        alphas.append(alpha)
        w = w * np.exp(alpha * miss)
        w = w / w.sum()
        history.append(w.copy())
    return Ensemble(
        spec.task, members, np.array(alphas), labels, sample_weight_history=tuple(history)
    )


def _fit_adaboost_r2(spec: EnsembleSpec, X, y, w, labels, seed) -> Ensemble:
    """AdaBoost.R2 with linear loss; members fit weighted bootstrap resamples."""
    n = len(y)
    w = _normalized(w, n)
    members: list = []
    alphas: list[float] = []
    history: list[np.ndarray] = []
    base = spec.resolved_base()
    for m in range(spec.n_members):
        rng = np.random.default_rng(derive_seed(seed, "resample", m))
        idx = rng.choice(n, size=n, replace=True, p=w)
        model = _fit_base(
            base, X[idx], y[idx], None, labels, spec.task, derive_seed(seed, "stage", m)
        )
        pred = np.array([model.predict_one(row) for row in X], dtype=np.float64)
        err = np.abs(pred - y)
        max_err = float(err.max())
        if max_err <= _EPS:
            members.append(model)
            alphas.append(1.0)
            break
        loss = err / max_err
        avg_loss = float(np.dot(w, loss))
        if avg_loss >= 0.5:
            members.append(model)
            alphas.append(0.0)
            break
        beta = avg_loss / (1.0 - avg_loss)
        members.append(model)
        alphas.append(math.log(1.0 / beta))
        w = w * beta ** (1.0 - loss)
        w = w / w.sum()
        history.append(w.copy())
    return Ensemble(
        spec.task, members, np.array(alphas), labels, sample_weight_history=tuple(history)
    )


def _fit_gb(spec: EnsembleSpec, X, y, labels, seed) -> GradientBoostingModel:
    """Squared-loss gradient boosting on depth-limited regression trees.

    Classification runs one-vs-rest on per-class indicators with argmax
    combination; each staged prefix is one committee opinion.
    """
    n, n_features = X.shape
    tree_params = spec.resolved_base()
    depth = tree_params.max_depth if tree_params.max_depth is not None else spec.gb_max_depth
    lr = spec.learning_rate
    if spec.task == REGRESSION:
        init = float(y.mean())
        current = np.full(n, init)
        trees = []
        for m in range(spec.n_members):
            residual = y - current
            tree = fit_tree(X, residual, task=REGRESSION, max_depth=depth)
            current = current + lr * tree.predict(X)
            trees.append(tree)
        return GradientBoostingModel(
            REGRESSION, (), init, trees, lr, n_features, spec.gb_committee
        )
    k = len(labels)
    onehot = np.zeros((n, k))
    onehot[np.arange(n), y] = 1.0
    init = onehot.mean(axis=0)
    current = np.tile(init, (n, 1))
    stages = []
    for m in range(spec.n_members):
        stage = []
        for c in range(k):
            residual = onehot[:, c] - current[:, c]
            tree = fit_tree(X, residual, task=REGRESSION, max_depth=depth)
            current[:, c] += lr * tree.predict(X)
            stage.append(tree)
        stages.append(stage)
    return GradientBoostingModel(
        CLASSIFICATION, labels, init, stages, lr, n_features, spec.gb_committee
    )


def _train_encoded(spec: EnsembleSpec, X, y, w, labels, seed):
    if spec.method in ("bagging", "random_forest", "extra_trees"):
        return _bootstrap_committee(spec, X, y, w, labels, seed)
    if spec.method == "adaboost":
        if spec.task == CLASSIFICATION:
            return _fit_samme(spec, X, y, w, labels, seed)
        return _fit_adaboost_r2(spec, X, y, w, labels, seed)
    if spec.method == "gradient_boosting":
        if w is not None:
            raise ValueError("gradient boosting does not take sample weights here")
        return _fit_gb(spec, X, y, labels, seed)
    raise ValueError(f"unknown ensemble method '{spec.method}'")


def train(spec: EnsembleSpec, data: Dataset, seed: int):
    """Fit an ensemble per its spec; deterministic for fixed (spec, data, seed)."""
    if spec.task != data.task:
        raise ValueError(f"ensemble task '{spec.task}' incompatible with data task '{data.task}'")
    X = data.features
    if data.task == CLASSIFICATION:
        index_of = {label: i for i, label in enumerate(data.labels)}
        y = np.array([index_of[t] for t in data.targets], dtype=np.intp)
        labels = data.labels
        degenerate = len(labels) == 1
    else:
        y = data.targets
        labels = ()
        degenerate = bool((y == y[0]).all())
    if degenerate:
        warnings.warn("all training targets identical; ensemble degenerates to a constant model")
    return _train_encoded(spec, X, y, None, labels, seed)
