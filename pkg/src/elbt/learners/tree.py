"""CART decision trees with sample weights, shared by every ensemble method.

Greedy axis-aligned splits: Gini impurity for classification, variance
reduction for regression, thresholds at midpoints between consecutive
distinct feature values. Ties break on the smallest (feature index,
threshold) pair. A node splits as long as any valid boundary exists, so an
unbounded tree drives consistent training data to zero error. The same
builder covers random-forest feature subsampling and extra-trees random
thresholds.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from elbt.learners.config import CLASSIFICATION, REGRESSION


@dataclass
class _Node:
    feature: int = -1
    threshold: float = 0.0
    left: Optional["_Node"] = None
    right: Optional["_Node"] = None
    value: object = None  # leaf payload: label index (clf) or float (reg)

    @property
    def is_leaf(self) -> bool:
        return self.left is None


class DecisionTreeModel:
    def __init__(self, root: _Node, task: str, labels: tuple[str, ...], n_features: int):
        self._root = root
        self.task = task
        self.labels = labels
        self.n_features = n_features

    def predict_one(self, x: Sequence[float]):
        if len(x) != self.n_features:
            raise ValueError(f"expected {self.n_features} features, got {len(x)}")
        node = self._root
        while not node.is_leaf:
            node = node.left if x[node.feature] <= node.threshold else node.right
        if self.task == CLASSIFICATION:
            return self.labels[node.value]
        return node.value

    def predict(self, X: np.ndarray):
        out = [self.predict_one(row) for row in np.asarray(X, dtype=np.float64)]
        if self.task == REGRESSION:
            return np.array(out, dtype=np.float64)
        return np.array(out, dtype=object)


def _class_counts(y: np.ndarray, w: np.ndarray, n_classes: int) -> np.ndarray:
    counts = np.zeros(n_classes)
    np.add.at(counts, y, w)
    return counts


def _gini(counts: np.ndarray, total: float) -> float:
    if total <= 0:
        return 0.0
    p = counts / total
    return 1.0 - float(np.dot(p, p))


def _best_midpoint_split(X, y, w, features, n_classes, task):
    """Best (gain, feature, threshold) over midpoint thresholds; None if no boundary."""
    n = len(y)
    total_w = float(w.sum())
    if task == CLASSIFICATION:
        parent_counts = _class_counts(y, w, n_classes)
        parent_impurity = _gini(parent_counts, total_w)
    else:
        wy = float(np.dot(w, y))
        wy2 = float(np.dot(w, y * y))
        mean = wy / total_w
        parent_impurity = wy2 / total_w - mean * mean
    best = None  # (gain, feature, threshold)
    for f in features:
        xs = X[:, f]
        order = np.argsort(xs, kind="stable")
        xv = xs[order]
        if xv[0] == xv[-1]:
            continue
        yv = y[order]
        wv = w[order]
        boundaries = np.nonzero(xv[:-1] != xv[1:])[0]
        w_left = np.cumsum(wv)[boundaries]
        w_right = total_w - w_left
        valid = (w_left > 0) & (w_right > 0)
        if not valid.any():
            continue
        if task == CLASSIFICATION:
            onehot = np.zeros((n, n_classes))
            onehot[np.arange(n), yv] = wv
            cum = np.cumsum(onehot, axis=0)
            left_counts = cum[boundaries]
            right_counts = cum[-1] - left_counts
            with np.errstate(divide="ignore", invalid="ignore"):
                gini_l = 1.0 - np.einsum("ij,ij->i", left_counts, left_counts) / (w_left * w_left)
                gini_r = 1.0 - np.einsum("ij,ij->i", right_counts, right_counts) / (
                    w_right * w_right
                )
            child = (w_left * gini_l + w_right * gini_r) / total_w
        else:
            cum_wy = np.cumsum(wv * yv)[boundaries]
            cum_wy2 = np.cumsum(wv * yv * yv)[boundaries]
            with np.errstate(divide="ignore", invalid="ignore"):
                var_l = cum_wy2 / w_left - (cum_wy / w_left) ** 2
                wy_r = wy - cum_wy
                wy2_r = wy2 - cum_wy2
                var_r = wy2_r / w_right - (wy_r / w_right) ** 2
            child = (w_left * var_l + w_right * var_r) / total_w
        gains = np.where(valid, parent_impurity - child, -np.inf)
        i = int(np.argmax(gains))
        if not np.isfinite(gains[i]):
            continue
        threshold = (xv[boundaries[i]] + xv[boundaries[i] + 1]) / 2.0
        if best is None or gains[i] > best[0]:
            best = (float(gains[i]), int(f), float(threshold))
    return best


def _best_random_split(X, y, w, features, n_classes, task, rng):
    """Extra-trees style: one uniform threshold per feature, best by impurity."""
    total_w = float(w.sum())
    if task == CLASSIFICATION:
        parent_counts = _class_counts(y, w, n_classes)
        parent_impurity = _gini(parent_counts, total_w)
    else:
        mean = float(np.dot(w, y)) / total_w
        parent_impurity = float(np.dot(w, y * y)) / total_w - mean * mean
    best = None
    for f in features:
        xs = X[:, f]
        lo = float(xs.min())
        hi = float(xs.max())
        if lo == hi:
            continue
        threshold = float(rng.uniform(lo, hi))
        mask = xs <= threshold
        w_left = float(w[mask].sum())
        w_right = total_w - w_left
        if w_left <= 0 or w_right <= 0 or not mask.any() or mask.all():
            continue
        if task == CLASSIFICATION:
            left_counts = _class_counts(y[mask], w[mask], n_classes)
            child = (
                w_left * _gini(left_counts, w_left)
                + w_right * _gini(parent_counts - left_counts, w_right)
            ) / total_w
        else:
            yl, wl = y[mask], w[mask]
            yr, wr = y[~mask], w[~mask]
            var_l = float(np.dot(wl, yl * yl)) / w_left - (float(np.dot(wl, yl)) / w_left) ** 2
            var_r = float(np.dot(wr, yr * yr)) / w_right - (float(np.dot(wr, yr)) / w_right) ** 2
            child = (w_left * var_l + w_right * var_r) / total_w
        gain = parent_impurity - child
        if best is None or gain > best[0]:
            best = (float(gain), int(f), threshold)
    return best


def fit_tree(
    X: np.ndarray,
    y: np.ndarray,
    *,
    task: str,
    labels: tuple[str, ...] = (),
    sample_weight: Optional[np.ndarray] = None,
    max_depth: Optional[int] = None,
    feature_subset: Optional[int] = None,
    random_thresholds: bool = False,
    rng: Optional[np.random.Generator] = None,
) -> DecisionTreeModel:
    """Fit a CART tree; y holds label indices (classification) or floats.

    `feature_subset` restricts each split to that many randomly drawn
    features (random forest); `random_thresholds` switches to extra-trees
    splitting. Both need `rng`.
    """
    X = np.asarray(X, dtype=np.float64)
    n, n_features = X.shape
    if task == CLASSIFICATION:
        y = np.asarray(y, dtype=np.intp)
        n_classes = len(labels)
    else:
        y = np.asarray(y, dtype=np.float64)
        n_classes = 0
    if sample_weight is None:
        w = np.full(n, 1.0 / n)
    else:
        w = np.asarray(sample_weight, dtype=np.float64)
        if w.sum() <= 0:
            raise ValueError("sample weights must have positive total")
        w = w / w.sum()
    if (feature_subset is not None or random_thresholds) and rng is None:
        raise ValueError("randomized splitting requires an rng")

    def leaf(y_node, w_node) -> _Node:
        if task == CLASSIFICATION:
            counts = _class_counts(y_node, w_node, n_classes)
            return _Node(value=int(np.argmax(counts)))
        total = float(w_node.sum())
        if total <= 0:
            return _Node(value=float(y_node.mean()))
        return _Node(value=float(np.dot(w_node, y_node) / total))

    def build(X_node, y_node, w_node, depth: int) -> _Node:
        if len(y_node) < 2 or (max_depth is not None and depth >= max_depth):
            return leaf(y_node, w_node)
        if (y_node == y_node[0]).all():  # pure node
            return leaf(y_node, w_node)
        if feature_subset is not None and feature_subset < n_features:
            features = np.sort(rng.choice(n_features, size=feature_subset, replace=False))
        else:
            features = np.arange(n_features)
        if random_thresholds:
            split = _best_random_split(X_node, y_node, w_node, features, n_classes, task, rng)
        else:
            split = _best_midpoint_split(X_node, y_node, w_node, features, n_classes, task)
        if split is None:
            return leaf(y_node, w_node)
        _, f, threshold = split
        mask = X_node[:, f] <= threshold
        node = _Node(feature=f, threshold=threshold)
        node.left = build(X_node[mask], y_node[mask], w_node[mask], depth + 1)
        node.right = build(X_node[~mask], y_node[~mask], w_node[~mask], depth + 1)
        return node

    return DecisionTreeModel(build(X, y, w, 0), task, labels, n_features)
