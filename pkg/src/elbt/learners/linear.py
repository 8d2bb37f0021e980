"""Linear base learners: multinomial logistic regression and least squares."""

from __future__ import annotations

from typing import Optional, Sequence

import numpy as np

from elbt.learners.config import LogisticRegressionParams


class LogisticRegressionModel:
    """Softmax classifier trained by full-batch gradient descent.

    Features are standardized with training-set mean/std; the L2 penalty
    leaves the intercept row alone. Prediction ties resolve to the first
    (lexicographically smallest) label.
    """

    def __init__(self, theta, mean, std, labels: tuple[str, ...]):
        self._theta = theta  # (f + 1, K)
        self._mean = mean
        self._std = std
        self.labels = labels
        self.n_features = len(mean)

    def predict_one(self, x: Sequence[float]) -> str:
        if len(x) != self.n_features:
            raise ValueError(f"expected {self.n_features} features, got {len(x)}")
        xs = (np.asarray(x, dtype=np.float64) - self._mean) / self._std
        logits = np.append(xs, 1.0) @ self._theta
        return self.labels[int(np.argmax(logits))]

    def predict(self, X: np.ndarray):
        return np.array([self.predict_one(row) for row in np.asarray(X)], dtype=object)


def fit_logistic(
    X: np.ndarray,
    y: np.ndarray,
    labels: tuple[str, ...],
    params: LogisticRegressionParams,
    sample_weight: Optional[np.ndarray] = None,
) -> LogisticRegressionModel:
    """y holds label indices into `labels`."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.intp)
    n, _ = X.shape
    k = len(labels)
    w = np.full(n, 1.0 / n) if sample_weight is None else np.asarray(sample_weight, float)
    w = w / w.sum()
    mean = X.mean(axis=0)
    std = X.std(axis=0)
    std[std == 0] = 1.0
    xb = np.hstack([(X - mean) / std, np.ones((n, 1))])
    onehot = np.zeros((n, k))
    onehot[np.arange(n), y] = 1.0
    theta = np.zeros((xb.shape[1], k))
    for _ in range(params.epochs):
        logits = xb @ theta
        logits -= logits.max(axis=1, keepdims=True)
        probs = np.exp(logits)
        probs /= probs.sum(axis=1, keepdims=True)
        grad = xb.T @ ((probs - onehot) * w[:, None])
        grad[:-1] += params.l2 * theta[:-1]
        theta -= params.lr * grad
    return LogisticRegressionModel(theta, mean, std, labels)


class LinearRegressionModel:
    def __init__(self, coef, intercept: float):
        self.coef = coef
        self.intercept = intercept
        self.n_features = len(coef)

    def predict_one(self, x: Sequence[float]) -> float:
        if len(x) != self.n_features:
            raise ValueError(f"expected {self.n_features} features, got {len(x)}")
        return float(np.dot(self.coef, np.asarray(x, dtype=np.float64)) + self.intercept)

    def predict(self, X: np.ndarray):
        X = np.asarray(X, dtype=np.float64)
        return X @ self.coef + self.intercept


def fit_linear(
    X: np.ndarray, y: np.ndarray, sample_weight: Optional[np.ndarray] = None
) -> LinearRegressionModel:
    """Closed-form (weighted) least squares with intercept."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n = len(y)
    xb = np.hstack([X, np.ones((n, 1))])
    if sample_weight is not None:
        sw = np.sqrt(np.asarray(sample_weight, dtype=np.float64))
        xb = xb * sw[:, None]
        y = y * sw
    sol, *_ = np.linalg.lstsq(xb, y, rcond=None)
    return LinearRegressionModel(sol[:-1], float(sol[-1]))
