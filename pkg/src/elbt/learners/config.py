"""Ensemble configuration types, dataset container, and combination codes."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

CLASSIFICATION = "classification"
REGRESSION = "regression"

METHODS = ("bagging", "random_forest", "extra_trees", "adaboost", "gradient_boosting")


@dataclass(frozen=True)
class DecisionTreeParams:
    max_depth: Optional[int] = None  # None = unbounded


@dataclass(frozen=True)
class LogisticRegressionParams:
    lr: float = 0.1
    epochs: int = 500
    l2: float = 1e-4


@dataclass(frozen=True)
class LinearRegressionParams:
    pass


BaseLearnerKind = Union[
    DecisionTreeParams, LogisticRegressionParams, LinearRegressionParams, "EnsembleSpec"
]


GB_COMMITTEE_MODES = ("stage_trees", "staged_prefix")


@dataclass(frozen=True)
class EnsembleSpec:
    """Recipe for a trainable committee.

    `base` defaults to a decision tree; forests and gradient boosting only
    accept trees. Nested specs (a forest as the base of bagging or AdaBoost)
    express the *-rfc / *-rfr combinations.

    Gradient boosting has no independent voters, so its committee view is
    configurable: 'stage_trees' treats each stage's additive contribution as
    one member opinion (regression default; prefix predictions form a
    near-monotone ramp whose spread just tracks prediction magnitude, which
    starves input-space coverage), 'staged_prefix' uses the partial-sum
    predictors F_1..F_n. Classification always votes with staged argmax
    labels.
    """

    method: str
    task: str
    base: Optional[BaseLearnerKind] = None
    n_members: int = 10
    learning_rate: float = 0.1  # boosting only
    feature_subset: Optional[int] = None  # random forest; None = ceil(sqrt(n_features))
    gb_max_depth: int = 3  # depth of gradient-boosting stage trees
    gb_committee: str = "stage_trees"

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown ensemble method '{self.method}'")
        if self.task not in (CLASSIFICATION, REGRESSION):
            raise ValueError(f"unknown task '{self.task}'")
        if self.n_members < 2:
            raise ValueError("ensembles need at least 2 members")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.gb_committee not in GB_COMMITTEE_MODES:
            raise ValueError(f"unknown gradient-boosting committee mode '{self.gb_committee}'")
        if self.method in ("random_forest", "extra_trees", "gradient_boosting"):
            if self.base is not None and not isinstance(self.base, DecisionTreeParams):
                raise ValueError(f"{self.method} requires a decision-tree base")
        base = self.base
        if isinstance(base, LogisticRegressionParams) and self.task != CLASSIFICATION:
            raise ValueError("logistic regression is a classification base")
        if isinstance(base, LinearRegressionParams) and self.task != REGRESSION:
            raise ValueError("linear regression is a regression base")
        if isinstance(base, EnsembleSpec) and base.task != self.task:
            raise ValueError("nested ensemble task mismatch")

    def resolved_base(self) -> BaseLearnerKind:
        return self.base if self.base is not None else DecisionTreeParams()


@dataclass
class Dataset:
    """Training rows: integer feature vectors with class-label or numeric targets."""

    features: np.ndarray  # (n, f) float64
    targets: np.ndarray  # object array of labels, or float64
    task: str
    labels: tuple[str, ...] = field(init=False)

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=np.float64)
        if self.features.ndim != 2 or len(self.features) == 0:
            raise ValueError("features must be a non-empty 2-D array")
        if len(self.features) != len(self.targets):
            raise ValueError("one target per feature row required")
        if self.task == CLASSIFICATION:
            targets = [str(t) for t in self.targets]
            self.targets = np.array(targets, dtype=object)
            self.labels = tuple(sorted(set(targets)))
        elif self.task == REGRESSION:
            self.targets = np.asarray(self.targets, dtype=np.float64)
            self.labels = ()
        else:
            raise ValueError(f"unknown task '{self.task}'")

    @classmethod
    def from_rows(cls, rows, task: str) -> "Dataset":
        X = np.array([list(features) for features, _ in rows], dtype=np.float64)
        y = np.array([target for _, target in rows], dtype=object)
        return cls(X, y, task)


# ---------------------------------------------------------------------------
# Combination codes (CLI/config strings)

_NESTED_INNER_SIZE = 5  # inner forest size when a forest serves as a base learner

CLASSIFICATION_COMBOS = (
    "bc-dtc",
    "bc-lor",
    "bc-rfc",
    "rfc",
    "etc",
    "abc-dtc",
    "abc-lor",
    "abc-rfc",
    "gbc",
)
REGRESSION_COMBOS = (
    "br-dtr",
    "br-lir",
    "br-rfr",
    "rfr",
    "etr",
    "abr-dtr",
    "abr-lir",
    "abr-rfr",
    "gbr",
)

_BAGGING_FAMILY = frozenset(
    {"bc-dtc", "bc-lor", "bc-rfc", "rfc", "etc", "br-dtr", "br-lir", "br-rfr", "rfr", "etr"}
)
_BOOSTING_FAMILY = frozenset(
    {"abc-dtc", "abc-lor", "abc-rfc", "gbc", "abr-dtr", "abr-lir", "abr-rfr", "gbr"}
)


def combo_codes(task: str) -> tuple[str, ...]:
    if task == CLASSIFICATION:
        return CLASSIFICATION_COMBOS
    if task == REGRESSION:
        return REGRESSION_COMBOS
    raise ValueError(f"unknown task '{task}'")


def combo_family(code: str) -> str:
    """Method family ('Bagging' or 'Boosting') of a combination code."""
    if code in _BAGGING_FAMILY:
        return "Bagging"
    if code in _BOOSTING_FAMILY:
        return "Boosting"
    raise ValueError(f"unknown combo code '{code}'")


def combo_base_code(code: str) -> Optional[str]:
    """Base-estimator short code for explicit-base combos, else None."""
    if "-" in code:
        return code.split("-", 1)[1]
    return None


def parse_combo(code: str, n_members: int = 10) -> EnsembleSpec:
    """Translate a combination code into an EnsembleSpec."""
    task = CLASSIFICATION if code in CLASSIFICATION_COMBOS else REGRESSION
    if code not in CLASSIFICATION_COMBOS and code not in REGRESSION_COMBOS:
        raise ValueError(f"unknown combo code '{code}'")
    inner_forest = EnsembleSpec(
        "random_forest", task, n_members=_NESTED_INNER_SIZE
    )
    bases = {
        "dtc": DecisionTreeParams(),
        "dtr": DecisionTreeParams(),
        "lor": LogisticRegressionParams(),
        "lir": LinearRegressionParams(),
        "rfc": inner_forest,
        "rfr": inner_forest,
    }
    if code in ("rfc", "rfr"):
        return EnsembleSpec("random_forest", task, n_members=n_members)
    if code in ("etc", "etr"):
        return EnsembleSpec("extra_trees", task, n_members=n_members)
    if code in ("gbc", "gbr"):
        return EnsembleSpec("gradient_boosting", task, n_members=n_members)
    method_code, base_code = code.split("-", 1)
    method = "bagging" if method_code in ("bc", "br") else "adaboost"
    return EnsembleSpec(method, task, base=bases[base_code], n_members=n_members)
