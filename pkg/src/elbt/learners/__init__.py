"""From-scratch base learners and the ensemble constructors built on them."""

from elbt.learners.config import (
    CLASSIFICATION,
    CLASSIFICATION_COMBOS,
    REGRESSION,
    REGRESSION_COMBOS,
    Dataset,
    DecisionTreeParams,
    EnsembleSpec,
    LinearRegressionParams,
    LogisticRegressionParams,
    combo_base_code,
    combo_codes,
    combo_family,
    parse_combo,
)
from elbt.learners.ensemble import Ensemble, GradientBoostingModel, train
from elbt.learners.linear import (
    LinearRegressionModel,
    LogisticRegressionModel,
    fit_linear,
    fit_logistic,
)
from elbt.learners.tree import DecisionTreeModel, fit_tree


def predict(ensemble, x):
    """Combined committee prediction: weighted vote or weighted mean."""
    return ensemble.predict_one(x)


def predict_members(ensemble, x):
    """Per-member predictions (staged prefixes for gradient boosting)."""
    return ensemble.member_predictions(x)


__all__ = [
    "CLASSIFICATION",
    "REGRESSION",
    "CLASSIFICATION_COMBOS",
    "REGRESSION_COMBOS",
    "Dataset",
    "DecisionTreeParams",
    "LogisticRegressionParams",
    "LinearRegressionParams",
    "EnsembleSpec",
    "parse_combo",
    "combo_codes",
    "combo_family",
    "combo_base_code",
    "train",
    "predict",
    "predict_members",
    "Ensemble",
    "GradientBoostingModel",
    "DecisionTreeModel",
    "LogisticRegressionModel",
    "LinearRegressionModel",
    "fit_tree",
    "fit_logistic",
    "fit_linear",
]
