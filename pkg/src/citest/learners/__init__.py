"""Prediction functionals: baselines, a self-contained learner suite, and
stacking/multiplexing meta-estimation."""

from .base import (
    BaggedTreesSpec,
    BaselineSpec,
    Classification,
    DecisionTreeSpec,
    ElasticNetSpec,
    GaussianNBSpec,
    LogisticRegressionSpec,
    Predictor,
    Regression,
    default_loss_for,
    fit,
    fit_baseline,
    predict,
    task_of,
)
from .meta import MetaEstimatorSpec, meta_fit

__all__ = [
    "BaggedTreesSpec",
    "BaselineSpec",
    "Classification",
    "DecisionTreeSpec",
    "ElasticNetSpec",
    "GaussianNBSpec",
    "LogisticRegressionSpec",
    "MetaEstimatorSpec",
    "Predictor",
    "Regression",
    "default_loss_for",
    "fit",
    "fit_baseline",
    "meta_fit",
    "predict",
    "task_of",
]
