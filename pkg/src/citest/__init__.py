"""Predictive conditional independence testing.

A test of "X independent of Y given Z" built on supervised learning: if no
predictor of Y from X and Z beats the best prediction that ignores X, the
data carry no evidence against conditional independence. Per-target p-values
are pooled with a dependence-robust false-discovery adjustment, and the same
machinery scales up to undirected skeleton learning over many variables.
"""

from .data import (
    Categorical,
    Column,
    Continuous,
    Dataset,
    SplitConfig,
    infer_column_kind,
    load_csv,
    split,
)
from .errors import (
    CitestError,
    ConfigError,
    DegenerateTarget,
    DomainError,
    EmptyBlock,
    EmptyInput,
    InsufficientData,
    MetaFitError,
    NumericError,
    ParseError,
    ShapeError,
    TooFewVariables,
)
from .inference import FdrResult, by_adjust, t_test_one_sided, wilcoxon_one_sided
from .learners import (
    BaggedTreesSpec,
    BaselineSpec,
    Classification,
    DecisionTreeSpec,
    ElasticNetSpec,
    GaussianNBSpec,
    LogisticRegressionSpec,
    MetaEstimatorSpec,
    Regression,
    fit,
    fit_baseline,
    meta_fit,
    predict,
)
from .losses import (
    Absolute,
    Brier,
    LogLoss,
    Misclassification,
    Quantile,
    Squared,
    elicit,
    eval_loss,
    loss_values,
    parse_loss_token,
)
from .pcit import IndependenceResult, PcitConfig, pcit_test, prediction_null_pvalue
from .skeleton import SkeletonResult, export_dot, find_neighbours
from .synth import (
    SyntheticGraphSpec,
    gaussian_dataset,
    make_cond_dep_dataset,
    make_unfaithful_example,
    precision_to_covariance,
    run_fdr_experiment,
    run_power_experiment,
    sample_sparse_precision,
)

__version__ = "0.1.0"

__all__ = [
    "Absolute",
    "BaggedTreesSpec",
    "BaselineSpec",
    "Brier",
    "Categorical",
    "CitestError",
    "Classification",
    "Column",
    "ConfigError",
    "Continuous",
    "Dataset",
    "DecisionTreeSpec",
    "DegenerateTarget",
    "DomainError",
    "ElasticNetSpec",
    "EmptyBlock",
    "EmptyInput",
    "FdrResult",
    "GaussianNBSpec",
    "IndependenceResult",
    "InsufficientData",
    "LogLoss",
    "LogisticRegressionSpec",
    "MetaEstimatorSpec",
    "MetaFitError",
    "Misclassification",
    "NumericError",
    "ParseError",
    "PcitConfig",
    "Quantile",
    "Regression",
    "ShapeError",
    "SkeletonResult",
    "SplitConfig",
    "Squared",
    "SyntheticGraphSpec",
    "TooFewVariables",
    "by_adjust",
    "elicit",
    "eval_loss",
    "export_dot",
    "find_neighbours",
    "fit",
    "fit_baseline",
    "gaussian_dataset",
    "infer_column_kind",
    "load_csv",
    "loss_values",
    "make_cond_dep_dataset",
    "make_unfaithful_example",
    "meta_fit",
    "parse_loss_token",
    "pcit_test",
    "precision_to_covariance",
    "predict",
    "prediction_null_pvalue",
    "run_fdr_experiment",
    "run_power_experiment",
    "sample_sparse_precision",
    "split",
    "t_test_one_sided",
    "wilcoxon_one_sided",
]
