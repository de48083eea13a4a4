"""Learner specifications, the Predictor contract, and simple families.

A Predictor is an immutable fitted prediction functional. Regression
predictors map a feature matrix to one real per row; classification
predictors map it to one probability vector per row (rows sum to one).
Fitting is a deterministic function of (spec, data, seed).

The uninformed baseline lives here too: a constant predictor returning the
loss-elicited statistic of the training targets, which is the best possible
predictor that ignores its input.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigError, DegenerateTarget, NumericError, ShapeError
from ..losses import LogLoss, Squared, elicit, is_classification_loss


@dataclass(frozen=True)
class Regression:
    pass


@dataclass(frozen=True)
class Classification:
    n_classes: int


Task = Regression | Classification


def _default_lambda_grid():
    return tuple(np.logspace(-4.0, 1.0, 20))


@dataclass(frozen=True)
class ElasticNetSpec:
    """Elastic net linear regression with cross-validated penalty strength."""

    l1_ratio: float = 0.5
    lambda_grid: tuple = field(default_factory=_default_lambda_grid)
    cv_folds: int = 5

    def __post_init__(self):
        if not 0.0 <= self.l1_ratio <= 1.0:
            raise ConfigError("l1_ratio must be in [0,1]")
        if len(self.lambda_grid) == 0:
            raise ConfigError("lambda_grid must be non-empty")
        if self.cv_folds < 2:
            raise ConfigError("cv_folds must be at least 2")


@dataclass(frozen=True)
class LogisticRegressionSpec:
    """Multinomial logistic regression, damped Newton, l2 penalty."""

    l2_penalty: float = 1.0

    def __post_init__(self):
        if self.l2_penalty < 0.0:
            raise ConfigError("l2_penalty must be non-negative")


@dataclass(frozen=True)
class GaussianNBSpec:
    """Gaussian naive Bayes classifier."""


@dataclass(frozen=True)
class DecisionTreeSpec:
    """Greedy binary tree with loss-elicited leaf values."""

    max_depth: int = 6
    min_leaf: int = 5

    def __post_init__(self):
        if self.max_depth < 0:
            raise ConfigError("max_depth must be non-negative")
        if self.min_leaf < 1:
            raise ConfigError("min_leaf must be at least 1")


@dataclass(frozen=True)
class BaggedTreesSpec:
    """Bootstrap-aggregated trees with per-split feature subsampling."""

    n_trees: int = 50
    max_depth: int = 6
    min_leaf: int = 5
    feature_fraction: float = 0.7

    def __post_init__(self):
        if self.n_trees < 1:
            raise ConfigError("n_trees must be at least 1")
        if not 0.0 < self.feature_fraction <= 1.0:
            raise ConfigError("feature_fraction must be in (0,1]")


@dataclass(frozen=True)
class BaselineSpec:
    """The uninformed constant learner."""


LearnerSpec = (
    ElasticNetSpec
    | LogisticRegressionSpec
    | GaussianNBSpec
    | DecisionTreeSpec
    | BaggedTreesSpec
    | BaselineSpec
)


def spec_name(spec):
    return type(spec).__name__.removesuffix("Spec")


def task_of(targets):
    """Task implied by a target Column (categorical -> classification)."""
    if targets.is_categorical():
        return Classification(len(targets.kind.levels))
    return Regression()


def default_loss_for(task):
    return LogLoss() if isinstance(task, Classification) else Squared()


def check_targets(targets, task):
    """Validate a training target Column against its task.

    Raises
    ------
    DegenerateTarget
        Classification target with fewer than two classes present.
    """
    if isinstance(task, Classification):
        present = np.unique(targets.values)
        if present.size < 2:
            raise DegenerateTarget(
                f"target {targets.name!r} has a single class in training data"
            )


class Predictor:
    """Base class for fitted predictors; subclasses implement _predict."""

    __slots__ = ("task", "n_features")

    def __init__(self, task, n_features):
        self.task = task
        self.n_features = n_features

    def predict(self, features):
        x = np.asarray(features, dtype=np.float64)
        if x.ndim != 2:
            raise ShapeError("feature matrix must be 2-d")
        if not np.all(np.isfinite(x)):
            raise NumericError("non-finite feature value")
        if self.n_features is not None and x.shape[1] != self.n_features:
            raise ShapeError(
                f"predictor fitted on {self.n_features} features, got {x.shape[1]}"
            )
        return self._predict(x)

    def _predict(self, x):
        raise NotImplementedError


class ConstantPredictor(Predictor):
    """Returns the same value (or pmf) for every row; accepts any width."""

    __slots__ = ("value",)

    def __init__(self, task, value):
        super().__init__(task, None)
        self.value = value

    def _predict(self, x):
        n = x.shape[0]
        if isinstance(self.task, Classification):
            return np.tile(np.asarray(self.value, dtype=np.float64), (n, 1))
        return np.full(n, float(self.value))


class GaussianNBPredictor(Predictor):
    __slots__ = ("log_priors", "means", "variances")

    def __init__(self, n_features, log_priors, means, variances):
        super().__init__(Classification(log_priors.shape[0]), n_features)
        self.log_priors = log_priors
        self.means = means
        self.variances = variances

    def _predict(self, x):
        # log joint density per class, then a softmax normalization
        log_like = -0.5 * (
            np.log(2.0 * np.pi * self.variances).sum(axis=1)[None, :]
            + (((x[:, None, :] - self.means[None, :, :]) ** 2) / self.variances).sum(
                axis=2
            )
        )
        scores = log_like + self.log_priors[None, :]
        scores -= scores.max(axis=1, keepdims=True)
        p = np.exp(scores)
        return p / p.sum(axis=1, keepdims=True)


def fit_baseline(targets, loss):
    """Best uninformed predictor: the constant eliciting ``loss``.

    Parameters
    ----------
    targets : Column
        Training targets; categorical columns use their full level set.
    loss : LossFunction

    Returns
    -------
    ConstantPredictor
    """
    task = task_of(targets)
    if isinstance(task, Classification):
        if not is_classification_loss(loss):
            raise ConfigError("classification target needs a classification loss")
        stat = elicit(loss, targets.values, n_classes=task.n_classes)
    else:
        if is_classification_loss(loss):
            raise ConfigError("regression target needs a regression loss")
        stat = elicit(loss, targets.values)
    return ConstantPredictor(task, stat.value)


def _fit_gaussian_nb(features, targets):
    task = task_of(targets)
    k = task.n_classes
    n, d = features.shape
    counts = np.bincount(targets.values, minlength=k).astype(np.float64)
    means = np.zeros((k, d))
    variances = np.ones((k, d))
    global_var = np.var(features, axis=0).max() if d else 1.0
    eps = 1e-9 * max(float(global_var), 1.0)
    for c in range(k):
        rows = features[targets.values == c]
        if rows.shape[0] == 0:
            # class absent from training: keep the global statistics
            means[c] = features.mean(axis=0)
            variances[c] = np.var(features, axis=0) + eps
            continue
        means[c] = rows.mean(axis=0)
        variances[c] = np.var(rows, axis=0) + eps
    priors = np.maximum(counts, 1e-12)
    priors /= priors.sum()
    return GaussianNBPredictor(d, np.log(priors), means, variances)


def fit(spec, features, targets, seed, loss=None):
    """Fit one learner family.

    Parameters
    ----------
    spec : LearnerSpec
    features : ndarray (n, d)
        Encoded design matrix.
    targets : Column
        Training targets; the column kind selects the task.
    seed : int
        Seed for any internal randomness (bagging); fitting is a
        deterministic function of (spec, features, targets, seed).
    loss : LossFunction, optional
        Loss whose elicited statistic tree leaves and the baseline should
        hold; defaults to the task's canonical loss. Linear families
        always optimize their native criteria.

    Returns
    -------
    Predictor

    Raises
    ------
    DegenerateTarget
        Classification target with a single class in the training data.
    NumericError
        Non-finite feature values.
    """
    from . import linear, trees  # deferred to avoid import cycles

    x = np.asarray(features, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] != targets.n_rows:
        raise ShapeError("feature matrix and targets differ in rows")
    if not np.all(np.isfinite(x)):
        raise NumericError("non-finite feature value")
    task = task_of(targets)
    check_targets(targets, task)
    if loss is None:
        loss = default_loss_for(task)
    elif is_classification_loss(loss) != isinstance(task, Classification):
        raise ConfigError(
            f"loss {loss!r} does not match the task of target {targets.name!r}"
        )

    if isinstance(spec, BaselineSpec):
        base = fit_baseline(targets, loss)
        return ConstantPredictor(base.task, base.value)
    if isinstance(spec, ElasticNetSpec):
        if isinstance(task, Classification):
            raise ConfigError("ElasticNet is a regression family")
        return linear.fit_elastic_net_cv(spec, x, targets.values, seed)
    if isinstance(spec, LogisticRegressionSpec):
        if not isinstance(task, Classification):
            raise ConfigError("LogisticRegression is a classification family")
        return linear.fit_logistic(spec, x, targets, task.n_classes)
    if isinstance(spec, GaussianNBSpec):
        if not isinstance(task, Classification):
            raise ConfigError("GaussianNB is a classification family")
        return _fit_gaussian_nb(x, targets)
    if isinstance(spec, DecisionTreeSpec):
        return trees.fit_tree(spec, x, targets, loss, seed)
    if isinstance(spec, BaggedTreesSpec):
        return trees.fit_bagged(spec, x, targets, loss, seed)
    raise ConfigError(f"unknown learner spec {spec!r}")


def predict(predictor, features):
    """Apply a fitted predictor to a feature matrix."""
    return predictor.predict(features)


def applicable(spec, task):
    """Whether a learner family can fit the given task."""
    if isinstance(spec, (ElasticNetSpec,)):
        return isinstance(task, Regression)
    if isinstance(spec, (LogisticRegressionSpec, GaussianNBSpec)):
        return isinstance(task, Classification)
    return True
