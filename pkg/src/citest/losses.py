"""Convex loss functionals and their elicited statistics.

Each loss evaluates a prediction against an observation and elicits a
summary of the target distribution: the constant (or probability vector)
minimizing the expected loss. Regression losses compare reals; the
classification losses score a probability vector against an observed class
index. The elicited statistic is what the optimal uninformed baseline
predictor returns, so everything downstream (baseline fitting, tree leaf
values, the independence tests) is built on the two functions
:func:`eval_loss` and :func:`elicit`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, EmptyInput, ShapeError

# Probabilities below this are clamped before taking logs so that log-loss
# residuals stay finite for the downstream t/Wilcoxon machinery.
LOG_CLAMP = 1e-15


@dataclass(frozen=True)
class Squared:
    """(prediction - observation)^2; elicits the mean."""


@dataclass(frozen=True)
class Absolute:
    """|prediction - observation|; elicits the median."""


@dataclass(frozen=True)
class Quantile:
    """Pinball loss; elicits the lower empirical alpha-quantile.

    eval = alpha * max(obs - pred, 0) + (1 - alpha) * max(pred - obs, 0),
    the non-negative form whose minimizer is the alpha-quantile.
    """

    alpha: float

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ConfigError(f"quantile alpha must be in (0,1), got {self.alpha}")


@dataclass(frozen=True)
class Misclassification:
    """1 - p(observed class); elicited by a point mass at the modal class."""


@dataclass(frozen=True)
class LogLoss:
    """-log p(observed class); elicits the class-frequency vector."""


@dataclass(frozen=True)
class Brier:
    """Squared distance between the predicted pmf and the observed one-hot."""


LossFunction = Squared | Absolute | Quantile | Misclassification | LogLoss | Brier

_REGRESSION = (Squared, Absolute, Quantile)
_CLASSIFICATION = (Misclassification, LogLoss, Brier)


def is_classification_loss(loss):
    return isinstance(loss, _CLASSIFICATION)


def is_regression_loss(loss):
    return isinstance(loss, _REGRESSION)


def parse_loss_token(token):
    """Parse a CLI loss token.

    Accepted tokens: ``squared``, ``absolute``, ``quantile:<alpha>``,
    ``misclass``, ``log``, ``brier``.
    """
    text = token.strip().lower()
    if text == "squared":
        return Squared()
    if text == "absolute":
        return Absolute()
    if text.startswith("quantile:"):
        try:
            alpha = float(text.split(":", 1)[1])
        except ValueError:
            raise ConfigError(f"bad quantile alpha in {token!r}") from None
        return Quantile(alpha)
    if text == "misclass":
        return Misclassification()
    if text == "log":
        return LogLoss()
    if text == "brier":
        return Brier()
    raise ConfigError(f"unknown loss token {token!r}")


def loss_token(loss):
    """Inverse of :func:`parse_loss_token`, used for config echoing."""
    if isinstance(loss, Squared):
        return "squared"
    if isinstance(loss, Absolute):
        return "absolute"
    if isinstance(loss, Quantile):
        return f"quantile:{loss.alpha:g}"
    if isinstance(loss, Misclassification):
        return "misclass"
    if isinstance(loss, LogLoss):
        return "log"
    if isinstance(loss, Brier):
        return "brier"
    raise ConfigError(f"unknown loss {loss!r}")


@dataclass(frozen=True)
class ElicitedStatistic:
    """The loss-optimal constant: a real, or a pmf for classification."""

    value: object
    loss: LossFunction


@dataclass(frozen=True)
class LossVector:
    """Per-row loss residuals L_i and their arithmetic mean."""

    residuals: np.ndarray
    mean: float
    loss: LossFunction


def _check_pmf(p):
    p = np.asarray(p, dtype=np.float64)
    if p.ndim != 1:
        raise ShapeError("classification prediction must be a 1-d pmf")
    if np.any(p < -1e-12) or abs(float(p.sum()) - 1.0) > 1e-9:
        raise ShapeError("classification prediction is not a probability vector")
    return p


def eval_loss(loss, predicted, observed):
    """Evaluate one prediction against one observation.

    Parameters
    ----------
    loss : LossFunction
    predicted : float or 1-d pmf
        A real for regression losses, a probability vector for
        classification losses.
    observed : float or int
        A real, or the observed class index.

    Returns
    -------
    float
    """
    if is_regression_loss(loss):
        y, star = float(predicted), float(observed)
        if isinstance(loss, Squared):
            return (y - star) ** 2
        if isinstance(loss, Absolute):
            return abs(y - star)
        a = loss.alpha
        return a * max(star - y, 0.0) + (1.0 - a) * max(y - star, 0.0)
    p = _check_pmf(predicted)
    k = int(observed)
    if not 0 <= k < p.shape[0]:
        raise ShapeError(f"observed class {k} outside pmf of length {p.shape[0]}")
    if isinstance(loss, Misclassification):
        return 1.0 - float(p[k])
    if isinstance(loss, LogLoss):
        return -float(np.log(max(float(p[k]), LOG_CLAMP)))
    # Brier: (1 - p_k)^2 + sum_{j != k} p_j^2
    return float((1.0 - p[k]) ** 2 + p.dot(p) - p[k] ** 2)


def loss_values(loss, predictions, observed):
    """Vectorized :func:`eval_loss` over rows.

    ``predictions`` is (M,) for regression or (M, K) row pmfs for
    classification; ``observed`` is (M,) reals or class indices.
    """
    if is_regression_loss(loss):
        pred = np.asarray(predictions, dtype=np.float64).reshape(-1)
        obs = np.asarray(observed, dtype=np.float64).reshape(-1)
        if pred.shape != obs.shape:
            raise ShapeError("predictions and observations differ in length")
        d = pred - obs
        if isinstance(loss, Squared):
            return d * d
        if isinstance(loss, Absolute):
            return np.abs(d)
        a = loss.alpha
        return a * np.maximum(-d, 0.0) + (1.0 - a) * np.maximum(d, 0.0)
    p = np.asarray(predictions, dtype=np.float64)
    obs = np.asarray(observed).reshape(-1).astype(np.int64)
    if p.ndim != 2 or p.shape[0] != obs.shape[0]:
        raise ShapeError("predictions and observations differ in length")
    rows = np.arange(obs.shape[0])
    p_obs = p[rows, obs]
    if isinstance(loss, Misclassification):
        return 1.0 - p_obs
    if isinstance(loss, LogLoss):
        return -np.log(np.maximum(p_obs, LOG_CLAMP))
    return (1.0 - p_obs) ** 2 + np.einsum("ij,ij->i", p, p) - p_obs**2


def _lower_quantile(sorted_values, alpha):
    # smallest v with empirical cdf(v) >= alpha
    n = sorted_values.shape[0]
    idx = int(np.ceil(alpha * n)) - 1
    return float(sorted_values[max(idx, 0)])


def class_frequencies(codes, n_classes):
    """Empirical pmf of integer class codes over ``n_classes`` classes."""
    codes = np.asarray(codes, dtype=np.int64).reshape(-1)
    if codes.size == 0:
        raise EmptyInput("cannot compute frequencies of an empty sample")
    counts = np.bincount(codes, minlength=n_classes).astype(np.float64)
    return counts / counts.sum()


def elicit(loss, sample, n_classes=None):
    """The loss-optimal constant for a sample.

    Regression losses return the statistic the loss elicits (mean, median,
    lower alpha-quantile). Classification losses take integer class codes
    and return the frequency pmf (log loss, Brier) or the point mass at the
    modal class with lowest-index tie-breaking (misclassification).

    Parameters
    ----------
    loss : LossFunction
    sample : array-like
        Observed values; class codes for classification losses.
    n_classes : int, optional
        pmf length for classification losses; defaults to max(code) + 1.

    Returns
    -------
    ElicitedStatistic
    """
    if is_regression_loss(loss):
        x = np.asarray(sample, dtype=np.float64).reshape(-1)
        if x.size == 0:
            raise EmptyInput("cannot elicit from an empty sample")
        if isinstance(loss, Squared):
            value = float(np.mean(x))
        elif isinstance(loss, Absolute):
            value = float(np.median(x))
        else:
            value = _lower_quantile(np.sort(x), loss.alpha)
        return ElicitedStatistic(value, loss)
    codes = np.asarray(sample, dtype=np.int64).reshape(-1)
    if codes.size == 0:
        raise EmptyInput("cannot elicit from an empty sample")
    if n_classes is None:
        n_classes = int(codes.max()) + 1
    freq = class_frequencies(codes, n_classes)
    if isinstance(loss, Misclassification):
        mode = int(np.argmax(freq))  # argmax takes the lowest index on ties
        point = np.zeros(n_classes)
        point[mode] = 1.0
        return ElicitedStatistic(point, loss)
    return ElicitedStatistic(freq, loss)


def loss_vector(loss, predictions, observed):
    """Per-row residuals L_i = eval_loss(loss, predictions[i], observed[i]).

    Raises
    ------
    ShapeError
        If the two sequences differ in length.
    """
    residuals = loss_values(loss, predictions, observed)
    if residuals.size == 0:
        raise EmptyInput("loss_vector needs at least one row")
    return LossVector(residuals, float(np.mean(residuals)), loss)
