"""Meta-estimation: stacking, multiplexing, or a single learner.

Stacking fits every candidate, generates stage-1 predictions by K-fold
cross-fitting (each row is predicted by a model that never saw it), fits a
stage-2 combiner on those predictions (unregularized affine least squares
for regression, unregularized multinomial logistic for classification),
then refits the candidates on all rows for prediction time.

Multiplexing holds out a validation fraction of the training rows, fits
each candidate on the remainder, keeps the candidate with the smallest
validation loss under the task's default loss, and refits it on all rows.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import CitestError, ConfigError, InsufficientData, MetaFitError
from ..losses import loss_values
from .base import (
    BaggedTreesSpec,
    Classification,
    ElasticNetSpec,
    GaussianNBSpec,
    LogisticRegressionSpec,
    Predictor,
    applicable,
    check_targets,
    default_loss_for,
    fit,
    spec_name,
    task_of,
)
from .linear import fit_logistic


def _default_regressors():
    return (ElasticNetSpec(), BaggedTreesSpec())


def _default_classifiers():
    return (LogisticRegressionSpec(), GaussianNBSpec(), BaggedTreesSpec())


@dataclass(frozen=True)
class MetaEstimatorSpec:
    """Ensembling method and per-task candidate lists.

    ``method`` is one of "stacking", "multiplexing", "none"; with "none"
    the applicable candidate list must hold exactly one spec.
    """

    method: str = "stacking"
    regressors: tuple = field(default_factory=_default_regressors)
    classifiers: tuple = field(default_factory=_default_classifiers)
    validation_fraction: float = 0.25
    cv_folds: int = 5
    seed: int = 0

    def __post_init__(self):
        if self.method not in ("stacking", "multiplexing", "none"):
            raise ConfigError(f"unknown ensembling method {self.method!r}")
        if not self.regressors and not self.classifiers:
            raise ConfigError("at least one candidate learner is required")
        if not 0.0 < self.validation_fraction < 1.0:
            raise ConfigError("validation_fraction must be in (0,1)")
        if self.cv_folds < 2:
            raise ConfigError("cv_folds must be at least 2")


class StackedPredictor(Predictor):
    """Stage-2 combination of refit stage-1 candidates."""

    __slots__ = ("candidates", "stage2_coef", "stage2_intercept", "stage2_model")

    def __init__(self, task, n_features, candidates, coef, intercept, model):
        super().__init__(task, n_features)
        self.candidates = tuple(candidates)
        self.stage2_coef = coef
        self.stage2_intercept = intercept
        self.stage2_model = model

    def _predict(self, x):
        stage1 = _stage1_matrix(self.candidates, x, self.task)
        if isinstance(self.task, Classification):
            return self.stage2_model.predict(stage1)
        return stage1 @ self.stage2_coef + self.stage2_intercept


class MultiplexedPredictor(Predictor):
    """The winning candidate refit on all rows; records the selection."""

    __slots__ = ("winner", "winner_index", "validation_losses")

    def __init__(self, winner, winner_index, validation_losses):
        super().__init__(winner.task, winner.n_features)
        self.winner = winner
        self.winner_index = winner_index
        self.validation_losses = tuple(validation_losses)

    def _predict(self, x):
        return self.winner._predict(x)


def _stage1_matrix(predictors, x, task):
    cols = []
    for pred in predictors:
        out = pred.predict(x)
        if isinstance(task, Classification):
            cols.append(out)
        else:
            cols.append(out[:, None])
    return np.concatenate(cols, axis=1)


def _candidates_for(spec, task):
    cands = spec.classifiers if isinstance(task, Classification) else spec.regressors
    cands = tuple(c for c in cands if applicable(c, task))
    if not cands:
        raise ConfigError("no applicable candidate learner for this task")
    return cands


def _fit_all(cands, features, targets, seeds, loss):
    fitted, causes = [], {}
    for i, cand in enumerate(cands):
        try:
            fitted.append((i, fit(cand, features, targets, seeds[i], loss)))
        except CitestError as exc:
            causes[f"{i}:{spec_name(cand)}"] = exc
    if not fitted:
        raise MetaFitError(causes)
    return fitted


def _child_seeds(seed, tag, count):
    ss = np.random.SeedSequence((seed, tag))
    return [int(s.generate_state(1, np.uint64)[0]) for s in ss.spawn(count)]


def _fit_stacking(spec, features, targets, seed, loss, task):
    n = targets.n_rows
    cands = _candidates_for(spec, task)
    folds = min(spec.cv_folds, n)
    rng = np.random.default_rng(np.random.SeedSequence((seed, 0x5AC)))
    perm = rng.permutation(n)
    bounds = np.linspace(0, n, folds + 1).astype(int)
    fold_of = np.empty(n, dtype=np.int64)
    for f in range(folds):
        fold_of[perm[bounds[f] : bounds[f + 1]]] = f

    seeds = _child_seeds(seed, 0x51, len(cands))
    # cross-fitted stage-1 predictions: row i is predicted by the model of
    # the fold split that excluded row i
    if isinstance(task, Classification):
        width = task.n_classes
    else:
        width = 1
    oof = [np.zeros((n, width)) for _ in cands]
    alive = set(range(len(cands)))
    causes = {}
    for f in range(folds):
        holdout = fold_of == f
        train_rows = np.flatnonzero(~holdout)
        test_rows = np.flatnonzero(holdout)
        if test_rows.size == 0:
            continue
        sub_targets = targets.take(train_rows)
        for i, cand in enumerate(cands):
            if i not in alive:
                continue
            try:
                model = fit(cand, features[train_rows], sub_targets, seeds[i], loss)
                out = model.predict(features[test_rows])
            except CitestError as exc:
                alive.discard(i)
                causes[f"{i}:{spec_name(cand)}"] = exc
                continue
            oof[i][test_rows] = out if out.ndim == 2 else out[:, None]
    if not alive:
        raise MetaFitError(causes)
    kept = sorted(alive)
    stage1 = np.concatenate([oof[i] for i in kept], axis=1)

    if isinstance(task, Classification):
        model = fit_logistic(LogisticRegressionSpec(l2_penalty=0.0), stage1, targets,
                             task.n_classes)
        coef, intercept = None, None
    else:
        design = np.concatenate([np.ones((n, 1)), stage1], axis=1)
        sol, *_ = np.linalg.lstsq(design, targets.values, rcond=None)
        intercept, coef = float(sol[0]), sol[1:]
        model = None

    refit = []
    for i in kept:
        refit.append(fit(cands[i], features, targets, seeds[i], loss))
    return StackedPredictor(task, features.shape[1], refit, coef, intercept, model)


def _fit_multiplexing(spec, features, targets, seed, loss, task):
    n = targets.n_rows
    cands = _candidates_for(spec, task)
    n_val = int(round(n * spec.validation_fraction))
    if n_val < 2 or n - n_val < 2:
        raise InsufficientData(
            f"multiplexing needs at least 2 rows on each side of the "
            f"validation split, got {n - n_val}/{n_val}"
        )
    rng = np.random.default_rng(np.random.SeedSequence((seed, 0x3B1)))
    perm = rng.permutation(n)
    val_rows = np.sort(perm[:n_val])
    fit_rows = np.sort(perm[n_val:])
    seeds = _child_seeds(seed, 0x52, len(cands))
    sub_targets = targets.take(fit_rows)
    fitted = _fit_all(cands, features[fit_rows], sub_targets, seeds, loss)

    select_loss = default_loss_for(task)
    val_targets = targets.take(val_rows).values
    scores = []
    for i, model in fitted:
        preds = model.predict(features[val_rows])
        scores.append((i, float(np.mean(loss_values(select_loss, preds, val_targets)))))
    best_index, _ = min(scores, key=lambda t: t[1])  # ties keep list order
    winner = fit(cands[best_index], features, targets, seeds[best_index], loss)
    return MultiplexedPredictor(winner, best_index, [s for _, s in scores])


def meta_fit(spec, features, targets, seed, loss=None):
    """Fit the configured meta-estimator.

    Parameters
    ----------
    spec : MetaEstimatorSpec
    features : ndarray (n, d)
    targets : Column
    seed : int
        Drives fold assignment, validation split, and candidate seeds.
    loss : LossFunction, optional
        Forwarded to loss-aware candidates; defaults to the task's loss.

    Returns
    -------
    Predictor

    Raises
    ------
    MetaFitError
        Every candidate failed (the per-candidate causes are attached).
    """
    x = np.asarray(features, dtype=np.float64)
    task = task_of(targets)
    check_targets(targets, task)
    if loss is None:
        loss = default_loss_for(task)
    if spec.method == "none":
        cands = _candidates_for(spec, task)
        if len(cands) != 1:
            raise ConfigError(
                "method 'none' requires exactly one applicable candidate"
            )
        return fit(cands[0], x, targets, _child_seeds(seed, 0x50, 1)[0], loss)
    if spec.method == "multiplexing":
        return _fit_multiplexing(spec, x, targets, seed, loss, task)
    return _fit_stacking(spec, x, targets, seed, loss, task)
