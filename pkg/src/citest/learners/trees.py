"""Greedy binary decision trees with loss-elicited leaves, plus bagging.

Every leaf holds the constant that the active loss elicits from its rows
(mean, median, alpha-quantile, or the class-frequency pmf), and splits are
chosen to minimize the summed loss of those elicited constants. For the
squared loss this is classical variance reduction; for log loss it is
information gain; for pinball losses it is the quantile analogue. That
choice matters: losses that are blind to a dependence see zero gain and
produce stumps, while a quantile battery on the same data can split.

Squared-loss and classification scans are evaluated at every distinct
feature boundary via cumulative sums; the generic regression path
(absolute, pinball) evaluates at most 32 evenly spaced boundaries.
"""

from __future__ import annotations

import numpy as np

from ..errors import ConfigError
from ..losses import (
    Absolute,
    Brier,
    LogLoss,
    Misclassification,
    Quantile,
    Squared,
    is_classification_loss,
)
from .base import Classification, Predictor, task_of

GAIN_EPS = 1e-12
GENERIC_SCAN_CANDIDATES = 32


class TreePredictor(Predictor):
    __slots__ = ("root", "loss")

    def __init__(self, task, n_features, root, loss):
        super().__init__(task, n_features)
        self.root = root
        self.loss = loss

    def _predict(self, x):
        if isinstance(self.task, Classification):
            out = np.empty((x.shape[0], self.task.n_classes))
        else:
            out = np.empty(x.shape[0])
        _apply(self.root, x, np.arange(x.shape[0]), out)
        return out


class BaggedPredictor(Predictor):
    __slots__ = ("trees",)

    def __init__(self, trees):
        first = trees[0]
        super().__init__(first.task, first.n_features)
        self.trees = tuple(trees)

    def _predict(self, x):
        acc = self.trees[0]._predict(x).copy()
        for tree in self.trees[1:]:
            acc += tree._predict(x)
        acc /= len(self.trees)
        if isinstance(self.task, Classification):
            acc /= acc.sum(axis=1, keepdims=True)
        return acc


def _apply(node, x, idx, out):
    if node[0] == "leaf":
        out[idx] = node[1]
        return
    _, feat, thr, left, right = node
    go_left = x[idx, feat] <= thr
    _apply(left, x, idx[go_left], out)
    _apply(right, x, idx[~go_left], out)


def _leaf_value_and_loss(loss, y, n_classes):
    """Loss-elicited constant of a row set and its total training loss."""
    n = y.shape[0]
    if is_classification_loss(loss):
        counts = np.bincount(y, minlength=n_classes).astype(np.float64)
        pmf = counts / n
        if isinstance(loss, Misclassification):
            mode = int(np.argmax(counts))
            value = np.zeros(n_classes)
            value[mode] = 1.0
            return value, float(n - counts[mode])
        if isinstance(loss, LogLoss):
            nz = counts > 0
            total = float(n * np.log(n) - np.sum(counts[nz] * np.log(counts[nz])))
            return pmf, total
        return pmf, float(n * (1.0 - pmf @ pmf))  # Brier
    if isinstance(loss, Squared):
        mean = float(np.mean(y))
        return mean, float(y @ y - n * mean * mean)
    if isinstance(loss, Absolute):
        med = float(np.median(y))
        return med, float(np.abs(y - med).sum())
    alpha = loss.alpha
    k = max(int(np.ceil(alpha * n)) - 1, 0)
    q = float(np.partition(y, k)[k])
    d = q - y
    total = float(
        alpha * np.maximum(-d, 0.0).sum() + (1.0 - alpha) * np.maximum(d, 0.0).sum()
    )
    return q, total


def _valid_positions(xs, min_leaf):
    n = xs.shape[0]
    lo, hi = min_leaf, n - min_leaf
    if lo > hi:
        return np.empty(0, dtype=np.int64)
    pos = np.arange(lo, hi + 1)
    return pos[xs[pos] > xs[pos - 1]]


def _scan_squared(xs, ys, min_leaf):
    pos = _valid_positions(xs, min_leaf)
    if pos.size == 0:
        return None
    cy = np.cumsum(ys)
    cy2 = np.cumsum(ys * ys)
    n = ys.shape[0]
    k = pos.astype(np.float64)
    left = cy2[pos - 1] - cy[pos - 1] ** 2 / k
    right = (cy2[-1] - cy2[pos - 1]) - (cy[-1] - cy[pos - 1]) ** 2 / (n - k)
    total = left + right
    best = int(np.argmin(total))
    return pos[best], float(total[best])


def _scan_classes(xs, ys, min_leaf, loss, n_classes):
    pos = _valid_positions(xs, min_leaf)
    if pos.size == 0:
        return None
    onehot = np.zeros((ys.shape[0], n_classes))
    onehot[np.arange(ys.shape[0]), ys] = 1.0
    cum = np.cumsum(onehot, axis=0)
    left_counts = cum[pos - 1]
    right_counts = cum[-1] - left_counts
    k = pos.astype(np.float64)
    nk = ys.shape[0] - k

    def side_total(counts, sizes):
        if isinstance(loss, Misclassification):
            return sizes - counts.max(axis=1)
        if isinstance(loss, LogLoss):
            with np.errstate(divide="ignore", invalid="ignore"):
                clogc = np.where(counts > 0, counts * np.log(counts), 0.0)
            return sizes * np.log(sizes) - clogc.sum(axis=1)
        return sizes - np.einsum("ij,ij->i", counts, counts) / sizes  # Brier

    total = side_total(left_counts, k) + side_total(right_counts, nk)
    best = int(np.argmin(total))
    return pos[best], float(total[best])


def _scan_generic(xs, ys, min_leaf, loss):
    pos = _valid_positions(xs, min_leaf)
    if pos.size == 0:
        return None
    if pos.size > GENERIC_SCAN_CANDIDATES:
        take = np.linspace(0, pos.size - 1, GENERIC_SCAN_CANDIDATES).astype(int)
        pos = pos[np.unique(take)]
    best_pos, best_total = None, np.inf
    for p in pos:
        _, ll = _leaf_value_and_loss(loss, ys[:p], 0)
        _, rl = _leaf_value_and_loss(loss, ys[p:], 0)
        if ll + rl < best_total:
            best_pos, best_total = int(p), float(ll + rl)
    return (best_pos, best_total) if best_pos is not None else None


def _best_split(x, y, loss, n_classes, min_leaf, feature_idx):
    best = None  # (total, feat, threshold, left_mask)
    for feat in feature_idx:
        col = x[:, feat]
        order = np.argsort(col, kind="stable")
        xs = col[order]
        ys = y[order]
        if is_classification_loss(loss):
            hit = _scan_classes(xs, ys, min_leaf, loss, n_classes)
        elif isinstance(loss, Squared):
            hit = _scan_squared(xs, ys, min_leaf)
        else:
            hit = _scan_generic(xs, ys, min_leaf, loss)
        if hit is None:
            continue
        p, total = hit
        if best is None or total < best[0] - GAIN_EPS:
            thr = 0.5 * (xs[p - 1] + xs[p])
            best = (total, int(feat), float(thr), order[:p], order[p:])
    return best


def _build(x, y, loss, n_classes, depth, spec, rng, feature_fraction):
    value, node_loss = _leaf_value_and_loss(loss, y, n_classes)
    n = y.shape[0]
    if depth >= spec.max_depth or n < 2 * spec.min_leaf or node_loss <= GAIN_EPS:
        return ("leaf", value)
    d = x.shape[1]
    if feature_fraction < 1.0 and d > 1:
        m = max(1, int(np.ceil(feature_fraction * d)))
        feature_idx = np.sort(rng.choice(d, size=m, replace=False))
    else:
        feature_idx = np.arange(d)
    best = _best_split(x, y, loss, n_classes, spec.min_leaf, feature_idx)
    if best is None or best[0] >= node_loss - GAIN_EPS:
        return ("leaf", value)
    _, feat, thr, left_rows, right_rows = best
    left = _build(
        x[left_rows], y[left_rows], loss, n_classes, depth + 1, spec, rng,
        feature_fraction,
    )
    right = _build(
        x[right_rows], y[right_rows], loss, n_classes, depth + 1, spec, rng,
        feature_fraction,
    )
    return ("split", feat, thr, left, right)


def fit_tree(spec, features, targets, loss, seed, feature_fraction=1.0, rng=None):
    """Fit one decision tree.

    Parameters
    ----------
    spec : DecisionTreeSpec
    features : ndarray (n, d)
    targets : Column
    loss : LossFunction
        Drives both the leaf constants and the split criterion; must match
        the target's task.
    seed : int
        Only consumed when ``feature_fraction`` < 1 (bagging).
    """
    task = task_of(targets)
    n_classes = task.n_classes if isinstance(task, Classification) else 0
    if is_classification_loss(loss) != isinstance(task, Classification):
        raise ConfigError("loss kind does not match the target task")
    if rng is None:
        rng = np.random.default_rng(np.random.SeedSequence((seed, 0x7EE)))
    y = targets.values
    root = _build(features, y, loss, n_classes, 0, spec, rng, feature_fraction)
    return TreePredictor(task, features.shape[1], root, loss)


def fit_bagged(spec, features, targets, loss, seed):
    """Bootstrap-aggregated trees with per-node feature subsampling.

    Tree t draws its bootstrap rows and feature subsets from an RNG spawned
    deterministically for (seed, t), so the ensemble is reproducible and
    independent of any fitting order.
    """
    from .base import DecisionTreeSpec

    n = targets.n_rows
    tree_spec = DecisionTreeSpec(max_depth=spec.max_depth, min_leaf=spec.min_leaf)
    children = np.random.SeedSequence((seed, 0xBA6)).spawn(spec.n_trees)
    trees = []
    for t in range(spec.n_trees):
        rng = np.random.default_rng(children[t])
        rows = rng.integers(0, n, size=n)
        trees.append(
            fit_tree(
                tree_spec,
                features[rows],
                targets.take(rows),
                loss,
                seed=0,
                feature_fraction=spec.feature_fraction,
                rng=rng,
            )
        )
    return BaggedPredictor(trees)
