"""Linear families: elastic-net regression and multinomial logistic.

The elastic net minimizes

    (1 / 2n) * ||y - X b||^2 + lam * (r * ||b||_1 + (1 - r) / 2 * ||b||^2)

by cyclic coordinate descent on precomputed Gram products, with the
penalty strength selected by K-fold cross-validation over a grid and a
final refit on all rows. The logistic model pins the last class score to
zero and runs a damped Newton iteration on the l2-penalized (intercepts
unpenalized) cross-entropy.
"""

from __future__ import annotations

import numpy as np

from ..errors import ConfigError
from .base import Classification, Predictor, Regression

CD_TOL = 1e-10
CD_MAX_SWEEPS = 1000
NEWTON_TOL = 1e-8
NEWTON_MAX_ITER = 200


class LinearPredictor(Predictor):
    __slots__ = ("coef", "intercept", "lambda_")

    def __init__(self, coef, intercept, lambda_):
        super().__init__(Regression(), coef.shape[0])
        self.coef = coef
        self.intercept = intercept
        self.lambda_ = lambda_

    def _predict(self, x):
        return x @ self.coef + self.intercept


class LogisticPredictor(Predictor):
    __slots__ = ("weights", "biases")

    def __init__(self, weights, biases, n_classes):
        super().__init__(Classification(n_classes), weights.shape[0])
        self.weights = weights  # (d, K-1); class K score pinned to 0
        self.biases = biases

    def _predict(self, x):
        scores = x @ self.weights + self.biases
        full = np.concatenate([scores, np.zeros((x.shape[0], 1))], axis=1)
        full -= full.max(axis=1, keepdims=True)
        p = np.exp(full)
        return p / p.sum(axis=1, keepdims=True)


def _soft_threshold(z, gamma):
    if z > gamma:
        return z - gamma
    if z < -gamma:
        return z + gamma
    return 0.0


def coordinate_descent(gram, corr, lam, l1_ratio, beta0=None):
    """Cyclic coordinate descent on centered Gram products.

    Parameters
    ----------
    gram : ndarray (d, d)
        X^T X / n of the centered design.
    corr : ndarray (d,)
        X^T y / n of the centered design and targets.
    lam, l1_ratio : float
        Penalty strength and l1 mixing weight.
    beta0 : ndarray, optional
        Warm-start coefficients.

    Returns
    -------
    ndarray (d,)
    """
    d = corr.shape[0]
    beta = np.zeros(d) if beta0 is None else beta0.copy()
    l1 = lam * l1_ratio
    denom = np.diag(gram) + lam * (1.0 - l1_ratio)
    for _ in range(CD_MAX_SWEEPS):
        delta = 0.0
        for j in range(d):
            if denom[j] <= 0.0:
                beta[j] = 0.0  # zero-variance feature stays out
                continue
            rho = corr[j] - gram[j] @ beta + gram[j, j] * beta[j]
            new = _soft_threshold(rho, l1) / denom[j]
            delta = max(delta, abs(new - beta[j]))
            beta[j] = new
        if delta < CD_TOL:
            break
    return beta


def elastic_net_objective(x, y, beta, intercept, lam, l1_ratio):
    """The penalized objective value (used by the convergence tests)."""
    n = y.shape[0]
    resid = y - x @ beta - intercept
    penalty = lam * (
        l1_ratio * np.abs(beta).sum() + 0.5 * (1.0 - l1_ratio) * beta @ beta
    )
    return float(0.5 * resid @ resid / n + penalty)


def _fit_enet_centered(x, y, lam, l1_ratio, beta0=None):
    x_mean = x.mean(axis=0)
    y_mean = float(y.mean())
    xc = x - x_mean
    n = y.shape[0]
    gram = xc.T @ xc / n
    corr = xc.T @ (y - y_mean) / n
    beta = coordinate_descent(gram, corr, lam, l1_ratio, beta0)
    intercept = y_mean - float(x_mean @ beta)
    return beta, intercept


def _cv_fold_slices(n, folds, rng):
    perm = rng.permutation(n)
    bounds = np.linspace(0, n, folds + 1).astype(int)
    return [perm[bounds[i] : bounds[i + 1]] for i in range(folds)]


def fit_elastic_net_cv(spec, features, targets, seed):
    """Cross-validated elastic net: select lambda, refit on all rows.

    The grid is scanned from the largest penalty down with warm starts;
    ties in validation error go to the larger (more regularized) lambda.
    """
    x = np.asarray(features, dtype=np.float64)
    y = np.asarray(targets, dtype=np.float64)
    n = y.shape[0]
    grid = np.sort(np.asarray(spec.lambda_grid, dtype=np.float64))[::-1]
    if np.any(grid <= 0.0):
        raise ConfigError("lambda_grid entries must be positive")
    if len(grid) > 1:
        folds = min(spec.cv_folds, n)
        rng = np.random.default_rng(np.random.SeedSequence((seed, 0x0E7)))
        slices = _cv_fold_slices(n, folds, rng)
        errors = np.zeros(grid.shape[0])
        for val_idx in slices:
            mask = np.ones(n, dtype=bool)
            mask[val_idx] = False
            x_tr, y_tr = x[mask], y[mask]
            x_va, y_va = x[val_idx], y[val_idx]
            beta = None
            for gi, lam in enumerate(grid):
                beta, icept = _fit_enet_centered(x_tr, y_tr, lam, spec.l1_ratio, beta)
                resid = y_va - x_va @ beta - icept
                errors[gi] += float(resid @ resid)
        best = int(np.argmin(errors))  # first index = largest lambda wins ties
        lam = float(grid[best])
    else:
        lam = float(grid[0])
    beta = None
    for cand in grid:
        if cand < lam:
            break
        beta, intercept = _fit_enet_centered(x, y, cand, spec.l1_ratio, beta)
    return LinearPredictor(beta, intercept, lam)


def _one_hot(codes, k):
    out = np.zeros((codes.shape[0], k))
    out[np.arange(codes.shape[0]), codes] = 1.0
    return out


def fit_logistic(spec, features, targets, n_classes):
    """Damped Newton fit of the pinned-class multinomial logistic model.

    Falls back to plain gradient steps whenever the (damped) Newton system
    fails or does not decrease the objective; stops at gradient infinity
    norm <= 1e-8 or 200 iterations.
    """
    x = np.asarray(features, dtype=np.float64)
    n, d = x.shape
    k = n_classes
    codes = targets.values
    xb = np.concatenate([x, np.ones((n, 1))], axis=1)  # bias as last column
    dp = d + 1
    km = k - 1
    onehot = _one_hot(codes, k)
    w = np.zeros((dp, km))
    pen = np.zeros(dp)
    pen[:d] = spec.l2_penalty  # intercept row unpenalized

    def value_grad(wmat):
        scores = xb @ wmat
        full = np.concatenate([scores, np.zeros((n, 1))], axis=1)
        full -= full.max(axis=1, keepdims=True)
        expf = np.exp(full)
        probs = expf / expf.sum(axis=1, keepdims=True)
        loglik = np.log(np.maximum(probs[np.arange(n), codes], 1e-300))
        obj = -loglik.sum() + 0.5 * float((pen[:, None] * wmat * wmat).sum())
        grad = xb.T @ (probs[:, :km] - onehot[:, :km]) + pen[:, None] * wmat
        return float(obj), grad, probs

    obj, grad, probs = value_grad(w)
    for _ in range(NEWTON_MAX_ITER):
        if np.abs(grad).max() <= NEWTON_TOL:
            break
        # Hessian blocks H[a,b] = xb^T diag(p_a (delta_ab - p_b)) xb
        hess = np.zeros((dp * km, dp * km))
        for a in range(km):
            pa = probs[:, a]
            for b in range(a, km):
                coef = pa * ((1.0 if a == b else 0.0) - probs[:, b])
                block = xb.T @ (coef[:, None] * xb)
                hess[a * dp : (a + 1) * dp, b * dp : (b + 1) * dp] = block
                if a != b:
                    hess[b * dp : (b + 1) * dp, a * dp : (a + 1) * dp] = block
        diag_pen = np.tile(pen, km)
        hess[np.arange(dp * km), np.arange(dp * km)] += diag_pen + 1e-10
        gvec = grad.reshape(-1, order="F")
        try:
            step = np.linalg.solve(hess, gvec)
        except np.linalg.LinAlgError:
            step = gvec  # gradient fallback
        step_mat = step.reshape(km, dp).T
        # backtracking line search, halving up to 30 times
        scale = 1.0
        improved = False
        for _ in range(30):
            cand = w - scale * step_mat
            cand_obj, cand_grad, cand_probs = value_grad(cand)
            if cand_obj <= obj:
                w, obj, grad, probs = cand, cand_obj, cand_grad, cand_probs
                improved = True
                break
            scale *= 0.5
        if not improved:
            break
    return LogisticPredictor(w[:d], w[d], k)
