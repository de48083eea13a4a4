"""Independent reference implementations used to cross-check the library.

Everything here is deliberately brute force: grid searches, full
enumerations, and the literal step-up rule. Nothing imports from the
library's internals except the public loss evaluator, so a bug in an
optimized code path cannot hide in its own oracle.
"""

import itertools

import numpy as np

from citest.losses import eval_loss


def grid_minimize(loss, sample, grid):
    """Empirical-risk minimizing grid point and its mean loss.

    Scans ``grid`` (scalar predictions) and returns the pair
    (best_point, best_mean_loss) under ``loss`` against ``sample``.
    """
    best_point, best_value = None, np.inf
    for point in grid:
        value = float(np.mean([eval_loss(loss, point, obs) for obs in sample]))
        if value < best_value:
            best_point, best_value = point, value
    return best_point, best_value


def grid_minimize_pmf(loss, codes, n_classes, steps):
    """Grid ERM over the probability simplex.

    Enumerates all pmfs with entries i/steps summing to 1 and returns
    (best_pmf, best_mean_loss) against the class-code sample.
    """
    best_pmf, best_value = None, np.inf
    for pmf in simplex_grid(n_classes, steps):
        value = float(np.mean([eval_loss(loss, pmf, k) for k in codes]))
        if value < best_value:
            best_pmf, best_value = pmf, value
    return best_pmf, best_value


def simplex_grid(n_classes, steps):
    """All pmfs over ``n_classes`` classes with entries that are
    multiples of 1/steps."""
    out = []
    for cuts in itertools.combinations_with_replacement(
        range(steps + 1), n_classes - 1
    ):
        bounds = (0,) + cuts + (steps,)
        parts = np.diff(bounds) / steps
        out.append(np.asarray(parts, dtype=np.float64))
    return out


def regression_risk(kind, alpha, grid, sample):
    """Mean empirical loss of every scalar grid prediction, from formulas.

    Vectorized companion to :func:`grid_minimize` that never touches the
    library; ``kind`` is "squared", "absolute", or "quantile" (pinball at
    level ``alpha``). Returns an array aligned with ``grid``.
    """
    g = np.asarray(grid, dtype=np.float64)[:, None]
    y = np.asarray(sample, dtype=np.float64)[None, :]
    if kind == "squared":
        return np.mean((g - y) ** 2, axis=1)
    if kind == "absolute":
        return np.mean(np.abs(g - y), axis=1)
    if kind == "quantile":
        d = y - g
        return np.mean(
            np.where(d >= 0.0, alpha * d, (alpha - 1.0) * d), axis=1
        )
    raise ValueError(kind)


def classification_risk(kind, pmfs, codes):
    """Mean empirical loss of every candidate pmf, from formulas.

    ``pmfs`` is (G, K); ``codes`` are observed class indices. The log risk
    clamps probabilities at 1e-15 like the tested evaluator so grid points
    with zero entries stay comparable.
    """
    p = np.asarray(pmfs, dtype=np.float64)
    k = np.asarray(codes, dtype=np.intp)
    picked = p[:, k]
    if kind == "log":
        return np.mean(-np.log(np.clip(picked, 1e-15, None)), axis=1)
    if kind == "brier":
        # ||onehot - p||^2 = sum(p^2) - 2 p_k + 1
        sq = np.sum(p**2, axis=1, keepdims=True)
        return np.mean(sq - 2.0 * picked + 1.0, axis=1)
    if kind == "misclass":
        return np.mean(1.0 - picked, axis=1)
    raise ValueError(kind)


def expected_classification_risk(kind, pmfs, q):
    """Population risk of every candidate pmf when the label law is ``q``."""
    p = np.asarray(pmfs, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    if kind == "log":
        return -np.sum(q[None, :] * np.log(np.clip(p, 1e-15, None)), axis=1)
    if kind == "brier":
        return np.sum(p**2, axis=1) - 2.0 * p @ q + 1.0
    if kind == "misclass":
        return 1.0 - p @ q
    raise ValueError(kind)


def wilcoxon_enumerate(diffs):
    """One-sided signed-rank p-value by literal 2^n sign enumeration.

    Zeros are dropped and tied magnitudes get mid-ranks, matching the
    conventions of the tested implementation; the p-value is the fraction
    of the 2^n equally likely sign assignments whose W+ is at least the
    observed one.
    """
    d = np.asarray(diffs, dtype=np.float64)
    d = d[d != 0.0]
    n = d.size
    if n == 0:
        return 1.0
    mags = np.abs(d)
    order = np.argsort(mags, kind="stable")
    ranks = np.empty(n)
    srt = mags[order]
    i = 0
    while i < n:
        j = i
        while j + 1 < n and srt[j + 1] == srt[i]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    w_obs = ranks[d > 0.0].sum()
    # mid-ranks are multiples of 1/2, so all the subset sums are exactly
    # representable and the comparison needs no tolerance
    count = 0
    for signs in itertools.product((0.0, 1.0), repeat=n):
        if float(np.dot(signs, ranks)) >= w_obs:
            count += 1
    return count / 2.0**n


def by_step_up(pvalues, alpha):
    """Literal Benjamini-Hochberg-Yekutieli step-up rejection set."""
    p = np.asarray(pvalues, dtype=np.float64)
    m = p.size
    c_m = sum(1.0 / i for i in range(1, m + 1))
    order = np.argsort(p, kind="stable")
    sorted_p = p[order]
    k = 0
    for i in range(1, m + 1):
        if sorted_p[i - 1] <= i * alpha / (m * c_m):
            k = i
    rejected = np.zeros(m, dtype=bool)
    rejected[order[:k]] = True
    return rejected
