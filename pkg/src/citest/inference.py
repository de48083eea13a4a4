"""Significance machinery for paired predictor comparison.

Given per-row losses of a baseline and a candidate predictor on the same
test rows, the difference vector R_i = L_i(baseline) - L_i(candidate) is
positive where the candidate wins. Two one-sided tests of E[R] > 0 are
provided: a paired t-test and the Wilcoxon signed-rank test (exact for
small effective sample sizes, normal approximation with tie correction
above). Families of such p-values are pooled under
Benjamini-Hochberg-Yekutieli false-discovery-rate control, which is valid
under arbitrary dependence between the tests.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats as _st

from .errors import DomainError, InsufficientData, ShapeError
from .losses import loss_values

# Largest effective sample size for which the exact Wilcoxon null
# distribution is enumerated; beyond it the normal approximation is used.
WILCOXON_EXACT_LIMIT = 20


@dataclass(frozen=True)
class PairedResiduals:
    """Differences R_i of paired loss residuals, with summary statistics.

    ``mean`` is the arithmetic mean of ``diffs`` and ``stddev`` the sample
    standard deviation (divisor M - 1).
    """

    diffs: np.ndarray
    mean: float
    stddev: float
    loss: object


@dataclass(frozen=True)
class FdrResult:
    """Outcome of one Benjamini-Hochberg-Yekutieli pass.

    ``adjusted`` are step-up adjusted p-values: thresholding them at any
    level reproduces the step-up rejection set at that level. ``c_m`` is
    the harmonic correction sum(1/i, i=1..m).
    """

    raw: np.ndarray
    adjusted: np.ndarray
    rejected: np.ndarray
    alpha: float
    c_m: float


def paired_residuals(loss, baseline_preds, candidate_preds, observed):
    """Rowwise loss differences baseline-minus-candidate.

    Parameters
    ----------
    loss : LossFunction
    baseline_preds, candidate_preds : array-like
        Predictions of the two functionals on the same M >= 2 test rows.
    observed : array-like
        Ground-truth values for those rows.

    Returns
    -------
    PairedResiduals

    Raises
    ------
    ShapeError
        Length mismatch between the three inputs.
    InsufficientData
        Fewer than two rows.
    """
    lb = loss_values(loss, baseline_preds, observed)
    lc = loss_values(loss, candidate_preds, observed)
    if lb.shape != lc.shape:
        raise ShapeError("prediction vectors differ in length")
    diffs = lb - lc
    if diffs.size < 2:
        raise InsufficientData("paired comparison needs at least 2 rows")
    return PairedResiduals(
        diffs, float(np.mean(diffs)), float(np.std(diffs, ddof=1)), loss
    )


def t_test_one_sided(r):
    """One-sided paired t-test p-value for the alternative E[R] > 0.

    The statistic is mean * sqrt(M) / stddev with M - 1 degrees of
    freedom. A zero stddev degenerates to p = 0 for a positive mean and
    p = 1 otherwise.
    """
    m = r.diffs.size
    if m < 2:
        raise InsufficientData("t-test needs at least 2 differences")
    if r.stddev == 0.0:
        return 0.0 if r.mean > 0.0 else 1.0
    t = r.mean * np.sqrt(m) / r.stddev
    return float(_st.t.sf(t, m - 1))


def _midranks(x):
    # average ranks (1-based) with ties sharing their mid-rank
    order = np.argsort(x, kind="stable")
    ranks = np.empty(x.size, dtype=np.float64)
    sorted_x = x[order]
    i = 0
    while i < x.size:
        j = i
        while j + 1 < x.size and sorted_x[j + 1] == sorted_x[i]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def _wilcoxon_exact_sf(doubled_ranks, doubled_w):
    # P(W >= w) under uniform random signs, by convolving the exact
    # distribution of the doubled statistic (doubling makes mid-ranks
    # integral, so the enumeration over all 2^n sign patterns is a small
    # integer DP rather than a literal loop).
    total = int(np.sum(doubled_ranks))
    counts = np.zeros(total + 1, dtype=np.float64)
    counts[0] = 1.0
    for t in doubled_ranks:
        t = int(t)
        shifted = np.zeros_like(counts)
        shifted[t:] = counts[: total + 1 - t]
        counts = counts + shifted
    tail = counts[max(doubled_w, 0) :].sum()
    return float(tail / counts.sum())


def wilcoxon_one_sided(r):
    """One-sided Wilcoxon signed-rank p-value for a positive shift.

    Zero differences are dropped; ties in |R| get mid-ranks. With at most
    ``WILCOXON_EXACT_LIMIT`` nonzero differences the exact sign-enumeration
    null distribution is used, otherwise a normal approximation with
    tie-corrected variance and a 0.5 continuity correction. All-zero
    differences carry no evidence and give p = 1.
    """
    if r.diffs.size < 2:
        raise InsufficientData("Wilcoxon test needs at least 2 differences")
    d = r.diffs[r.diffs != 0.0]
    n = d.size
    if n == 0:
        return 1.0
    ranks = _midranks(np.abs(d))
    w_plus = float(ranks[d > 0.0].sum())
    if n <= WILCOXON_EXACT_LIMIT:
        doubled = np.rint(2.0 * ranks).astype(np.int64)
        return _wilcoxon_exact_sf(doubled, int(np.rint(2.0 * w_plus)))
    mean = n * (n + 1) / 4.0
    var = n * (n + 1) * (2 * n + 1) / 24.0
    _, tie_counts = np.unique(np.abs(d), return_counts=True)
    var -= float(np.sum(tie_counts**3 - tie_counts)) / 48.0
    z = (w_plus - mean - 0.5) / np.sqrt(var)
    return float(_st.norm.sf(z))


def by_adjust(pvalues, alpha):
    """Benjamini-Hochberg-Yekutieli step-up FDR control.

    Sorting the m p-values ascending, the step-up rule rejects hypotheses
    1..k where k = max(i : p_(i) <= (i/m) * alpha / c_m) and
    c_m = sum(1/i). The returned adjusted values
    p~_(i) = min(1, min_{j>=i} (m * c_m / j) * p_(j)) reproduce that set
    when thresholded at alpha, for every alpha.

    Parameters
    ----------
    pvalues : array-like of float
        Raw p-values, each in [0, 1], m >= 1.
    alpha : float
        Target false-discovery rate in (0, 1).

    Returns
    -------
    FdrResult

    Raises
    ------
    DomainError
        A p-value outside [0, 1] or alpha outside (0, 1).
    """
    raw = np.asarray(pvalues, dtype=np.float64).reshape(-1)
    if raw.size == 0:
        raise DomainError("by_adjust needs at least one p-value")
    if np.any(raw < 0.0) or np.any(raw > 1.0) or np.any(~np.isfinite(raw)):
        raise DomainError("p-values must lie in [0,1]")
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must be in (0,1), got {alpha}")
    m = raw.size
    c_m = float(np.sum(1.0 / np.arange(1, m + 1)))
    order = np.argsort(raw, kind="stable")
    scaled = raw[order] * (m * c_m / np.arange(1, m + 1))
    adjusted_sorted = np.minimum(np.minimum.accumulate(scaled[::-1])[::-1], 1.0)
    adjusted = np.empty(m, dtype=np.float64)
    adjusted[order] = adjusted_sorted
    rejected = adjusted <= alpha
    return FdrResult(raw, adjusted, rejected, float(alpha), c_m)
