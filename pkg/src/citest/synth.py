"""Synthetic data generators and the benchmark harness.

Three generators drive the test batteries and benchmarks:

* sparse Gaussian graphical models built from a diagonally dominant random
  precision matrix (zero off-diagonal entries are exactly the non-edges,
  i.e. zero partial correlations);
* a conditional-dependence triple where X and Y are independent draws but
  Z = log(X') * exp(Y') + u * sqrt(noise') ties them together given Z;
* a regression pair that is dependent yet mean-blind: the best squared-loss
  predictor of Y from X is a constant, while the conditional quartiles
  differ, so only quantile losses can see the dependence.

The experiment runners score skeleton recovery (power, false-discovery
rate) and conditional-test power over sample-size grids, with binomial
standard errors and per-run wall times.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np
from scipy import linalg as _sl

from . import pcit as _pcit
from . import skeleton as _skeleton
from .data import Column, Continuous, Dataset
from .errors import ConfigError, DomainError, InsufficientData, NumericError


@dataclass(frozen=True)
class SyntheticGraphSpec:
    """Sparse-precision Gaussian graph parameters.

    ``density`` is the target fraction of the p(p-1)/2 possible edges;
    off-diagonal magnitudes are drawn uniformly from [min_abs, 1) with
    random signs, and the diagonal is set to the row-wise absolute sum
    plus 0.5, which certifies positive definiteness by dominance.
    """

    p: int
    density: float
    min_abs: float = 0.2
    seed: int = 0

    def __post_init__(self):
        if self.p < 2:
            raise ConfigError("p must be at least 2")
        if not 0.0 <= self.density <= 1.0:
            raise ConfigError("density must be in [0,1]")
        if not 0.0 < self.min_abs < 1.0:
            raise ConfigError("min_abs must be in (0,1)")


@dataclass(frozen=True)
class RunRecord:
    """One benchmark replication."""

    seed: int
    n: int
    found_edges: int
    true_edges: int
    false_edges: int
    power: float
    fdr: float
    time_ms: float


@dataclass(frozen=True)
class Aggregate:
    """Per-sample-size summary with binomial standard errors."""

    n: int
    power: float
    power_se: float
    fdr: float
    fdr_se: float
    time_ms: float


@dataclass(frozen=True)
class BenchmarkReport:
    kind: str
    method: str
    master_seed: int
    reps: int
    runs: tuple
    aggregates: tuple


def sample_sparse_precision(spec):
    """Draw a random sparse symmetric positive-definite precision matrix.

    The number of off-diagonal support pairs equals
    round(density * p(p-1)/2) exactly; the support pattern is the ground
    truth edge set.
    """
    rng = np.random.default_rng(np.random.SeedSequence((spec.seed, 0x9D)))
    p = spec.p
    pairs = [(i, j) for i in range(p) for j in range(i + 1, p)]
    k = int(round(spec.density * len(pairs)))
    m = np.zeros((p, p))
    if k > 0:
        chosen = rng.choice(len(pairs), size=k, replace=False)
        magnitudes = rng.uniform(spec.min_abs, 1.0, size=k)
        signs = rng.choice([-1.0, 1.0], size=k)
        for idx, mag, sign in zip(chosen, magnitudes, signs):
            i, j = pairs[idx]
            m[i, j] = m[j, i] = sign * mag
    np.fill_diagonal(m, np.abs(m).sum(axis=1) + 0.5)
    return m


def true_edges(precision):
    """Unordered index pairs with nonzero off-diagonal precision."""
    p = precision.shape[0]
    return {
        (i, j)
        for i in range(p)
        for j in range(i + 1, p)
        if precision[i, j] != 0.0
    }


def precision_to_covariance(matrix):
    """Invert an SPD matrix via its Cholesky factorization.

    Raises
    ------
    NumericError
        If the input is not symmetric positive definite.
    """
    m = np.asarray(matrix, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise NumericError("precision matrix must be square")
    if not np.allclose(m, m.T, atol=1e-10):
        raise NumericError("precision matrix must be symmetric")
    try:
        factor = _sl.cho_factor(m, lower=True)
    except _sl.LinAlgError:
        raise NumericError("precision matrix is not positive definite") from None
    cov = _sl.cho_solve(factor, np.eye(m.shape[0]))
    return 0.5 * (cov + cov.T)  # symmetrize away round-off


def sample_mvn(cov, n, seed):
    """n i.i.d. rows from N(0, cov) via the Cholesky factor."""
    if n < 1:
        raise ConfigError("n must be at least 1")
    c = np.asarray(cov, dtype=np.float64)
    try:
        chol = np.linalg.cholesky(c)
    except np.linalg.LinAlgError:
        raise NumericError("covariance matrix is not positive definite") from None
    rng = np.random.default_rng(np.random.SeedSequence((seed, 0x34A)))
    return rng.standard_normal((n, c.shape[0])) @ chol.T


def gaussian_dataset(cov, n, seed, prefix="x"):
    """Wrap :func:`sample_mvn` rows into a Dataset of continuous columns."""
    rows = sample_mvn(cov, n, seed)
    return Dataset(
        [
            Column(f"{prefix}{j + 1}", Continuous(), rows[:, j])
            for j in range(rows.shape[1])
        ]
    )


def make_cond_dep_dataset(n, seed, sources=None):
    """The marginal-independence / conditional-dependence construction.

    X, Y and the noise column are independent draws (by default X and
    noise are log-normal(0,1) and Y is uniform(0.5,1.5); alternatively
    they are resampled with replacement from two supplied strictly
    positive source columns), and

        Z = log(X) * exp(Y) + u * sqrt(noise)

    with u an independent uniform sign per row. X and Y are marginally
    independent by construction but dependent given Z.

    Returns
    -------
    (Column, Column, Column, Column)
        The x, y, z and noise columns, n rows each.
    """
    if n < 10:
        raise InsufficientData("need at least 10 rows")
    rng = np.random.default_rng(np.random.SeedSequence((seed, 0xCDD)))
    if sources is None:
        x = rng.lognormal(0.0, 1.0, size=n)
        y = rng.uniform(0.5, 1.5, size=n)
        noise = rng.lognormal(0.0, 1.0, size=n)
    else:
        x_src = np.asarray(sources[0], dtype=np.float64).reshape(-1)
        y_src = np.asarray(sources[1], dtype=np.float64).reshape(-1)
        if np.any(x_src <= 0.0) or np.any(y_src <= 0.0):
            raise DomainError("source columns must be strictly positive")
        x = rng.choice(x_src, size=n, replace=True)
        y = rng.choice(y_src, size=n, replace=True)
        noise = rng.choice(x_src, size=n, replace=True)
    u = rng.choice([-1.0, 1.0], size=n)
    z = np.log(x) * np.exp(y) + u * np.sqrt(noise)
    return (
        Column("x", Continuous(), x),
        Column("y", Continuous(), y),
        Column("z", Continuous(), z),
        Column("noise", Continuous(), noise),
    )


def make_unfaithful_example(n, seed):
    """Dependent (X, Y) that squared loss cannot see.

    X is a uniform sign; given X = 1, Y is a fair draw from {-1, +1}
    (mean zero), and given X = -1, Y is exactly 0. Both conditional means
    equal the marginal mean, so the best squared-loss predictor of Y from
    X is the constant 0, yet the conditional quartiles differ by 1.
    """
    if n < 10:
        raise InsufficientData("need at least 10 rows")
    rng = np.random.default_rng(np.random.SeedSequence((seed, 0x0F)))
    x = rng.choice([-1.0, 1.0], size=n)
    coin = rng.choice([-1.0, 1.0], size=n)
    y = np.where(x > 0.0, coin, 0.0)
    return Column("x", Continuous(), x), Column("y", Continuous(), y)


def _binomial_se(rate, count):
    return float(np.sqrt(max(rate * (1.0 - rate), 0.0) / count))


def _aggregate(kind, method, master_seed, reps, runs):
    by_n = {}
    for run in runs:
        by_n.setdefault(run.n, []).append(run)
    aggregates = []
    for n in sorted(by_n):
        group = by_n[n]
        power = float(np.mean([r.power for r in group]))
        fdr = float(np.mean([r.fdr for r in group]))
        aggregates.append(
            Aggregate(
                n=n,
                power=power,
                power_se=_binomial_se(power, len(group)),
                fdr=fdr,
                fdr_se=_binomial_se(fdr, len(group)),
                time_ms=float(np.mean([r.time_ms for r in group])),
            )
        )
    return BenchmarkReport(
        kind=kind,
        method=method,
        master_seed=master_seed,
        reps=reps,
        runs=tuple(runs),
        aggregates=tuple(aggregates),
    )


def _run_indexed(jobs, threads):
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(lambda job: job(), jobs))
    return [job() for job in jobs]


def run_fdr_experiment(graph_spec, n_grid, reps, config=None, threads=1):
    """Skeleton recovery benchmark over a sample-size grid.

    For every n in the grid and every replication a fresh graph and
    dataset are drawn, the skeleton is estimated, and the found edge set
    is scored against the true support: power = found-true / total-true,
    FDR = false / max(1, found).
    """
    if reps < 1:
        raise ConfigError("reps must be at least 1")
    if not n_grid:
        raise ConfigError("n_grid must be non-empty")
    config = config or _pcit.PcitConfig()
    n_grid = [int(n) for n in n_grid]

    def make_job(ni, n, rep):
        ss = np.random.SeedSequence((graph_spec.seed, 0xFD, ni, rep))
        graph_seed, data_seed, test_seed = [
            int(s.generate_state(1, np.uint64)[0]) for s in ss.spawn(3)
        ]

        def job():
            start = time.perf_counter()
            precision = sample_sparse_precision(replace(graph_spec, seed=graph_seed))
            truth = true_edges(precision)
            cov = precision_to_covariance(precision)
            dataset = gaussian_dataset(cov, n, data_seed)
            skel = _skeleton.find_neighbours(dataset, config, test_seed)
            names = dataset.names
            index = {name: k for k, name in enumerate(names)}
            found = {
                (index[a], index[b]) for a, b in skel.edges()
            }
            hits = len(found & truth)
            false = len(found - truth)
            elapsed = (time.perf_counter() - start) * 1000.0
            power = hits / len(truth) if truth else 1.0
            return RunRecord(
                seed=test_seed,
                n=n,
                found_edges=len(found),
                true_edges=len(truth),
                false_edges=false,
                power=power,
                fdr=false / max(1, len(found)),
                time_ms=elapsed,
            )

        return job

    jobs = [
        make_job(ni, n, rep)
        for ni, n in enumerate(n_grid)
        for rep in range(reps)
    ]
    runs = _run_indexed(jobs, threads)
    return _aggregate(
        "fdr", config.meta.method, graph_spec.seed, reps, runs
    )


def run_power_experiment(n_grid, reps, config=None, seed=0, threads=1):
    """Conditional-test power benchmark on the log-times-exp construction.

    Each run draws a fresh (X, Y, Z) triple and tests X independent of Y
    given Z; power at a sample size is the fraction of runs that reject.
    """
    if reps < 1:
        raise ConfigError("reps must be at least 1")
    if not n_grid:
        raise ConfigError("n_grid must be non-empty")
    config = config or _pcit.PcitConfig()
    n_grid = [int(n) for n in n_grid]

    def make_job(ni, n, rep):
        ss = np.random.SeedSequence((seed, 0x40E, ni, rep))
        data_seed, test_seed = [
            int(s.generate_state(1, np.uint64)[0]) for s in ss.spawn(2)
        ]

        def job():
            start = time.perf_counter()
            x, y, z, _ = make_cond_dep_dataset(n, data_seed)
            result = _pcit.pcit_test([x], [y], [z], config, test_seed)
            elapsed = (time.perf_counter() - start) * 1000.0
            rejected = 0 if result.independent else 1
            return RunRecord(
                seed=test_seed,
                n=n,
                found_edges=rejected,
                true_edges=1,
                false_edges=0,
                power=float(rejected),
                fdr=0.0,
                time_ms=elapsed,
            )

        return job

    jobs = [
        make_job(ni, n, rep)
        for ni, n in enumerate(n_grid)
        for rep in range(reps)
    ]
    runs = _run_indexed(jobs, threads)
    return _aggregate("power", config.meta.method, seed, reps, runs)
