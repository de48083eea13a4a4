"""Undirected graphical-model skeleton estimation.

Every unordered column pair {i, j} is tested for conditional independence
given all remaining columns with the symmetric predictive test; the pair's
p-value is that test's overall (inner-adjusted minimum) p-value. One outer
Benjamini-Hochberg-Yekutieli pass across the p(p-1)/2 pair p-values then
controls the edge false-discovery rate, and the adjacency matrix holds the
surviving pairs.

Pair seeds are derived by hashing the master seed with the two column
names, so pair tests are independent of column order and of any parallel
schedule: permuting the dataset's columns permutes the p-value matrix
entry for entry.
"""

from __future__ import annotations

import hashlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from . import pcit as _pcit
from .errors import ConfigError, TooFewVariables
from .inference import by_adjust


@dataclass(frozen=True)
class SkeletonResult:
    """Symmetric p-value/adjacency matrices (diagonals are NaN/False)."""

    variables: tuple
    p_matrix: np.ndarray
    adjusted_matrix: np.ndarray
    adjacency: np.ndarray
    alpha: float
    pooling: str

    def edges(self):
        """Sorted list of adjacent name pairs."""
        out = []
        p = len(self.variables)
        for i in range(p):
            for j in range(i + 1, p):
                if self.adjacency[i, j]:
                    out.append((self.variables[i], self.variables[j]))
        return out


def pair_seed(master_seed, name_a, name_b):
    """Deterministic seed for an unordered column pair, keyed by name."""
    lo, hi = sorted((str(name_a), str(name_b)))
    digest = hashlib.sha256(
        f"{int(master_seed)}|{lo}|{hi}".encode("utf-8")
    ).digest()
    return int.from_bytes(digest[:8], "big")


def find_neighbours(dataset, config=None, seed=0, threads=1, pooling="nested"):
    """Estimate the skeleton of the dataset's undirected graphical model.

    Parameters
    ----------
    dataset : Dataset
        At least three columns; each pair is tested given all the others.
    config : PcitConfig, optional
        The inner test always runs symmetric regardless of
        ``config.symmetric``.
    seed : int
        Master seed; pair seeds derive from it and the pair's names.
    threads : int
        Worker cap for the embarrassingly parallel pair tests; results do
        not depend on it.
    pooling : str
        "nested" (default): outer BY pass over the per-pair overall
        p-values. "flat": a single BY pass over every raw prediction-null
        p-value of every pair; a pair is adjacent iff any of its
        hypotheses is rejected.

    Returns
    -------
    SkeletonResult
    """
    config = config or _pcit.PcitConfig()
    if not config.symmetric:
        config = replace(config, symmetric=True)
    if pooling not in ("nested", "flat"):
        raise ConfigError(f"pooling must be 'nested' or 'flat', got {pooling!r}")
    names = dataset.names
    p = len(names)
    if p < 3:
        raise TooFewVariables(
            "skeleton learning needs at least 3 columns; with 2 columns the "
            "conditioning set is empty, use pcit_test directly"
        )
    pairs = [(i, j) for i in range(p) for j in range(i + 1, p)]

    def run_pair(pair):
        i, j = pair
        rest = [c for k, c in enumerate(dataset.columns) if k != i and k != j]
        return _pcit.pcit_test(
            [dataset.columns[i]],
            [dataset.columns[j]],
            rest,
            config,
            pair_seed(seed, names[i], names[j]),
        )

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run_pair, pairs))
    else:
        results = [run_pair(pair) for pair in pairs]

    p_matrix = np.full((p, p), np.nan)
    adjusted = np.full((p, p), np.nan)
    adjacency = np.zeros((p, p), dtype=bool)

    if pooling == "nested":
        fdr = by_adjust([r.overall_p for r in results], config.alpha)
        for (i, j), raw, adj, rej in zip(
            pairs, fdr.raw, fdr.adjusted, fdr.rejected
        ):
            p_matrix[i, j] = p_matrix[j, i] = raw
            adjusted[i, j] = adjusted[j, i] = adj
            adjacency[i, j] = adjacency[j, i] = bool(rej)
    else:
        raw_all, owner = [], []
        for idx, r in enumerate(results):
            for pn in r.prediction_nulls:
                raw_all.append(pn.raw_p)
                owner.append(idx)
        fdr = by_adjust(raw_all, config.alpha)
        owner = np.asarray(owner)
        for idx, (i, j) in enumerate(pairs):
            mask = owner == idx
            p_matrix[i, j] = p_matrix[j, i] = float(fdr.raw[mask].min())
            adjusted[i, j] = adjusted[j, i] = float(fdr.adjusted[mask].min())
            adjacency[i, j] = adjacency[j, i] = bool(fdr.rejected[mask].any())

    return SkeletonResult(
        tuple(names), p_matrix, adjusted, adjacency, config.alpha, pooling
    )


def _dot_id(name):
    text = str(name)
    if text and (text[0].isalpha() or text[0] == "_"):
        if all(ch.isalnum() or ch == "_" for ch in text):
            return text
    escaped = text.replace("\\", "\\\\").replace('"', '\\"')
    return f'"{escaped}"'


def export_dot(result):
    """Render a SkeletonResult as an undirected Graphviz DOT document.

    One node per variable, one edge per adjacency entry, edge labels carry
    the adjusted p-value to four significant digits.
    """
    lines = ["graph skeleton {"]
    for name in result.variables:
        lines.append(f"  {_dot_id(name)};")
    p = len(result.variables)
    for i in range(p):
        for j in range(i + 1, p):
            if result.adjacency[i, j]:
                label = format(result.adjusted_matrix[i, j], ".4g")
                lines.append(
                    f"  {_dot_id(result.variables[i])} -- "
                    f"{_dot_id(result.variables[j])} [label=\"{label}\"];"
                )
    lines.append("}")
    return "\n".join(lines) + "\n"
