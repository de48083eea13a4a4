"""Typed columnar datasets: CSV ingestion, encoding, and splitting.

A :class:`Dataset` is an immutable ordered collection of named columns,
each either continuous (finite floats) or categorical (level indices into
an explicit level list). All downstream modules consume these blocks; the
feature encoding and the train/test split both live here so that every
consumer shares the same conventions (training-statistics standardization,
deterministic seeded partitions).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import EmptyInput, InsufficientData, ParseError, ShapeError

DEFAULT_CATEGORICAL_CUTOFF = 10


@dataclass(frozen=True)
class Continuous:
    """Marker kind for real-valued columns."""


@dataclass(frozen=True)
class Categorical:
    """Kind for discrete columns; ``levels`` is the ordered label tuple."""

    levels: tuple

    def __post_init__(self):
        if len(self.levels) < 1:
            raise ValueError("categorical kind needs at least one level")


# A column kind is either Continuous or Categorical.
ColumnKind = Continuous | Categorical


class Column:
    """A named, typed column of ``n_rows`` values.

    Parameters
    ----------
    name : str
        Unique column name.
    kind : ColumnKind
        Continuous() or Categorical(levels).
    values : array-like
        Finite floats for continuous columns; integer level indices in
        ``[0, len(levels))`` for categorical columns.
    """

    __slots__ = ("name", "kind", "values")

    def __init__(self, name, kind, values):
        self.name = str(name)
        self.kind = kind
        if isinstance(kind, Categorical):
            vals = np.asarray(values, dtype=np.int64)
            if vals.size and (vals.min() < 0 or vals.max() >= len(kind.levels)):
                raise ValueError(f"column {name!r}: level index out of range")
        else:
            vals = np.asarray(values, dtype=np.float64)
            if vals.size and not np.all(np.isfinite(vals)):
                raise ValueError(f"column {name!r}: non-finite value")
        vals.setflags(write=False)
        self.values = vals

    @property
    def n_rows(self):
        return self.values.shape[0]

    def is_categorical(self):
        return isinstance(self.kind, Categorical)

    def take(self, indices):
        """Return a new Column restricted to ``indices`` (order preserved)."""
        return Column(self.name, self.kind, self.values[indices])

    def __eq__(self, other):
        if not isinstance(other, Column):
            return NotImplemented
        return (
            self.name == other.name
            and self.kind == other.kind
            and np.array_equal(self.values, other.values)
        )

    def __repr__(self):
        kind = "categorical" if self.is_categorical() else "continuous"
        return f"Column({self.name!r}, {kind}, n={self.n_rows})"


class Dataset:
    """An immutable rectangular table of uniquely named columns."""

    __slots__ = ("columns", "n_rows")

    def __init__(self, columns):
        columns = tuple(columns)
        if not columns:
            raise EmptyInput("dataset needs at least one column")
        names = [c.name for c in columns]
        if len(set(names)) != len(names):
            raise ValueError("duplicate column names")
        n_rows = columns[0].n_rows
        for c in columns:
            if c.n_rows != n_rows:
                raise ShapeError(
                    f"column {c.name!r} has {c.n_rows} rows, expected {n_rows}"
                )
        object.__setattr__(self, "columns", columns)
        object.__setattr__(self, "n_rows", n_rows)

    def __setattr__(self, key, value):
        raise AttributeError("Dataset is immutable")

    @property
    def names(self):
        return [c.name for c in self.columns]

    def column(self, name):
        for c in self.columns:
            if c.name == name:
                return c
        raise KeyError(name)

    def select(self, names):
        """Column subset in the given order."""
        return [self.column(n) for n in names]

    def take(self, indices):
        return Dataset([c.take(indices) for c in self.columns])

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        return self.columns == other.columns

    def __repr__(self):
        return f"Dataset(n_rows={self.n_rows}, columns={self.names})"


@dataclass(frozen=True)
class SplitConfig:
    """Train/test split parameters.

    ``test_fraction`` must lie strictly inside (0, 1); the resulting train
    and test parts must each hold at least two rows.
    """

    test_fraction: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.test_fraction < 1.0:
            raise ValueError("test_fraction must be in (0,1)")
        if self.seed < 0:
            raise ValueError("seed must be a non-negative integer")


def _is_number(text):
    try:
        float(text)
    except ValueError:
        return False
    return True


def infer_column_kind(values, cutoff=DEFAULT_CATEGORICAL_CUTOFF):
    """Infer Continuous vs Categorical for a raw string column.

    A column is categorical iff it is non-numeric, or numeric with at most
    ``cutoff`` distinct values. Numeric categorical levels are ordered by
    their numeric value, other levels lexicographically.

    Parameters
    ----------
    values : sequence of str
        Raw cell texts, already checked non-empty.
    cutoff : int
        Maximum number of distinct numeric values still treated as levels.

    Returns
    -------
    ColumnKind
    """
    if len(values) == 0:
        raise EmptyInput("cannot infer the kind of an empty column")
    texts = [str(v) for v in values]
    numeric = all(_is_number(t) for t in texts)
    distinct = set(texts)
    if numeric:
        if len(distinct) <= cutoff:
            levels = tuple(sorted(distinct, key=float))
            return Categorical(levels)
        return Continuous()
    return Categorical(tuple(sorted(distinct)))


def _read_rows(path):
    with open(path, "r", newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        rows = list(reader)
    rows = [r for r in rows if r]  # ignore fully blank lines
    if not rows:
        raise EmptyInput(f"{path}: empty file")
    return rows


def load_csv(path, schema=None, cutoff=DEFAULT_CATEGORICAL_CUTOFF):
    """Load an RFC-4180 style CSV (header row required) into a Dataset.

    Parameters
    ----------
    path : str or path-like
        CSV file, UTF-8, "." decimal separator.
    schema : dict or None
        Optional per-column overrides, column name -> "continuous" |
        "categorical". Columns not named fall back to inference.
    cutoff : int
        Distinct-value cutoff for numeric columns in kind inference.

    Returns
    -------
    Dataset

    Raises
    ------
    ParseError
        Ragged row, missing cell, unparseable or non-finite numeric cell
        (the message locates the offending row and column).
    EmptyInput
        No header or no data rows.
    """
    rows = _read_rows(path)
    header = rows[0]
    if len(set(header)) != len(header):
        raise ParseError(f"{path}: duplicate column names in header")
    body = rows[1:]
    if not body:
        raise EmptyInput(f"{path}: no data rows")
    width = len(header)
    for i, row in enumerate(body, start=2):  # 1-based file line numbers
        if len(row) != width:
            raise ParseError(
                f"{path}: row {i} has {len(row)} fields, expected {width}"
            )
        for j, cell in enumerate(row):
            if cell.strip() == "":
                raise ParseError(
                    f"{path}: missing value at row {i}, column {header[j]!r}"
                )
    schema = dict(schema or {})
    unknown = set(schema) - set(header)
    if unknown:
        raise ParseError(f"{path}: schema names unknown columns {sorted(unknown)}")

    columns = []
    for j, name in enumerate(header):
        raw = [row[j].strip() for row in body]
        override = schema.get(name)
        if override is None:
            kind = infer_column_kind(raw, cutoff=cutoff)
        elif override == "continuous":
            kind = Continuous()
        elif override == "categorical":
            numeric = all(_is_number(t) for t in raw)
            key = float if numeric else str
            kind = Categorical(tuple(sorted(set(raw), key=key)))
        else:
            raise ParseError(
                f"{path}: schema for {name!r} must be 'continuous' or "
                f"'categorical', got {override!r}"
            )
        if isinstance(kind, Continuous):
            vals = np.empty(len(raw), dtype=np.float64)
            for i, text in enumerate(raw):
                try:
                    vals[i] = float(text)
                except ValueError:
                    raise ParseError(
                        f"{path}: unparseable number {text!r} at row {i + 2}, "
                        f"column {name!r}"
                    ) from None
            bad = np.flatnonzero(~np.isfinite(vals))
            if bad.size:
                raise ParseError(
                    f"{path}: non-finite value at row {int(bad[0]) + 2}, "
                    f"column {name!r}"
                )
            columns.append(Column(name, kind, vals))
        else:
            index = {lvl: k for k, lvl in enumerate(kind.levels)}
            try:
                codes = np.array([index[t] for t in raw], dtype=np.int64)
            except KeyError as exc:
                raise ParseError(
                    f"{path}: value {exc.args[0]!r} of column {name!r} not in "
                    f"schema levels"
                ) from None
            columns.append(Column(name, kind, codes))
    return Dataset(columns)


def _format_float(x):
    # repr gives the shortest round-tripping decimal
    return repr(float(x))


def export_csv(dataset, path):
    """Write a Dataset back to CSV (inverse of load_csv up to kind inference).

    Continuous cells use the shortest round-tripping decimal; categorical
    cells are written as their level labels. Use :func:`dataset_schema` as
    the schema argument when reloading to reproduce kinds exactly.
    """
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(dataset.names)
        cells = []
        for c in dataset.columns:
            if c.is_categorical():
                levels = c.kind.levels
                cells.append([str(levels[k]) for k in c.values])
            else:
                cells.append([_format_float(v) for v in c.values])
        for i in range(dataset.n_rows):
            writer.writerow([col[i] for col in cells])


def dataset_schema(dataset):
    """Schema override dict reproducing the dataset's column kinds."""
    return {
        c.name: "categorical" if c.is_categorical() else "continuous"
        for c in dataset.columns
    }


class FeatureEncoder:
    """Column block -> numeric design matrix, fitted on training rows.

    Continuous columns are standardized with the training mean and
    population standard deviation (zero-variance columns encode to zeros).
    Categorical columns expand to one indicator feature per level. The
    column-to-feature mapping is recorded in ``feature_names``.
    """

    __slots__ = ("_specs", "feature_names", "n_features")

    def __init__(self, specs, feature_names):
        self._specs = specs
        self.feature_names = feature_names
        self.n_features = len(feature_names)

    @classmethod
    def fit(cls, block):
        if not block:
            raise ShapeError("cannot encode an empty column block")
        specs = []
        names = []
        for c in block:
            if c.is_categorical():
                specs.append(("onehot", c.name, len(c.kind.levels)))
                names.extend(f"{c.name}={lvl}" for lvl in c.kind.levels)
            else:
                mean = float(np.mean(c.values)) if c.n_rows else 0.0
                std = float(np.std(c.values)) if c.n_rows else 0.0
                specs.append(("standardize", c.name, mean, std))
                names.append(c.name)
        return cls(tuple(specs), tuple(names))

    def transform(self, block):
        """Encode ``block``, matched positionally to the fitted block."""
        if len(block) != len(self._specs):
            raise ShapeError("block width differs from the fitted block")
        n_rows = block[0].n_rows
        out = np.empty((n_rows, self.n_features), dtype=np.float64)
        col = 0
        for spec, c in zip(self._specs, block):
            if spec[0] != ("onehot" if c.is_categorical() else "standardize"):
                raise ShapeError(f"column {c.name!r} kind differs from fit time")
            if spec[0] == "onehot":
                n_levels = spec[2]
                sub = np.zeros((n_rows, n_levels))
                sub[np.arange(n_rows), c.values] = 1.0
                out[:, col : col + n_levels] = sub
                col += n_levels
            else:
                mean, std = spec[2], spec[3]
                if std > 0.0:
                    out[:, col] = (c.values - mean) / std
                else:
                    out[:, col] = 0.0
                col += 1
        return out


def encode_features(block):
    """Encode a column block; returns (matrix, fitted encoder).

    The encoder's statistics come from ``block`` itself, so call this on
    training columns and reuse ``encoder.transform`` for test columns.
    """
    enc = FeatureEncoder.fit(block)
    return enc.transform(block), enc


def split_indices(n_rows, test_fraction, seed):
    """Row indices of the deterministic (train, test) partition.

    The assignment depends only on ``(n_rows, seed)``; indices come back
    sorted so row order inside each part follows the original data.

    Raises
    ------
    InsufficientData
        If either side of the partition would hold fewer than two rows.
    """
    n_test = int(round(n_rows * test_fraction))
    n_train = n_rows - n_test
    if min(n_train, n_test) < 2:
        raise InsufficientData(
            f"cannot split {n_rows} rows into train/test of at least 2 rows "
            f"each at test_fraction={test_fraction}"
        )
    rng = np.random.default_rng(np.random.SeedSequence((seed, n_rows)))
    perm = rng.permutation(n_rows)
    return np.sort(perm[n_test:]), np.sort(perm[:n_test])


def split(dataset, config):
    """Deterministically partition rows into (train, test) Datasets."""
    train_idx, test_idx = split_indices(
        dataset.n_rows, config.test_fraction, config.seed
    )
    return dataset.take(train_idx), dataset.take(test_idx)
