"""Exception hierarchy shared across the package.

Everything user-facing derives from :class:`CitestError` so the CLI can map
expected faults to a clean exit status while genuine bugs still raise.
"""


class CitestError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(CitestError):
    """Malformed input file (ragged row, unparseable or missing cell)."""


class EmptyInput(CitestError):
    """Input file contains no data rows."""


class InsufficientData(CitestError):
    """Too few rows for the requested split or test."""


class ShapeError(CitestError):
    """Mismatched array lengths or feature widths."""


class DomainError(CitestError):
    """Value outside its mathematical domain (e.g. p-value not in [0,1])."""


class NumericError(CitestError):
    """Numerical failure, e.g. a matrix that is not positive definite."""


class DegenerateTarget(CitestError):
    """Classification target with fewer than two classes in training data."""


class MetaFitError(CitestError):
    """Every candidate learner failed; carries the per-candidate causes."""

    def __init__(self, causes):
        self.causes = dict(causes)
        lines = ", ".join(f"{name}: {err}" for name, err in self.causes.items())
        super().__init__(f"all candidate learners failed ({lines})")


class TooFewVariables(CitestError):
    """Skeleton learning needs at least three columns."""


class EmptyBlock(CitestError):
    """An X or Y variable block is empty."""


class ConfigError(CitestError):
    """Invalid configuration value or combination."""
