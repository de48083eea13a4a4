import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from citest.data import Categorical, Column, Continuous, Dataset


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def make_continuous(name, values):
    return Column(name, Continuous(), np.asarray(values, dtype=np.float64))


def make_categorical(name, codes, levels):
    return Column(name, Categorical(tuple(levels)), codes)


def toy_dataset(n=40, seed=0):
    """Three independent continuous columns plus a binary label."""
    r = np.random.default_rng(seed)
    cols = [make_continuous(name, r.normal(size=n)) for name in ("a", "b", "c")]
    cols.append(make_categorical("lab", r.integers(0, 2, size=n), ("no", "yes")))
    return Dataset(cols)
