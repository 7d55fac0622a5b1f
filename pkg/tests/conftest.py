import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from mixedcausal.model import MixedDataset, VariableMeta
from mixedcausal.simulate import make_rng


@pytest.fixture
def rng():
    return make_rng(12345)


def mixed_dataset(n=200, seed=0, n_cont=3, n_disc=2, k=3):
    """Independent columns; handy for regression-level tests."""
    rng = make_rng(seed)
    metas, cols = [], []
    for i in range(n_cont):
        metas.append(VariableMeta(f"C{i}"))
        cols.append(rng.normal(size=n))
    for i in range(n_disc):
        metas.append(VariableMeta(f"D{i}", tuple(str(j) for j in range(k))))
        cols.append(rng.integers(0, k, n).astype(np.int32))
    return MixedDataset(metas, cols)


@pytest.fixture
def small_mixed():
    return mixed_dataset()
