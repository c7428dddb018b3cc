import numpy as np
import pytest

from tmfusion import BinaryDataset, HyperParams


@pytest.fixture
def xor_data() -> BinaryDataset:
    X = np.array([[0, 0], [0, 1], [1, 0], [1, 1]], dtype=np.uint8)
    labels = [0, 1, 1, 0]
    return BinaryDataset(["a", "b"], X, labels, np.arange(4, dtype=np.int64))


@pytest.fixture
def small_params() -> HyperParams:
    return HyperParams(clauses_per_class=4, threshold=2, specificity=3.9,
                       ta_states=100, epochs=100, seed=0)
