import os

# module CONFIG sections read the environment at import time
os.environ.setdefault('CSD_SVM_QUIET', '1')

import numpy as np
import pytest

from censoring import uniform_censoring
from solver import Dataset


@pytest.fixture
def two_point():
    """z = (1, 2), delta = (0, 0), g = 1, the smallest fully hand-checkable fit."""
    data = Dataset(np.array([[1.0], [2.0]]), np.array([0.5, 0.5]), np.array([0, 0]), 1.0)
    return data, uniform_censoring(1.0)


@pytest.fixture
def random_data():
    def make(n=30, d=2, tau=1.0, seed=0):
        rng = np.random.default_rng(seed)
        Z = rng.random((n, d))
        c = tau * rng.random(n)
        t = tau * rng.random(n)
        return Dataset(Z, c, (t <= c).astype(int), tau)
    return make


@pytest.fixture
def write_csv(tmp_path):
    def write(name, text):
        path = tmp_path / name
        path.write_text(text, encoding='utf-8')
        return str(path)
    return write
