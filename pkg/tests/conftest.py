import os
import sys

import numpy as np
import pytest
from hypothesis import settings

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


@pytest.fixture(scope="session", autouse=True)
def _warm_kernels():
    # Compile the numba kernels once so that timed tests measure steady state.
    from mdlhist.dataset import DataSet
    from mdlhist.optimizer import build_standard

    build_standard(DataSet.from_values(np.linspace(0.0, 1.0, 50)), force_E=64)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
