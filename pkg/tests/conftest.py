import os

# Cap BLAS threads before numpy loads: the solvers work on small matrices
# where threaded BLAS is dramatically slower, and single-threaded runs are
# bitwise reproducible.
os.environ.setdefault("KFMC_THREADS", "1")

import numpy as np  # noqa: E402
import pytest  # noqa: E402


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
