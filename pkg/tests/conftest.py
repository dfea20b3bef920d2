import numpy as np
import pytest

from rowblock.matrix import _csr_from_coo


def random_csr(rng, n_rows, n_cols, density, positive=True):
    """Uniform random pattern with the requested density; values are
    positive by default so relative-error checks are well conditioned."""
    nnz = min(n_rows * n_cols, max(1, round(density * n_rows * n_cols)))
    keys = rng.choice(n_rows * n_cols, size=nnz, replace=False)
    vals = rng.uniform(0.1, 1.0, size=nnz)
    if not positive:
        vals *= rng.choice([-1.0, 1.0], size=nnz)
    return _csr_from_coo(n_rows, n_cols, keys // n_cols, keys % n_cols,
                         vals, sum_duplicates=False)


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)
