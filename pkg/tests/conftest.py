import numpy as np
import pytest

from torusop.catalog import catalog_symbol
from torusop.fourier import TorusGrid
from torusop.quantize import bandwidth


def resolved_symbol(name, n, J, K, N_max=128):
    """Catalog symbol on the smallest power-of-two grid with K + bandwidth <= N/2."""
    N = 16
    while True:
        s = catalog_symbol(name, TorusGrid(n, N), J)
        if K + bandwidth(s) <= N // 2 or N >= N_max:
            return s
        N *= 2


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_band_limited(grid, band, rng):
    """Random complex coefficients on |k|_inf <= band, zero elsewhere."""
    c = np.zeros(grid.shape, np.complex128)
    ks = np.meshgrid(*([np.arange(-band, band + 1)] * grid.n), indexing="ij")
    idx = tuple(k.ravel() % grid.N for k in ks)
    c[idx] = rng.standard_normal(idx[0].size) + 1j * rng.standard_normal(idx[0].size)
    return c
