import numpy as np
import pytest

from torusop import fourier as fc
from torusop.catalog import (CatalogError, catalog_names, catalog_symbol, get_entry,
                             random_trig_symbol)
from torusop.fourier import TorusGrid

NAMES = ["constant", "multiplication", "j-decay", "analytic-pole", "bump", "random-trig"]


def test_catalog_lists_all_families():
    assert catalog_names() == NAMES


@pytest.mark.parametrize("name", NAMES)
@pytest.mark.parametrize("n", [1, 2, 3])
def test_every_family_builds_in_every_dimension(name, n):
    s = catalog_symbol(name, TorusGrid(n, 8 if n == 3 else 16), 1)
    assert s.n == n
    assert np.all(np.isfinite(s.coeffs))


def test_orders():
    assert get_entry("constant").order_for() == 0.0
    assert get_entry("j-decay").order_for() == -1.0
    assert get_entry("j-decay").order_for({"s": 2.5}) == -2.5


def test_analytic_flags():
    flags = {name: get_entry(name).analytic for name in NAMES}
    assert flags["bump"] is False
    assert all(flags[n] for n in NAMES if n != "bump")


def test_unknown_entry_and_param():
    with pytest.raises(CatalogError, match="unknown catalog entry"):
        get_entry("nope")
    with pytest.raises(CatalogError, match="no parameter"):
        catalog_symbol("bump", TorusGrid(1, 16), 1, params={"q": 1})
    with pytest.raises(CatalogError, match="generated"):
        get_entry("random-trig").spec(1)


def test_bump_width_parameter():
    g = TorusGrid(1, 64)
    narrow = catalog_symbol("bump", g, 0, params={"w": 1.0})
    wide = catalog_symbol("bump", g, 0, params={"w": 2.0})
    x = g.nodes()[0]
    with np.errstate(divide="ignore"):
        expected = np.exp(-2.0 / np.sin(x / 2) ** 2)
    assert np.allclose(wide[(0,)].values(), expected, atol=1e-14)
    assert wide[(0,)].values().max() < narrow[(0,)].values().max()


@pytest.mark.parametrize("n", [1, 2])
def test_random_trig_stable_under_larger_cutoff(n):
    g = TorusGrid(n, 16)
    small = random_trig_symbol(g, 2, 3, seed=11)
    large = random_trig_symbol(g, 4, 3, seed=11)
    assert np.array_equal(large.restrict(2).coeffs, small.coeffs)


def test_random_trig_seed_and_bounds():
    g = TorusGrid(1, 32)
    a = random_trig_symbol(g, 4, 3, seed=1)
    b = random_trig_symbol(g, 4, 3, seed=2)
    assert not np.array_equal(a.coeffs, b.coeffs)
    assert np.array_equal(a.coeffs, random_trig_symbol(g, 4, 3, seed=1).coeffs)
    for _, f in a.items():
        assert fc.sup_norm(f) <= 1.0
        band = np.nonzero(f.coeffs)[0]
        assert all(min(k, 32 - k) <= 3 for k in band)


def test_random_trig_degree_limit():
    with pytest.raises(CatalogError):
        random_trig_symbol(TorusGrid(1, 8), 1, 4)
