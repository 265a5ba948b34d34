"""
Analytic symbols against analytic orbits
========================================

For each catalog family, fit the growth of sup |d^alpha a_j| (symbol side)
and of ||Op(d^alpha a)|| (orbit side) by c_alpha = (M_alpha / alpha!)^(1/(1+|alpha|)).
A flat tail means geometric growth, hence analyticity; a rising tail means
factorial growth beyond alpha!.

The bump exp(-w / sin^2(x/2)) is smooth but not analytic.  Its symbol tail
rises, yet a K = 8 matrix only carries Fourier modes |m| <= 2K of the
symbol, a trigonometric polynomial, so the orbit side reads as analytic.
The disagreement is a truncation effect, printed here rather than hidden.
"""
from torusop.catalog import catalog_names, catalog_symbol
from torusop.fourier import TorusGrid
from torusop.orbit import orbit_growth_table
from torusop.quantize import bandwidth
from torusop.symbols import analyticity_fit

K, A_MAX = 8, 12
print(f"{'family':16s} {'symbol':20s} {'slope':>7s}   {'orbit':20s} {'slope':>7s}  C*")
for name in catalog_names():
    N = 32
    while K + bandwidth(catalog_symbol(name, TorusGrid(1, N), K)) > N // 2:
        N *= 2
    a = catalog_symbol(name, TorusGrid(1, N), K)
    s = analyticity_fit(a, A_MAX)
    o = orbit_growth_table(a, A_MAX, K)
    print(f"{name:16s} {s.verdict:20s} {s.slope:7.3f}   {o.verdict:20s} {o.slope:7.3f}  {s.C_star:.3f}")

# the symbol-side rise is real: refine the grid and push to higher order
bump = analyticity_fit(catalog_symbol("bump", TorusGrid(1, 512), 0), 14)
print("bump c_alpha, alpha = 8..14:", " ".join(f"{c:.3f}" for c in bump.c[8:]))
