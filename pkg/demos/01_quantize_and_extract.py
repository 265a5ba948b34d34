"""
Discrete symbols as matrices
============================

Build the symbol a_j(x) = 1/(2 - e^{ix}), realise Op(a_j) as a matrix on the
modes |k| <= K, read the symbol back off the columns and compare the
truncated operator norm with the lattice bound.
"""
import numpy as np

from torusop.catalog import catalog_symbol
from torusop.fourier import TorusGrid, TWO_PI
from torusop.quantize import (bandwidth, coefficient_norm_bound, extract_symbol,
                              norm_bound_check, operator_norm, to_matrix)

K = 8
grid = TorusGrid(1, 128)
a = catalog_symbol("analytic-pole", grid, J=K)

# the pole symbol has geometric Fourier decay 2^-m; the grid must hold K + bandwidth modes
print(f"bandwidth {bandwidth(a)}, K + bandwidth = {K + bandwidth(a)} <= N/2 = {grid.N // 2}")

A = to_matrix(a, K)
print("matrix shape", A.matrix.shape)
print("first column (k = -8), rows l = -8..-4:", np.round(A.matrix[:5, 0].real, 6))

# column k holds the coefficients of a_k e_k, so the symbol comes back on interior modes
back = extract_symbol(A, J_out=4)
err = max(abs(back[(j,)].coef((m,)) - a[(j,)].coef((m,)))
          for j in range(-4, 5) for m in range(-4, 5)) / TWO_PI
print(f"round trip error on interior modes: {err:.1e}")

for p in (1, 2):
    r = norm_bound_check(a, p, K)
    print(f"p={p}: measured {r.measured:.6f} <= C_p sup|(1-Lap)^p a| = {r.bound:.4f}  (slack {r.slack:.3f})")
print(f"power-iteration norm {operator_norm(A):.6f}, coefficient bound {coefficient_norm_bound(a):.6f}")
