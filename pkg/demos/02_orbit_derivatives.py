"""
The translation orbit
=====================

f(y) = T_y A T_-y can be computed two ways: conjugate the matrix by the
translation phases, or translate the symbol and quantize.  Its derivatives
are (-1)^|alpha| T_y Op(d^alpha a) T_-y; fourth-order finite differences
confirm this and halving h divides the error by about 16.
"""
import numpy as np

from torusop.catalog import catalog_symbol
from torusop.fourier import TorusGrid
from torusop.orbit import orbit_eval, richardson_ratio, taylor_remainder_check
from torusop.quantize import conjugate_translation, to_matrix

K = 8
a = catalog_symbol("multiplication", TorusGrid(1, 64), J=K)
A = to_matrix(a, K)

rng = np.random.default_rng(0)
worst = max(np.abs(conjugate_translation(A, y).matrix - orbit_eval(a, y, K).matrix).max()
            for y in rng.uniform(0, 2 * np.pi, 20))
print(f"two routes to f(y) agree to {worst:.1e} at 20 random y")

print("alpha   err(h)      err(h/2)    ratio")
for alpha in (1, 2, 3):
    ratio, r1, r2 = richardson_ratio(a, (alpha,), 0.7, 1e-2, K)
    print(f"{alpha:5d}   {r1.identity_error:.3e}   {r2.identity_error:.3e}   {ratio:6.2f}")

rep = taylor_remainder_check(a, 0.3, [1, 2, 4, 6, 8], 0.2, K)
print("Taylor remainders at radius 0.2:", ", ".join(f"D={d}: {r:.1e}" for d, r in zip(rep.degrees, rep.remainders)))
