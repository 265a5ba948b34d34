"""
Inverses and recovering a symbol from an operator
=================================================

4I + Op(1/(2 - e^{ix})) is invertible because ||Op(a)|| <= 1 < 4.  The
symbol of the inverse, read off the inverse matrix, stays analytic and
matches a truncated Neumann series within the geometric bound.

Then the converse direction: B^beta = Op(L^beta a) with L = 1 + d
determines a, and every derivative of a is controlled by ||B^beta||.
"""
from torusop.catalog import catalog_symbol
from torusop.commands import cmd_invert, recovery_error
from torusop.config import from_dict
from torusop.fourier import TorusGrid
from torusop.lbeta import bound_chain_check, factorial_shift_check, mu_constant

cfg = from_dict({"experiment": {"n": 1, "N": 128, "J": 12, "K": 12},
                 "symbol": {"catalog": "analytic-pole"},
                 "invert": {"lam": 4.0, "J_out": 2}})
sm = cmd_invert(cfg).envelope.summary
print(f"condition number {sm['condition_number']:.3f}")
print(f"inverse symbol verdicts {sm['verdicts']}, C* = {sm['C_star'][0]:.3f} / {sm['C_star'][1]:.3f}")
print(f"Neumann (12 terms) error {sm['neumann_error']:.2e} <= bound {sm['neumann_bound']:.2e}")

a = catalog_symbol("analytic-pole", TorusGrid(1, 128), 8)
print(f"B^beta -> matrix -> symbol -> a: max error {recovery_error(a, (2,), 8, 4)[1]:.1e}")
print("alpha  M_alpha      ||B^beta|| S      slack")
for k in range(7):
    r = bound_chain_check(a, (k,), 8)
    print(f"{k:5d}  {r.M_alpha:11.4e}  {r.bound:11.4e}  {r.slack:11.4e}")

for p in (1, 2, 3):
    m = mu_constant(p)
    print(f"p={p}: mu = {m.mu:.6f} at t = {m.t_star:.4f}; (a+2p)!/a! <= mu 2^a for a <= 60: {m.inequality_holds}")
print("5! <= 48 mu:", factorial_shift_check(1, (3,)).holds)
