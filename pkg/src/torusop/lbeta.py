"""L^beta = prod_i (1 + d_i)^beta_i, symbol recovery and the derivative bound chain.

L^beta acts on e_l by the multiplier prod_i (1 + i l_i)^beta_i, which never
vanishes, so its inverse is the reciprocal multiplier.  For a symbol (a_j),
B^beta = Op(L^beta a_j); every matrix entry of B^beta is bounded by its norm,
and dividing the coefficients of L^beta a_j by the multiplier gives

    sup |d^alpha a_j| <= ||B^beta|| * sum_l prod |l_i|^alpha_i / (1 + l_i^2)^(beta_i / 2)

whenever beta_i >= alpha_i + 2.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import fourier as fc
from .fourier import PeriodicFunction, TorusGrid
from .lattice import product_sum
from .quantize import check_resolution, operator_norm, to_matrix
from .symbols import DiscreteSymbol, symbol_derivative, symbol_multiplier

MU_INEQUALITY_RANGE = 60
_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


class LBetaError(ValueError):
    pass


def lbeta_multiplier(grid: TorusGrid, beta, inverse: bool = False) -> np.ndarray:
    """prod_i (1 + i l_i)^(+-beta_i) over the coefficient box."""
    beta = fc.as_multi_index(beta, grid.n)
    sign = -1 if inverse else 1
    m = np.ones(grid.shape, np.complex128)
    for k, b in zip(grid.wavenumbers(), beta):
        if b:
            m = m * (1.0 + 1j * k) ** (sign * b)
    return m


def lbeta_apply(u: PeriodicFunction, beta) -> PeriodicFunction:
    return PeriodicFunction(u.grid, u.coeffs * lbeta_multiplier(u.grid, beta))


def lbeta_inverse(u: PeriodicFunction, beta) -> PeriodicFunction:
    return PeriodicFunction(u.grid, u.coeffs * lbeta_multiplier(u.grid, beta, inverse=True))


def _nonzero(beta, n):
    beta = fc.as_multi_index(beta, n)
    if not any(beta):
        raise LBetaError("beta must be a nonzero multi-index")
    return beta


def bbeta_build(s: DiscreteSymbol, beta) -> DiscreteSymbol:
    """(L^beta a_j)_j, the symbol of B^beta."""
    beta = _nonzero(beta, s.n)
    return symbol_multiplier(s, lbeta_multiplier(s.grid, beta))


def recover_symbol(bs: DiscreteSymbol, beta) -> DiscreteSymbol:
    """Undo :func:`bbeta_build`: divide every coefficient by the L^beta multiplier."""
    beta = _nonzero(beta, bs.n)
    return symbol_multiplier(bs, lbeta_multiplier(bs.grid, beta, inverse=True))


# --------------------------------------------------------------------------
# bound chain
# --------------------------------------------------------------------------

@dataclass
class BoundChainRecord:
    alpha: tuple
    beta: tuple
    K: int
    bbeta_norm: float
    S: float
    S_upper: float
    bound: float
    M_alpha: float
    M_alpha_full: float
    slack: float
    holds: bool
    rel_tol: float
    alpha_factorial: int
    beta_factorial: int

    def to_dict(self):
        d = dict(self.__dict__)
        d.update(kind="bound_chain", alpha=list(self.alpha), beta=list(self.beta))
        return d


def truncated_derivative_sup(s: DiscreteSymbol, alpha, K: int, oversample: int = 4) -> float:
    """sup over |j|_inf <= K and x of |d^alpha a_j|, keeping only modes m with |j + m|_inf <= K.

    These are exactly the coefficients that appear in the K-truncated matrix.
    """
    d = symbol_derivative(s, alpha).restrict(K)
    n, N = s.n, s.grid.N
    js = np.array(d.freqs()).reshape(-1, n)
    ks = [np.broadcast_to(k, s.grid.shape) for k in s.grid.wavenumbers()]
    flat = d.flat().copy()
    for idx, j in enumerate(js):
        inside = np.ones(s.grid.shape, bool)
        for ax in range(n):
            inside &= np.abs(ks[ax] + j[ax]) <= K
        flat[idx][~inside] = 0
    if not flat.any():
        return 0.0
    step = max(1, (1 << 22) // (N * oversample) ** n)
    return float(max(fc.sup_norm_coeffs(flat[i:i + step], n, oversample).max()
                     for i in range(0, len(flat), step)))


def bound_chain_check(s: DiscreteSymbol, alpha, K: int, rel_tol: float = 1e-6,
                      oversample: int = 4, norm_tol: float = 1e-10, sum_tol: float = 1e-10) -> BoundChainRecord:
    """Check M_alpha <= ||B^beta|| S_{alpha,beta} with beta = alpha + (2, ..., 2).

    Both sides live on the modes |k|_inf <= K.  The full-box M_alpha is
    recorded for comparison but not asserted.
    """
    alpha = fc.as_multi_index(alpha, s.n)
    fc.check_order(alpha)
    beta = tuple(a + 2 for a in alpha)
    check_resolution(s, K)
    B = to_matrix(bbeta_build(s, beta), K, None)
    nb = operator_norm(B, tol=norm_tol)
    S, S_up, _ = product_sum(alpha, beta, tol=sum_tol)
    bound = nb * S_up
    M = truncated_derivative_sup(s, alpha, K, oversample)
    d = symbol_derivative(s, alpha)
    M_full = float(np.max(fc.sup_norm_coeffs(d.flat(), s.n, oversample)))
    return BoundChainRecord(alpha, beta, K, nb, S, S_up, bound, M, M_full, bound - M,
                            bool(M <= bound * (1 + rel_tol)), rel_tol,
                            fc.mi_factorial(alpha), fc.mi_factorial(beta))


# --------------------------------------------------------------------------
# mu constant
# --------------------------------------------------------------------------

def _log_g(t, p):
    return -t * math.log(2.0) + sum(math.log(t + m) for m in range(1, 2 * p + 1))


def _dlog_g(t, p):
    return -math.log(2.0) + sum(1.0 / (t + m) for m in range(1, 2 * p + 1))


@dataclass
class MuConstant:
    p: int
    mu: float
    t_star: float
    scan_mu: float
    scan_t: float
    scan_step: float
    bracket: tuple
    endpoint_value: int
    inequality_holds: bool
    min_log_margin: float
    worst_a: int

    def to_dict(self):
        d = dict(self.__dict__)
        d.update(kind="mu_constant", bracket=list(self.bracket))
        return d


def _golden_max(f, lo, hi, tol=1e-13, max_iter=400):
    a, b = lo, hi
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc_, fd_ = f(c), f(d)
    for _ in range(max_iter):
        if b - a <= tol * max(1.0, abs(a) + abs(b)):
            break
        if fc_ >= fd_:
            b, d, fd_ = d, c, fc_
            c = b - _GOLDEN * (b - a)
            fc_ = f(c)
        else:
            a, c, fc_ = c, d, fd_
            d = a + _GOLDEN * (b - a)
            fd_ = f(d)
    return 0.5 * (a + b)


def mu_constant(p: int, scan_step: float = 1e-4, max_widen: int = 8) -> MuConstant:
    """mu = sup_{t > 0} 2^-t (t+1)(t+2)...(t+2p), by golden-section search.

    log g is strictly concave (its derivative -log 2 + sum 1/(t+m) decreases),
    so one sign change of the derivative on the bracket certifies a single
    interior maximum.  A dense scan cross-checks the value.
    """
    if p < 1:
        raise LBetaError(f"p must be >= 1, got {p}")
    lo, hi = 0.0, 10.0 * p
    for _ in range(max_widen):
        if _dlog_g(hi, p) < 0:
            break
        hi *= 2
    else:
        raise LBetaError(f"could not bracket the maximiser for p={p}")
    if _dlog_g(lo, p) <= 0:
        t_star = 0.0
    else:
        t_star = _golden_max(lambda t: _log_g(t, p), lo, hi)
    mu = math.exp(_log_g(t_star, p))
    ts = np.arange(0.0, 10.0 * p + scan_step / 2, scan_step)
    logs = -ts * math.log(2.0) + sum(np.log(ts + m) for m in range(1, 2 * p + 1))
    i = int(np.argmax(logs))
    scan_mu, scan_t = float(math.exp(logs[i])), float(ts[i])
    holds, worst, worst_a = True, math.inf, 0
    for a in range(MU_INEQUALITY_RANGE + 1):
        lhs = math.factorial(a + 2 * p) // math.factorial(a)
        rhs = mu * 2.0 ** a
        holds &= lhs <= rhs
        margin = math.log(rhs) - math.log(lhs)
        if margin < worst:
            worst, worst_a = margin, a
    return MuConstant(p, mu, t_star, scan_mu, scan_t, scan_step, (lo, hi),
                      math.factorial(2 * p), bool(holds), worst, worst_a)


@dataclass
class FactorialShiftRecord:
    p: int
    alpha: tuple
    mu: float
    lhs: int
    rhs: float
    holds: bool
    log_margin: float

    def to_dict(self):
        d = dict(self.__dict__)
        d.update(kind="factorial_shift", alpha=list(self.alpha), lhs=float(self.lhs))
        return d


def factorial_shift_check(p: int, alpha, mu: float | None = None) -> FactorialShiftRecord:
    """prod_i (alpha_i + 2p)! <= mu^n 2^|alpha| alpha!, coordinate by coordinate."""
    alpha = fc.as_multi_index(alpha)
    if sum(alpha) > 40:
        raise LBetaError(f"|alpha| must be <= 40, got {sum(alpha)}")
    if mu is None:
        mu = mu_constant(p).mu
    lhs = math.prod(math.factorial(a + 2 * p) for a in alpha)
    rhs = mu ** len(alpha) * 2.0 ** sum(alpha) * fc.mi_factorial(alpha)
    return FactorialShiftRecord(p, alpha, mu, lhs, rhs, bool(lhs <= rhs),
                                math.log(rhs) - math.log(lhs))
