"""The translation orbit f(y) = T_y A T_-y of A = Op(a_j).

Two facts drive everything here: T_y Op(a_j) T_-y = Op(T_y a_j), and

    d^alpha_y f(y) = (-1)^|alpha| T_y A^alpha T_-y,   A^alpha = Op(d^alpha a_j),

the sign coming from d/dy a(x - y) = -(da)(x - y).  Norms of the derivatives
do not depend on y, so sup_y ||d^alpha f(y)|| = ||A^alpha||.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import fourier as fc
from .quantize import (TruncatedOperator, check_resolution, conjugate_translation,
                       operator_norm, to_matrix)
from .symbols import (DiscreteSymbol, GROWTH_TOL_DEFAULT, SLOPE_TOL_DEFAULT, classify_growth,
                      symbol_derivative, symbol_translate)

FD_MAX_ORDER = 4
H_RANGE = (1e-4, 1e-1)
# fourth-order central first derivative: offsets and weights (divide by h)
_STENCIL = ((2, -1 / 12), (1, 8 / 12), (-1, -8 / 12), (-2, 1 / 12))


class OrbitError(ValueError):
    pass


def orbit_eval(s: DiscreteSymbol, y, K: int) -> TruncatedOperator:
    """T_y Op(a_j) T_-y computed on the symbol side."""
    return to_matrix(symbol_translate(s, y), K)


def orbit_derivative_exact(s: DiscreteSymbol, alpha, y, K: int) -> TruncatedOperator:
    """(-1)^|alpha| T_y A^alpha T_-y."""
    alpha = fc.as_multi_index(alpha, s.n)
    check_resolution(s, K)
    A = conjugate_translation(to_matrix(symbol_derivative(s, alpha), K, None), y)
    return A if sum(alpha) % 2 == 0 else A * -1.0


@dataclass
class OrbitDerivativeRecord:
    alpha: tuple
    y: tuple
    h: float
    K: int
    scheme: str
    scheme_order: int
    fd_estimate: float
    exact_norm: float
    identity_error: float

    def to_dict(self):
        d = dict(self.__dict__)
        d.update(kind="orbit_derivative", alpha=list(self.alpha), y=list(self.y))
        return d


def _fd_matrix(s, alpha, y, h, K):
    """Iterated central differences, one coordinate at a time."""
    y = np.asarray(y, float)

    def nested(axes, point):
        if not axes:
            return orbit_eval(s, point, K).matrix
        ax, rest = axes[0], axes[1:]
        out = 0
        for off, w in _STENCIL:
            shifted = point.copy()
            shifted[ax] += off * h
            out = out + w * nested(rest, shifted)
        return out / h

    axes = [i for i, a in enumerate(alpha) for _ in range(a)]
    return nested(axes, y)


def orbit_derivative_check(s: DiscreteSymbol, alpha, y, h: float, K: int,
                           norm_tol: float = 1e-10) -> OrbitDerivativeRecord:
    """Finite-difference d^alpha f(y) against the exact symbol-side derivative."""
    alpha = fc.as_multi_index(alpha, s.n)
    if sum(alpha) > FD_MAX_ORDER:
        raise OrbitError(f"finite differences limited to |alpha| <= {FD_MAX_ORDER}, got {alpha}")
    if not H_RANGE[0] <= h <= H_RANGE[1]:
        raise OrbitError(f"step h={h} outside [{H_RANGE[0]}, {H_RANGE[1]}]")
    y = tuple(float(v) for v in np.broadcast_to(np.asarray(y, float), (s.n,)))
    exact = orbit_derivative_exact(s, alpha, y, K)
    exact_norm = operator_norm(exact, tol=norm_tol)
    if sum(alpha) == 0:
        # nothing to difference: the estimate is the orbit value itself
        return OrbitDerivativeRecord(alpha, y, h, K, "none", 0, exact_norm, exact_norm, 0.0)
    fd = _fd_matrix(s, alpha, y, h, K)
    err = operator_norm(fd - exact.matrix, tol=norm_tol)
    return OrbitDerivativeRecord(alpha, y, h, K, "central-4", 4,
                                 operator_norm(fd, tol=norm_tol), exact_norm, err)


def richardson_ratio(s: DiscreteSymbol, alpha, y, h: float, K: int):
    """identity_error(h) / identity_error(h/2) and both records (about 16 for order 4)."""
    r1 = orbit_derivative_check(s, alpha, y, h, K)
    r2 = orbit_derivative_check(s, alpha, y, h / 2, K)
    ratio = r1.identity_error / r2.identity_error if r2.identity_error > 0 else math.nan
    return ratio, r1, r2


# --------------------------------------------------------------------------
# growth table
# --------------------------------------------------------------------------

@dataclass
class OrbitGrowthTable:
    a_max: int
    K: int
    alphas: list
    norms: list
    c: list
    order_c: list
    C_star: float
    slope: float
    verdict: str
    y_samples: list
    invariance_error: float
    heuristic: bool = True

    def to_dict(self):
        return {
            "kind": "orbit_growth", "a_max": self.a_max, "K": self.K,
            "alphas": [list(a) for a in self.alphas], "norms": list(self.norms), "c": list(self.c),
            "order_c": list(self.order_c), "C_star": self.C_star, "slope": self.slope,
            "verdict": self.verdict, "y_samples": [list(y) for y in self.y_samples],
            "invariance_error": self.invariance_error, "heuristic": self.heuristic,
        }

    def csv(self) -> str:
        rows = ["alpha,norm,c_alpha"]
        for a, nm, ca in zip(self.alphas, self.norms, self.c):
            rows.append(f"{' '.join(map(str, a))},{nm:.17g},{ca:.17g}")
        return "\n".join(rows) + "\n"

    def satisfies_bound(self, C=None) -> bool:
        C = self.C_star if C is None else C
        return all(v <= C ** (1 + sum(a)) * fc.mi_factorial(a) * (1 + 1e-12)
                   for a, v in zip(self.alphas, self.norms))


def orbit_growth_table(s: DiscreteSymbol, a_max: int, K: int, y_samples=(),
                       slope_tol: float = SLOPE_TOL_DEFAULT, growth_tol: float = GROWTH_TOL_DEFAULT,
                       norm_tol: float = 1e-10) -> OrbitGrowthTable:
    """Tabulate ||A^alpha|| for |alpha| <= a_max and fit the growth constant.

    Each norm is measured once at y = 0; the sampled y only confirm that the
    conjugated norms agree (``invariance_error``, relative).
    """
    if a_max > 20:
        raise OrbitError(f"a_max must be <= 20, got {a_max}")
    alphas = list(fc.multi_indices(s.n, a_max))
    ys = [tuple(float(v) for v in np.broadcast_to(np.asarray(y, float), (s.n,))) for y in y_samples]
    check_resolution(s, K)
    norms, worst = [], 0.0
    for alpha in alphas:
        Aa = to_matrix(symbol_derivative(s, alpha), K, None)
        v = operator_norm(Aa, tol=norm_tol)
        for y in ys:
            w = operator_norm(conjugate_translation(Aa, y), tol=norm_tol)
            if v > 0:
                worst = max(worst, abs(w - v) / v)
        norms.append(v)
    c, order_c, C_star, slope, verdict = classify_growth(alphas, norms, a_max, slope_tol, growth_tol)
    return OrbitGrowthTable(a_max, K, alphas, norms, c, order_c, C_star, slope, verdict, ys, worst)


# --------------------------------------------------------------------------
# Taylor remainder
# --------------------------------------------------------------------------

@dataclass
class TaylorRemainderReport:
    y0: tuple
    radius: float
    degrees: list
    remainders: list
    ratios: list
    samples: list
    K: int

    def to_dict(self):
        return {"kind": "taylor_remainder", "y0": list(self.y0), "radius": self.radius,
                "degrees": list(self.degrees), "remainders": list(self.remainders),
                "ratios": list(self.ratios), "samples": [list(y) for y in self.samples], "K": self.K}

    def csv(self) -> str:
        rows = ["degree,remainder"]
        rows += [f"{d},{r:.17g}" for d, r in zip(self.degrees, self.remainders)]
        return "\n".join(rows) + "\n"


def sample_ball(n: int, y0, radius: float, count: int, seed: int = 0) -> list[tuple]:
    """Points y with |y - y0| = radius: the 2n axis points plus seeded random directions."""
    y0 = np.asarray(y0, float)
    pts = []
    for i in range(n):
        for sgn in (1.0, -1.0):
            e = np.zeros(n)
            e[i] = sgn * radius
            pts.append(y0 + e)
    rng = np.random.default_rng(seed)
    for _ in range(max(0, count - len(pts))):
        d = rng.standard_normal(n)
        pts.append(y0 + radius * d / np.linalg.norm(d))
    return [tuple(float(v) for v in p) for p in pts[:max(count, 1)]]


def taylor_remainder_check(s: DiscreteSymbol, y0, degrees, radius: float, K: int,
                           samples: int = 6, seed: int = 0, max_radius: float = 1.0,
                           norm_tol: float = 1e-10) -> TaylorRemainderReport:
    """max over sampled y of ||f(y) - P_D(y)|| for each Taylor degree D.

    P_D(y) = sum_{|alpha| <= D} (y - y0)^alpha / alpha! * d^alpha f(y0), with
    the derivatives taken on the symbol side.
    """
    degrees = sorted(int(d) for d in degrees)
    if degrees[-1] > 8:
        raise OrbitError(f"Taylor degree must be <= 8, got {degrees[-1]}")
    if not 0 < radius <= max_radius:
        raise OrbitError(f"radius {radius} outside (0, {max_radius}]")
    y0 = tuple(float(v) for v in np.broadcast_to(np.asarray(y0, float), (s.n,)))
    pts = sample_ball(s.n, y0, radius, samples, seed)
    terms = {a: orbit_derivative_exact(s, a, y0, K).matrix / fc.mi_factorial(a)
             for a in fc.multi_indices(s.n, degrees[-1])}
    direct = [orbit_eval(s, y, K).matrix for y in pts]
    rem = []
    for D in degrees:
        worst = 0.0
        for y, fy in zip(pts, direct):
            dy = np.asarray(y) - np.asarray(y0)
            P = sum(math.prod(dy[i] ** a[i] for i in range(s.n)) * T
                    for a, T in terms.items() if sum(a) <= D)
            worst = max(worst, operator_norm(fy - P, tol=norm_tol))
        rem.append(worst)
    ratios = [rem[i + 1] / rem[i] if rem[i] > 0 else 0.0 for i in range(len(rem) - 1)]
    return TaylorRemainderReport(y0, radius, degrees, rem, ratios, pts, K)
