"""Lattice sums with certified tails.

Both sums here are partial sums over a box plus an interval that provably
contains the tail, obtained from integral comparison of a monotone envelope.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

# n-dimensional box sums stop growing L beyond this many lattice points
POINT_BUDGET = 1 << 24


@dataclass(frozen=True)
class LatticeSum:
    partial: float
    tail_lower: float
    tail_upper: float
    L: int
    converged: bool

    @property
    def value(self) -> float:
        """Midpoint estimate."""
        return self.partial + 0.5 * (self.tail_lower + self.tail_upper)

    @property
    def upper(self) -> float:
        """Certified upper bound."""
        return self.partial + self.tail_upper

    @property
    def lower(self) -> float:
        return self.partial + self.tail_lower

    def to_dict(self):
        return {"value": self.value, "upper": self.upper, "lower": self.lower,
                "partial": self.partial, "tail_lower": self.tail_lower,
                "tail_upper": self.tail_upper, "L": self.L, "converged": self.converged}


def _tail_integral(f, start):
    """int_start^inf f, via t = 1/u so slow algebraic tails become an endpoint singularity."""
    def g(u):
        return f(1.0 / u) / (u * u) if u > 0 else 0.0

    val, _ = integrate.quad(g, 0.0, 1.0 / start, epsabs=1e-16, epsrel=1e-12, limit=200)
    return val


def _box_sum(n, p, L):
    """sum over |l|_inf <= L of (1+|l|^2)^-p."""
    r = np.arange(-L, L + 1, dtype=float)
    sq = r * r
    if n == 1:
        return float(np.sum((1.0 + sq) ** -p))
    total = 0.0
    if n == 2:
        for a in sq:
            total += float(np.sum((1.0 + a + sq) ** -p))
        return total
    plane = sq[:, None] + sq[None, :]
    for a in sq:
        total += float(np.sum((1.0 + a + plane) ** -p))
    return total


def lattice_constant(n: int, p: int, tol: float = 1e-10, L0: int = 64) -> LatticeSum:
    """C_p = sum over l in Z^n of (1 + |l|^2)^-p, for p > n/2.

    Shells |l|_inf = r > L hold (2r+1)^n - (2r-1)^n points with
    r^2 <= |l|^2 <= n r^2, which bracket the tail between two integrals.
    """
    if not p > n / 2:
        raise ValueError(f"C_p diverges unless p > n/2 (n={n}, p={p})")

    def shell(r):
        return (2 * r + 1) ** n - (2 * r - 1) ** n

    def hi(r):
        return shell(r) * (1.0 + r * r) ** -p

    def lo(r):
        return shell(r) * (1.0 + n * r * r) ** -p

    L = L0
    while True:
        t_hi = _tail_integral(hi, L)
        t_lo = _tail_integral(lo, L + 1)
        converged = t_hi - t_lo <= tol
        if converged or (2 * (2 * L) + 1) ** n > POINT_BUDGET:
            break
        L *= 2
    return LatticeSum(_box_sum(n, p, L), t_lo, t_hi, L, converged)


def line_sum(a: int, b: float, tol: float = 1e-10) -> LatticeSum:
    """sum over l in Z of |l|^a / (1 + l^2)^(b/2), for b > a + 1 (0^0 = 1)."""
    if not b > a + 1:
        raise ValueError(f"sum diverges unless b > a + 1 (a={a}, b={b})")

    def f(t):
        if t == 0:
            return 1.0 if a == 0 else 0.0
        return math.exp(a * math.log(t) - 0.5 * b * math.log1p(t * t))

    # summand decreasing for t^2 > a/(b-a)
    L = max(64, int(math.sqrt(a / (b - a))) + 2)
    while True:
        t_hi = 2 * _tail_integral(f, L)
        t_lo = 2 * _tail_integral(f, L + 1)
        converged = t_hi - t_lo <= tol
        if converged or L >= 1 << 24:
            break
        L *= 2
    t = np.arange(1, L + 1, dtype=float)
    body = np.exp(a * np.log(t) - 0.5 * b * np.log1p(t * t))
    partial = f(0) + 2.0 * float(np.sum(body[::-1]))
    return LatticeSum(partial, t_lo, t_hi, L, converged)


def product_sum(alpha, beta, tol: float = 1e-10) -> tuple[float, float, list[LatticeSum]]:
    """S = sum over l in Z^n of prod |l_i|^alpha_i / (1+l_i^2)^(beta_i/2), factorized.

    Returns (estimate, certified upper bound, per-axis sums).
    """
    parts = [line_sum(a, b, tol) for a, b in zip(alpha, beta)]
    return math.prod(s.value for s in parts), math.prod(s.upper for s in parts), parts
