"""Discrete symbols (a_j) on T^n and their classification.

A :class:`DiscreteSymbol` holds a_j for every frequency |j|_inf <= J as one
coefficient array of shape ``(2J+1,)*n + (N,)*n``: the leading axes index j
(from -J to J), the trailing axes hold the Fourier coefficients of a_j in FFT
order.  Classification is necessarily a truncated, heuristic affair: both the
order test and the analyticity fit only see |j|_inf <= J and finitely many
derivatives, and they say so in their reports.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from . import fourier as fc
from .dsl import SymbolSpec, Name, walk
from .fourier import PeriodicFunction, TorusGrid

B_MAX_DEFAULT = 1e6
SLOPE_TOL_DEFAULT = 0.05
GROWTH_TOL_DEFAULT = 0.1
J_GROWTH_TOL_DEFAULT = 0.25


class SymbolError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class DiscreteSymbol:
    """Finite family j -> a_j of periodic functions sharing one grid."""

    grid: TorusGrid
    J: int
    coeffs: np.ndarray

    def __post_init__(self):
        if self.J < 0:
            raise SymbolError(f"cutoff J must be >= 0, got {self.J}")
        c = np.array(self.coeffs, dtype=np.complex128)
        want = (2 * self.J + 1,) * self.grid.n + self.grid.shape
        if c.shape != want:
            raise SymbolError(f"symbol table has shape {c.shape}, expected {want}")
        if not np.all(np.isfinite(c)):
            raise SymbolError("symbol table contains non-finite coefficients")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def n(self) -> int:
        return self.grid.n

    def freqs(self) -> list[tuple[int, ...]]:
        return fc.freq_box(self.n, self.J)

    def _pos(self, j):
        if len(j) != self.n or max(abs(ji) for ji in j) > self.J:
            raise SymbolError(f"frequency {tuple(j)} outside the symbol box |j| <= {self.J}")
        return tuple(ji + self.J for ji in j)

    def __getitem__(self, j) -> PeriodicFunction:
        return PeriodicFunction(self.grid, self.coeffs[self._pos(tuple(j))])

    def items(self):
        for j in self.freqs():
            yield j, self[j]

    def flat(self) -> np.ndarray:
        """Coefficients with the j-axes flattened (row-major), shape (count,) + grid.shape."""
        return self.coeffs.reshape((-1,) + self.grid.shape)

    def restrict(self, J: int) -> "DiscreteSymbol":
        if J > self.J:
            raise SymbolError(f"cannot restrict cutoff {self.J} to larger {J}")
        sl = (slice(self.J - J, self.J + J + 1),) * self.n
        return DiscreteSymbol(self.grid, J, self.coeffs[sl])

    def is_constant_in_j(self) -> bool:
        f = self.flat()
        return bool(np.all(f == f[0]))

    def with_coeffs(self, coeffs) -> "DiscreteSymbol":
        return DiscreteSymbol(self.grid, self.J, coeffs)

    def __add__(self, other):
        _same_box(self, other)
        return self.with_coeffs(self.coeffs + other.coeffs)

    def __sub__(self, other):
        _same_box(self, other)
        return self.with_coeffs(self.coeffs - other.coeffs)

    def __mul__(self, c):
        return self.with_coeffs(self.coeffs * complex(c))

    __rmul__ = __mul__


def _same_box(s, t):
    if s.grid != t.grid or s.J != t.J:
        raise SymbolError(f"symbol boxes differ: ({s.grid}, J={s.J}) vs ({t.grid}, J={t.J})")


def _j_norms(n, J) -> np.ndarray:
    """Euclidean |j| over the box, shaped like the j-axes."""
    r = np.arange(-J, J + 1, dtype=float)
    grids = np.meshgrid(*([r] * n), indexing="ij")
    return np.sqrt(sum(g * g for g in grids))


# --------------------------------------------------------------------------
# construction
# --------------------------------------------------------------------------

CHOP_DEFAULT = 1e-14


def from_callable(grid: TorusGrid, J: int, func: Callable, chop: float = CHOP_DEFAULT) -> DiscreteSymbol:
    """Build from ``func(j, xs) -> grid values``; coefficients below ``chop`` (relative) are zeroed."""
    xs = grid.nodes()
    table = np.empty((2 * J + 1,) * grid.n + grid.shape, np.complex128)
    for j in fc.freq_box(grid.n, J):
        vals = np.broadcast_to(func(j, xs), grid.shape)
        table[tuple(ji + J for ji in j)] = fc.analyze(grid, vals).coeffs
    return DiscreteSymbol(grid, J, fc.chop_coeffs(table, chop, grid.n))


def from_functions(grid: TorusGrid, J: int, table: Mapping) -> DiscreteSymbol:
    """Build from a mapping j -> PeriodicFunction covering the whole box."""
    out = np.empty((2 * J + 1,) * grid.n + grid.shape, np.complex128)
    for j in fc.freq_box(grid.n, J):
        try:
            f = table[tuple(j)]
        except KeyError:
            raise SymbolError(f"symbol table is missing frequency {tuple(j)}") from None
        if f.grid != grid:
            raise SymbolError(f"entry {tuple(j)} lives on {f.grid}, expected {grid}")
        out[tuple(ji + J for ji in j)] = f.coeffs
    return DiscreteSymbol(grid, J, out)


def constant_symbol(grid: TorusGrid, J: int, c: complex = 1.0) -> DiscreteSymbol:
    one = fc.constant(grid, c).coeffs
    return DiscreteSymbol(grid, J, np.broadcast_to(one, (2 * J + 1,) * grid.n + grid.shape))


def multiplication_symbol(f: PeriodicFunction, J: int) -> DiscreteSymbol:
    """a_j = f for every j (the multiplication operator by f)."""
    g = f.grid
    return DiscreteSymbol(g, J, np.broadcast_to(f.coeffs, (2 * J + 1,) * g.n + g.shape))


def multiplier_symbol(grid: TorusGrid, J: int, values: Callable[[tuple], complex]) -> DiscreteSymbol:
    """a_j = values(j), constant in x (a Fourier multiplier)."""
    return from_callable(grid, J, lambda j, xs: values(j))


def zero_symbol(grid: TorusGrid, J: int) -> DiscreteSymbol:
    return DiscreteSymbol(grid, J, np.zeros((2 * J + 1,) * grid.n + grid.shape, np.complex128))


def build_symbol(spec: SymbolSpec, grid: TorusGrid, J: int, chop: float = CHOP_DEFAULT) -> DiscreteSymbol:
    """Evaluate a parsed spec at every grid node for every |j|_inf <= J.

    Intermediate infinities that resolve to finite values (exp(-1/0) = 0) are
    accepted; any non-finite final value is an error naming j and the node.
    """
    if spec.n != grid.n:
        raise SymbolError(f"spec was parsed for n={spec.n}, grid has n={grid.n}")
    xs = grid.nodes()
    table = np.empty((2 * J + 1,) * grid.n + grid.shape, np.complex128)
    x_free = not spec.uses_x()
    for j in fc.freq_box(grid.n, J):
        vals = np.broadcast_to(np.asarray(spec.evaluate(xs, j), dtype=complex), grid.shape)
        bad = ~np.isfinite(vals)
        if bad.any():
            node = tuple(int(v) for v in np.argwhere(bad)[0])
            where = tuple(float(x[node]) for x in xs)
            what = "evaluates to a non-finite constant" if x_free else \
                f"is non-finite at grid node {node} (x = {where})"
            raise SymbolError(f"spec {spec.source!r} {what} for j = {tuple(j)}")
        table[tuple(ji + J for ji in j)] = fc.analyze(grid, vals).coeffs
    return DiscreteSymbol(grid, J, fc.chop_coeffs(table, chop, grid.n))


# --------------------------------------------------------------------------
# entrywise operations
# --------------------------------------------------------------------------

def _expand(mult: np.ndarray, s: DiscreteSymbol) -> np.ndarray:
    return np.asarray(mult)[(None,) * s.n]


def symbol_translate(s: DiscreteSymbol, y) -> DiscreteSymbol:
    """(T_y a_j)_j."""
    return s.with_coeffs(s.coeffs * _expand(fc.translation_multiplier(s.grid, y), s))


def symbol_derivative(s: DiscreteSymbol, alpha, a_max: int = fc.A_MAX_DEFAULT) -> DiscreteSymbol:
    """(d^alpha a_j)_j."""
    alpha = fc.as_multi_index(alpha, s.n)
    fc.check_order(alpha, a_max)
    return s.with_coeffs(s.coeffs * _expand(fc.derivative_multiplier(s.grid, alpha), s))


def symbol_multiplier(s: DiscreteSymbol, mult: np.ndarray) -> DiscreteSymbol:
    """Apply one Fourier multiplier (on the x side) to every a_j."""
    return s.with_coeffs(s.coeffs * _expand(mult, s))


def entry_sup_norms(s: DiscreteSymbol, mult: np.ndarray | None = None,
                    oversample: int = 4) -> np.ndarray:
    """sup_x |(m a_j)(x)| for every j, shaped like the j-axes.

    A symbol constant in j is evaluated once.
    """
    flat = s.flat()
    if s.is_constant_in_j():
        flat = flat[:1]
    if mult is not None:
        flat = flat * mult[None]
    sups = _batched_sup(flat, s.n, oversample)
    if sups.shape[0] == 1:
        sups = np.broadcast_to(sups, (s.flat().shape[0],))
    return np.asarray(sups).reshape((2 * s.J + 1,) * s.n)


def _batched_sup(flat, n, oversample, budget=1 << 22):
    per = (flat.shape[-1] * oversample) ** n
    step = max(1, budget // per)
    return np.concatenate([fc.sup_norm_coeffs(flat[i:i + step], n, oversample)
                           for i in range(0, flat.shape[0], step)])


def seminorm_rho(a: PeriodicFunction, m: int, oversample: int = 4) -> float:
    """rho_m(a) = max over |beta| <= m of sup |d^beta a|."""
    if m < 0:
        raise SymbolError(f"seminorm order must be >= 0, got {m}")
    return max(fc.sup_norm(fc.derivative(a, beta, a_max=max(m, fc.A_MAX_DEFAULT)), oversample)
               for beta in fc.multi_indices(a.grid.n, m))


# --------------------------------------------------------------------------
# order test
# --------------------------------------------------------------------------

@dataclass
class OrderReport:
    m: float
    J: int
    alphas: list
    table: list
    max_ratio: float
    witness_alpha: tuple
    witness_j: tuple
    verdict: str
    j_growth_exponent: float
    growing_in_J: bool
    b_max: float
    sups: np.ndarray = field(repr=False, default=None)

    def to_dict(self):
        return {
            "kind": "order_test", "m": self.m, "J": self.J, "b_max": self.b_max,
            "alphas": [list(a) for a in self.alphas], "table": list(self.table),
            "max_ratio": self.max_ratio, "witness_alpha": list(self.witness_alpha),
            "witness_j": list(self.witness_j), "verdict": self.verdict,
            "j_growth_exponent": self.j_growth_exponent, "growing_in_J": self.growing_in_J,
        }


def derivative_sups(s: DiscreteSymbol, alphas, oversample=4, a_max=fc.A_MAX_DEFAULT) -> np.ndarray:
    """sup_x |d^alpha a_j| for each alpha, shape (len(alphas),) + j-axes."""
    out = []
    for alpha in alphas:
        alpha = fc.as_multi_index(alpha, s.n)
        fc.check_order(alpha, a_max)
        out.append(entry_sup_norms(s, fc.derivative_multiplier(s.grid, alpha), oversample))
    return np.array(out)


def order_test(s: DiscreteSymbol, m: float, alphas: Sequence, b_max: float = B_MAX_DEFAULT,
               oversample: int = 4, a_max: int = fc.A_MAX_DEFAULT,
               j_growth_tol: float = J_GROWTH_TOL_DEFAULT, sups=None) -> OrderReport:
    """Tabulate sup_{j,x} (1+|j|)^-m |d^alpha a_j(x)| over the given alphas.

    Besides the bound B_max, the report fits a power law to the per-shell
    maxima (shells |j|_inf = r) and flags growth in J when the exponent exceeds
    ``j_growth_tol``; a truncated table cannot see unboundedness otherwise.
    """
    alphas = [fc.as_multi_index(a, s.n) for a in alphas]
    if not alphas:
        raise SymbolError("order_test needs at least one multi-index")
    if sups is None:
        sups = derivative_sups(s, alphas, oversample, a_max)
    weight = (1.0 + _j_norms(s.n, s.J)) ** (-float(m))
    ratios = sups * weight[None]
    flat = ratios.reshape(len(alphas), -1)
    table = [float(v) for v in flat.max(axis=1)]
    ia, ij = np.unravel_index(int(np.argmax(flat)), flat.shape)
    witness_j = tuple(int(v) for v in np.array(s.freqs()[ij]))
    max_ratio = float(flat.max())
    exponent = _shell_growth_exponent(ratios.max(axis=0), s.n, s.J)
    growing = exponent > j_growth_tol
    verdict = "bounded" if max_ratio <= b_max else "unbounded"
    return OrderReport(float(m), s.J, alphas, table, max_ratio, alphas[ia], witness_j,
                       verdict, exponent, bool(growing), b_max, sups)


def _shell_growth_exponent(r_table, n, J) -> float:
    """Least-squares exponent g in shell_max(r) ~ (1+r)^g, r = 1..J."""
    if J < 2:
        return 0.0
    idx = np.indices(r_table.shape) - J
    shell = np.abs(idx).max(axis=0)
    rs = np.arange(1, J + 1)
    mx = np.array([r_table[shell == r].max() for r in rs])
    if np.any(mx <= 0):
        return 0.0 if np.all(mx == 0) else float("inf")
    return float(np.polyfit(np.log1p(rs), np.log(mx), 1)[0])


# --------------------------------------------------------------------------
# analyticity fit
# --------------------------------------------------------------------------

@dataclass
class AnalyticityReport:
    a_max: int
    J: int
    alphas: list
    M: list
    c: list
    order_c: list
    C_star: float
    slope: float
    verdict: str
    slope_tol: float
    growth_tol: float
    diagnostic: str = ""
    heuristic: bool = True

    def to_dict(self):
        return {
            "kind": "analyticity_fit", "a_max": self.a_max, "J": self.J,
            "alphas": [list(a) for a in self.alphas], "M": list(self.M), "c": list(self.c),
            "order_c": list(self.order_c), "C_star": self.C_star, "slope": self.slope,
            "verdict": self.verdict, "slope_tol": self.slope_tol,
            "growth_tol": self.growth_tol, "diagnostic": self.diagnostic,
            "heuristic": self.heuristic,
        }

    def satisfies_bound(self, C=None) -> bool:
        """M_alpha <= C^(1+|alpha|) alpha! for all tabulated alpha (C defaults to C*)."""
        C = self.C_star if C is None else C
        return all(Ma <= C ** (1 + sum(a)) * fc.mi_factorial(a) * (1 + 1e-12)
                   for a, Ma in zip(self.alphas, self.M))


def growth_constants(alphas, M):
    """c_alpha = (M_alpha / alpha!)^(1/(1+|alpha|)), via logarithms."""
    c = []
    for a, Ma in zip(alphas, M):
        if Ma <= 0:
            c.append(0.0)
            continue
        log_fact = sum(math.lgamma(ai + 1) for ai in a)
        c.append(math.exp((math.log(Ma) - log_fact) / (1 + sum(a))))
    return c


def classify_growth(alphas, M, a_max, slope_tol=SLOPE_TOL_DEFAULT, growth_tol=GROWTH_TOL_DEFAULT):
    """Plateau heuristic shared by the symbol and orbit sides.

    Returns (c, order_c, C_star, slope, verdict).  The slope is a least-squares
    fit of max_{|alpha|=k} c_alpha against k over the top half of the orders.
    """
    c = growth_constants(alphas, M)
    order_c = [0.0] * (a_max + 1)
    for a, ca in zip(alphas, c):
        order_c[sum(a)] = max(order_c[sum(a)], ca)
    C_star = max(c)
    lo = (a_max + 1) // 2
    ks = np.arange(lo, a_max + 1)
    top = np.array(order_c[lo:])
    if not np.all(np.isfinite(top)) or not math.isfinite(C_star):
        return c, order_c, C_star, float("nan"), "inconclusive"
    slope = float(np.polyfit(ks, top, 1)[0]) if len(ks) > 1 else 0.0
    if slope <= slope_tol:
        verdict = "uniformly-analytic"
    elif top[0] > 0 and top[-1] >= (1 + growth_tol) * top[0] and np.all(np.diff(top) >= -1e-12 * top[1:]):
        verdict = "not-analytic"
    else:
        verdict = "inconclusive"
    return c, order_c, C_star, slope, verdict


def analyticity_fit(s: DiscreteSymbol, a_max: int = 10, slope_tol: float = SLOPE_TOL_DEFAULT,
                    growth_tol: float = GROWTH_TOL_DEFAULT, oversample: int = 4,
                    diff_cap: int = fc.A_MAX_DEFAULT) -> AnalyticityReport:
    """Fit the constant in |d^alpha a_j| <= C^(1+|alpha|) alpha! on |j| <= J, |alpha| <= a_max.

    The verdict is a heuristic: "uniformly-analytic" when the per-order
    constants plateau, "not-analytic" when they keep growing, "inconclusive"
    otherwise.
    """
    if a_max < 4:
        raise SymbolError(f"a_max must be >= 4 for the plateau statistic, got {a_max}")
    if a_max > diff_cap:
        return AnalyticityReport(a_max, s.J, [], [], [], [], float("nan"), float("nan"),
                                 "inconclusive", slope_tol, growth_tol,
                                 diagnostic=f"a_max {a_max} exceeds differentiation cap {diff_cap}")
    alphas = list(fc.multi_indices(s.n, a_max))
    sups = derivative_sups(s, alphas, oversample, diff_cap)
    M = [float(v) for v in sups.reshape(len(alphas), -1).max(axis=1)]
    c, order_c, C_star, slope, verdict = classify_growth(alphas, M, a_max, slope_tol, growth_tol)
    return AnalyticityReport(a_max, s.J, alphas, M, c, order_c, C_star, slope, verdict,
                             slope_tol, growth_tol)


def spec_depends_on_j(spec: SymbolSpec) -> bool:
    return any(isinstance(nd, Name) and nd.name.startswith("j") for nd in walk(spec.ast))
