"""Periodic functions on the torus T^n = R^n / (2 pi Z)^n.

A :class:`PeriodicFunction` stores truncated Fourier coefficients

    u_hat[k] = integral over T^n of exp(-i k.x) u(x) dx,

for k in the half-open box {-N/2, ..., N/2 - 1}^n, and synthesizes with the
prefactor (2 pi)^-n.  Coefficient arrays are kept in numpy FFT order along
every axis; :func:`wavenumbers` gives the signed integer frequency of each slot.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import product
from typing import Iterator, Sequence

import numpy as np
from scipy import fft as sfft

TWO_PI = 2.0 * np.pi

#: default cap on the total order of spectral differentiation
A_MAX_DEFAULT = 20


class FourierError(ValueError):
    """Structural error: grid mismatch, bad shapes, refused operations."""


class DifferentiationCapError(FourierError):
    """Derivative order beyond the configured cap."""

    def __init__(self, alpha, cap):
        super().__init__(f"|alpha| = {sum(alpha)} exceeds the differentiation cap {cap} "
                         f"(alpha = {tuple(alpha)}); (ik)^alpha amplification makes the "
                         "result meaningless in double precision")
        self.alpha = tuple(alpha)
        self.cap = cap


# --------------------------------------------------------------------------
# multi-indices
# --------------------------------------------------------------------------

def as_multi_index(alpha, n: int | None = None) -> tuple[int, ...]:
    """Validate a multi-index (tuple of non-negative ints)."""
    alpha = tuple(int(a) for a in np.atleast_1d(alpha))
    if any(a < 0 for a in alpha):
        raise FourierError(f"multi-index must be non-negative, got {alpha}")
    if n is not None and len(alpha) != n:
        raise FourierError(f"multi-index {alpha} has length {len(alpha)}, expected {n}")
    return alpha


def mi_factorial(alpha: Sequence[int]) -> int:
    """alpha! = prod(alpha_i!), as an exact integer."""
    return math.prod(math.factorial(a) for a in alpha)


def multi_indices(n: int, max_order: int, min_order: int = 0) -> Iterator[tuple[int, ...]]:
    """Multi-indices of length n with min_order <= |alpha| <= max_order.

    Graded lexicographic: by total order, then lexicographically descending
    in the leading component, so (1, 0) precedes (0, 1).
    """
    for total in range(min_order, max_order + 1):
        yield from _compositions(n, total)


def _compositions(n, total):
    if n == 1:
        yield (total,)
        return
    for first in range(total, -1, -1):
        for rest in _compositions(n - 1, total - first):
            yield (first,) + rest


def freq_box(n: int, J: int) -> list[tuple[int, ...]]:
    """All frequencies j with |j|_inf <= J, row-major (j_1 slowest)."""
    return list(product(range(-J, J + 1), repeat=n))


# --------------------------------------------------------------------------
# grid
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class TorusGrid:
    """Uniform grid x_k = 2 pi k / N on T^n, N even."""

    n: int
    N: int

    def __post_init__(self):
        if not 1 <= self.n <= 3:
            raise FourierError(f"dimension must be 1, 2 or 3, got {self.n}")
        if self.N < 4 or self.N % 2:
            raise FourierError(f"points per dimension must be even and >= 4, got {self.N}")

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.N,) * self.n

    @property
    def weight(self) -> float:
        """Quadrature weight (2 pi / N)^n."""
        return (TWO_PI / self.N) ** self.n

    def nodes(self) -> list[np.ndarray]:
        """Coordinate arrays x_1, ..., x_n broadcast over the grid (ij indexing)."""
        x = TWO_PI * np.arange(self.N) / self.N
        return list(np.meshgrid(*([x] * self.n), indexing="ij"))

    def wavenumbers(self) -> list[np.ndarray]:
        """Signed integer frequency per axis in FFT order, broadcastable."""
        k = np.fft.fftfreq(self.N, 1.0 / self.N).astype(np.int64)
        out = []
        for d in range(self.n):
            shape = [1] * self.n
            shape[d] = self.N
            out.append(k.reshape(shape))
        return out

    def refined(self, factor: int) -> "TorusGrid":
        return TorusGrid(self.n, self.N * factor)

    def slot(self, k: Sequence[int]) -> tuple[int, ...]:
        """Array position of frequency k; raises if k is outside the box."""
        half = self.N // 2
        if len(k) != self.n or any(not -half <= ki < half for ki in k):
            raise FourierError(f"frequency {tuple(k)} outside the box of grid N={self.N}")
        return tuple(int(ki) % self.N for ki in k)


# --------------------------------------------------------------------------
# periodic function
# --------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class PeriodicFunction:
    """Truncated Fourier representation of a function on T^n."""

    grid: TorusGrid
    coeffs: np.ndarray
    _values: list = field(default_factory=list, repr=False, compare=False)

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=np.complex128)
        if c.shape != self.grid.shape:
            raise FourierError(f"coefficient array shape {c.shape} does not match grid {self.grid.shape}")
        c = c.copy() if c is self.coeffs else c
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    # views
    def values(self) -> np.ndarray:
        """Grid samples (cached)."""
        if not self._values:
            v = synthesize(self)
            v.setflags(write=False)
            self._values.append(v)
        return self._values[0]

    def coef(self, k: Sequence[int]) -> complex:
        return complex(self.coeffs[self.grid.slot(k)])

    def is_real(self, tol: float = 1e-12) -> bool:
        """True iff u_hat[-k] = conj(u_hat[k]) for all k (Nyquist slots excluded)."""
        c = self.coeffs
        flipped = c
        for ax in range(c.ndim):
            flipped = np.roll(np.flip(flipped, axis=ax), 1, axis=ax)
        mask = np.ones(c.shape, bool)
        for ax in range(c.ndim):
            idx = [slice(None)] * c.ndim
            idx[ax] = self.grid.N // 2
            mask[tuple(idx)] = False
        scale = max(np.abs(c).max(), 1e-300)
        return bool(np.all(np.abs(c - np.conj(flipped))[mask] <= tol * scale))

    # arithmetic sugar
    def __add__(self, other):
        if isinstance(other, PeriodicFunction):
            return pointwise_add(self, other)
        return pointwise_add(self, constant(self.grid, other))

    __radd__ = __add__

    def __neg__(self):
        return PeriodicFunction(self.grid, -self.coeffs)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, PeriodicFunction):
            return pointwise_mul(self, other)
        return PeriodicFunction(self.grid, self.coeffs * complex(other))

    __rmul__ = __mul__


def _check_samples(grid: TorusGrid, values) -> np.ndarray:
    v = np.asarray(values)
    if v.shape != grid.shape:
        raise FourierError(f"sample array shape {v.shape} does not match grid {grid.shape}")
    return v


def analyze(grid: TorusGrid, values) -> PeriodicFunction:
    """Fourier coefficients of grid samples by the trapezoid (DFT) rule.

    Exact for trigonometric polynomials whose frequencies lie in the box.
    """
    v = _check_samples(grid, values)
    return PeriodicFunction(grid, np.fft.fftn(v) * grid.weight)


def synthesize(f: PeriodicFunction) -> np.ndarray:
    """Grid samples u(x_k) = (2 pi)^-n sum_j u_hat[j] exp(i j.x_k)."""
    g = f.grid
    return np.fft.ifftn(f.coeffs) * (g.N / TWO_PI) ** g.n


def from_function(grid: TorusGrid, func) -> PeriodicFunction:
    """Sample ``func(x_1, ..., x_n)`` on the grid and analyze."""
    return analyze(grid, np.broadcast_to(func(*grid.nodes()), grid.shape))


def constant(grid: TorusGrid, c: complex) -> PeriodicFunction:
    coeffs = np.zeros(grid.shape, np.complex128)
    coeffs[(0,) * grid.n] = complex(c) * TWO_PI ** grid.n
    return PeriodicFunction(grid, coeffs)


def exponential(grid: TorusGrid, j: Sequence[int]) -> PeriodicFunction:
    """e_j(x) = exp(i j.x)."""
    coeffs = np.zeros(grid.shape, np.complex128)
    coeffs[grid.slot(j)] = TWO_PI ** grid.n
    return PeriodicFunction(grid, coeffs)


def zero(grid: TorusGrid) -> PeriodicFunction:
    return PeriodicFunction(grid, np.zeros(grid.shape, np.complex128))


# --------------------------------------------------------------------------
# Fourier multipliers
# --------------------------------------------------------------------------

def derivative_multiplier(grid: TorusGrid, alpha: Sequence[int]) -> np.ndarray:
    """(ik)^alpha on the coefficient box, broadcast to the grid shape."""
    m = np.ones(grid.shape, np.complex128)
    for k, a in zip(grid.wavenumbers(), alpha):
        if a:
            m = m * (1j * k) ** a
    return m


def translation_multiplier(grid: TorusGrid, y: Sequence[float]) -> np.ndarray:
    y = np.broadcast_to(np.asarray(y, float), (grid.n,))
    phase = sum(k * yi for k, yi in zip(grid.wavenumbers(), y))
    return np.broadcast_to(np.exp(-1j * phase), grid.shape)


def laplacian_multiplier(grid: TorusGrid, p: int) -> np.ndarray:
    """(1 + |k|^2)^p."""
    k2 = sum(k.astype(float) ** 2 for k in grid.wavenumbers())
    return np.broadcast_to((1.0 + k2) ** p, grid.shape)


def check_order(alpha: Sequence[int], a_max: int = A_MAX_DEFAULT) -> None:
    if sum(alpha) > a_max:
        raise DifferentiationCapError(alpha, a_max)


def derivative(f: PeriodicFunction, alpha, a_max: int = A_MAX_DEFAULT) -> PeriodicFunction:
    """Spectral derivative d^alpha f (coefficients times (ik)^alpha)."""
    alpha = as_multi_index(alpha, f.grid.n)
    check_order(alpha, a_max)
    return PeriodicFunction(f.grid, f.coeffs * derivative_multiplier(f.grid, alpha))


def translate(f: PeriodicFunction, y) -> PeriodicFunction:
    """(T_y f)(x) = f(x - y), exact for any real shift."""
    return PeriodicFunction(f.grid, f.coeffs * translation_multiplier(f.grid, y))


def one_minus_laplacian_pow(f: PeriodicFunction, p: int) -> PeriodicFunction:
    """(1 - Laplacian)^p f."""
    if p < 0:
        raise FourierError(f"power p must be non-negative, got {p}")
    return PeriodicFunction(f.grid, f.coeffs * laplacian_multiplier(f.grid, p))


# --------------------------------------------------------------------------
# padding, products, sup norms
# --------------------------------------------------------------------------

def _axis_map(N_from: int, N_to: int) -> tuple[np.ndarray, np.ndarray]:
    """Slots shared between boxes of size N_from and N_to (signed frequencies)."""
    M = min(N_from, N_to)
    k = np.arange(-(M // 2), M // 2)
    return k % N_from, k % N_to


def resize_coeffs(c: np.ndarray, N_to: int) -> np.ndarray:
    """Zero-pad or truncate an FFT-ordered coefficient box to size N_to per axis."""
    n = c.ndim
    N_from = c.shape[0]
    src, dst = _axis_map(N_from, N_to)
    out = np.zeros((N_to,) * n, np.complex128)
    out[np.ix_(*([dst] * n))] = c[np.ix_(*([src] * n))]
    return out


def resample(f: PeriodicFunction, N: int) -> PeriodicFunction:
    """Same function (truncated if N is smaller) on a grid with N points per axis."""
    g = TorusGrid(f.grid.n, N)
    return PeriodicFunction(g, resize_coeffs(f.coeffs, N))


def _check_same_grid(f, g):
    if f.grid != g.grid:
        raise FourierError(f"grid mismatch: {f.grid} vs {g.grid}")


def pointwise_add(f: PeriodicFunction, g: PeriodicFunction) -> PeriodicFunction:
    _check_same_grid(f, g)
    return PeriodicFunction(f.grid, f.coeffs + g.coeffs)


def pointwise_mul(f: PeriodicFunction, g: PeriodicFunction) -> PeriodicFunction:
    """Product, anti-aliased on a 2x grid and truncated back to the box."""
    _check_same_grid(f, g)
    N2 = 2 * f.grid.N
    fine = f.grid.refined(2)
    fv = synthesize(PeriodicFunction(fine, resize_coeffs(f.coeffs, N2)))
    gv = synthesize(PeriodicFunction(fine, resize_coeffs(g.coeffs, N2)))
    prod = analyze(fine, fv * gv)
    return PeriodicFunction(f.grid, resize_coeffs(prod.coeffs, f.grid.N))


def modulate(f: PeriodicFunction, j: Sequence[int]) -> PeriodicFunction:
    """e_j * f as an exact coefficient shift, truncated to the box.

    Equals ``pointwise_mul(f, exponential(grid, j))``; the shift skips the FFTs.
    """
    return PeriodicFunction(f.grid, shift_coeffs(f.coeffs, j))


def shift_coeffs(c: np.ndarray, j: Sequence[int]) -> np.ndarray:
    """Coefficients of e_j * f: out[k] = c[k - j], zero where k - j leaves the box."""
    N = c.shape[0]
    half = N // 2
    out = np.zeros_like(c)
    src, dst = [], []
    for ji in j:
        k = np.arange(-half, half)
        keep = (k - ji >= -half) & (k - ji < half)
        dst.append(k[keep] % N)
        src.append((k[keep] - ji) % N)
    out[np.ix_(*dst)] = c[np.ix_(*src)]
    return out


def sup_norm(f: PeriodicFunction, oversample: int = 4) -> float:
    """max |f| over the grid refined by zero-padding the spectrum.

    The coarse nodes are a subset of the refined ones, so the value is
    non-decreasing along oversample chains s | s'.
    """
    if oversample < 1:
        raise FourierError(f"oversample must be >= 1, got {oversample}")
    N = f.grid.N * int(oversample)
    fine = PeriodicFunction(f.grid.refined(int(oversample)), resize_coeffs(f.coeffs, N))
    return float(np.abs(synthesize(fine)).max())


def sup_norm_coeffs(c: np.ndarray, n: int, oversample: int = 4) -> np.ndarray:
    """Batched sup norm: ``c`` has shape (batch,) + (N,)*n."""
    N = c.shape[-1]
    Nf = N * int(oversample)
    src, dst = _axis_map(N, Nf)
    fine = np.zeros(c.shape[:-n] + (Nf,) * n, np.complex128)
    fine[(Ellipsis,) + np.ix_(*([dst] * n))] = c[(Ellipsis,) + np.ix_(*([src] * n))]
    axes = tuple(range(-n, 0))
    vals = sfft.ifftn(fine, axes=axes, overwrite_x=True).reshape(c.shape[:-n] + (-1,))
    peak = (vals.real ** 2 + vals.imag ** 2).max(axis=-1)
    return np.sqrt(peak) * (Nf / TWO_PI) ** n


def chop_coeffs(c: np.ndarray, rtol: float, n: int) -> np.ndarray:
    """Zero coefficients below ``rtol`` times the largest one of each function.

    ``c`` may carry leading batch axes; the last ``n`` axes are the box.
    Round-off in sampled data sits near 1e-16 relative and would otherwise be
    amplified by (ik)^alpha under differentiation.
    """
    if rtol <= 0:
        return c
    axes = tuple(range(-n, 0))
    scale = np.abs(c).max(axis=axes, keepdims=True)
    return np.where(np.abs(c) < rtol * scale, 0, c)


def chop(f: PeriodicFunction, rtol: float = 1e-14) -> PeriodicFunction:
    return PeriodicFunction(f.grid, chop_coeffs(f.coeffs, rtol, f.grid.n))


def l2_norm_sq(f: PeriodicFunction) -> float:
    """(2 pi)^-n sum |u_hat|^2 (Parseval)."""
    return float(np.sum(np.abs(f.coeffs) ** 2) / TWO_PI ** f.grid.n)
