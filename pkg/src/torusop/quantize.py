"""Quantization Op(a_j) and truncated operator matrices.

An operator is realised on the span of e_k, |k|_inf <= K, with rows and
columns ordered lexicographically (row-major over (k_1, ..., k_n), each from
-K to K).  Entry M[l, k] is the coefficient of e_l in A e_k, so that

    A e_k = sum_l M[l, k] e_l,    M[l, k] = (a_k)^_(l - k) / (2 pi)^n.
"""
from __future__ import annotations

import io
import math
import struct
import warnings
from dataclasses import dataclass

import numpy as np

from . import fourier as fc
from .fourier import PeriodicFunction, TorusGrid, TWO_PI
from .lattice import lattice_constant
from .symbols import DiscreteSymbol, constant_symbol, entry_sup_norms

ORDERING = "lex"
MAGIC = b"TOPM"
FORMAT_VERSION = 1
BANDWIDTH_RTOL = 1e-10


class QuantizeError(ValueError):
    pass


class AliasingError(QuantizeError):
    pass


class NormConvergenceError(RuntimeError):
    def __init__(self, msg, estimate):
        super().__init__(f"{msg} (best estimate {estimate!r})")
        self.estimate = estimate


class CutoffWarning(UserWarning):
    pass


# --------------------------------------------------------------------------
# truncated operators
# --------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class TruncatedOperator:
    """Dense matrix of an operator on the modes |k|_inf <= K."""

    n: int
    K: int
    matrix: np.ndarray

    def __post_init__(self):
        M = np.array(self.matrix, dtype=np.complex128)
        d = (2 * self.K + 1) ** self.n
        if M.shape != (d, d):
            raise QuantizeError(f"matrix shape {M.shape} does not match (2K+1)^n = {d}")
        if not np.all(np.isfinite(M)):
            raise QuantizeError("matrix contains non-finite entries")
        M.setflags(write=False)
        object.__setattr__(self, "matrix", M)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def modes(self) -> np.ndarray:
        """Frequencies labelling rows/columns, shape (dim, n)."""
        return np.array(fc.freq_box(self.n, self.K), dtype=np.int64).reshape(-1, self.n)

    def index(self, k) -> int:
        k = tuple(int(v) for v in k)
        if len(k) != self.n or max(abs(v) for v in k) > self.K:
            raise QuantizeError(f"mode {k} outside |k| <= {self.K}")
        idx = 0
        for v in k:
            idx = idx * (2 * self.K + 1) + (v + self.K)
        return idx

    def entry(self, l, k) -> complex:
        return complex(self.matrix[self.index(l), self.index(k)])

    def interior(self, margin: int) -> np.ndarray:
        """Boolean mask of modes with |k|_inf <= K - margin."""
        return np.abs(self.modes()).max(axis=1) <= self.K - margin

    def __matmul__(self, other):
        return compose(self, other)

    def __add__(self, other):
        _check_compatible(self, other)
        return TruncatedOperator(self.n, self.K, self.matrix + other.matrix)

    def __sub__(self, other):
        _check_compatible(self, other)
        return TruncatedOperator(self.n, self.K, self.matrix - other.matrix)

    def __mul__(self, c):
        return TruncatedOperator(self.n, self.K, self.matrix * complex(c))

    __rmul__ = __mul__


def _check_compatible(A, B):
    if (A.n, A.K) != (B.n, B.K):
        raise QuantizeError(f"operator boxes differ: (n={A.n}, K={A.K}) vs (n={B.n}, K={B.K})")


def identity(n: int, K: int) -> TruncatedOperator:
    return TruncatedOperator(n, K, np.eye((2 * K + 1) ** n, dtype=np.complex128))


def compose(A: TruncatedOperator, B: TruncatedOperator) -> TruncatedOperator:
    _check_compatible(A, B)
    return TruncatedOperator(A.n, A.K, A.matrix @ B.matrix)


def adjoint(A: TruncatedOperator) -> TruncatedOperator:
    return TruncatedOperator(A.n, A.K, A.matrix.conj().T)


def inverse(A: TruncatedOperator, cond_max: float = 1e12) -> tuple[TruncatedOperator, float]:
    """Dense inverse; refuses when the 2-norm condition number exceeds ``cond_max``."""
    cond = float(np.linalg.cond(A.matrix))
    if not cond <= cond_max:
        raise QuantizeError(f"matrix is singular or ill-conditioned (cond = {cond:.3e} > {cond_max:.1e})")
    return TruncatedOperator(A.n, A.K, np.linalg.inv(A.matrix)), cond


def coefficient_vector(u: PeriodicFunction, K: int) -> np.ndarray:
    """(u_hat_k / (2 pi)^n) over |k|_inf <= K, i.e. u = sum_k v_k e_k on that span."""
    n = u.grid.n
    modes = np.array(fc.freq_box(n, K)).reshape(-1, n)
    slots = tuple((modes % u.grid.N).T)
    return u.coeffs[slots] / TWO_PI ** n


def from_coefficient_vector(v: np.ndarray, grid: TorusGrid, K: int) -> PeriodicFunction:
    n = grid.n
    modes = np.array(fc.freq_box(n, K)).reshape(-1, n)
    c = np.zeros(grid.shape, np.complex128)
    c[tuple((modes % grid.N).T)] = np.asarray(v) * TWO_PI ** n
    return PeriodicFunction(grid, c)


# --------------------------------------------------------------------------
# symbol <-> matrix
# --------------------------------------------------------------------------

def bandwidth(s: DiscreteSymbol, rtol: float = BANDWIDTH_RTOL, J: int | None = None) -> int:
    """Largest |m|_inf with |(a_j)^_m| > rtol * max over the family (|j|_inf <= J)."""
    c = s.coeffs if J is None else s.restrict(J).coeffs
    c = np.abs(c.reshape((-1,) + s.grid.shape)).max(axis=0)
    big = c > rtol * max(c.max(), 1e-300)
    if not big.any():
        return 0
    ms = [np.abs(k) for k in s.grid.wavenumbers()]
    reach = np.maximum.reduce([np.broadcast_to(m, s.grid.shape) for m in ms])
    return int(reach[big].max())


def apply(s: DiscreteSymbol, u: PeriodicFunction, strict: bool = False,
          energy_tol: float = 1e-10) -> PeriodicFunction:
    """Au = (2 pi)^-n sum_{|j|_inf <= J} a_j e_j u_hat_j.

    Modes of u outside the symbol box are dropped; if they carry more than
    ``energy_tol`` of the energy this warns (or raises when ``strict``).
    """
    if u.grid != s.grid:
        raise fc.FourierError(f"grid mismatch: symbol on {s.grid}, function on {u.grid}")
    n, J, N = s.n, s.J, s.grid.N
    if J >= N // 2:
        raise QuantizeError(f"symbol cutoff J={J} needs J < N/2 = {N // 2}")
    modes = np.array(s.freqs()).reshape(-1, n)
    slots = tuple((modes % N).T)
    inside = np.abs(u.coeffs[slots]) ** 2
    total = float(np.sum(np.abs(u.coeffs) ** 2))
    outside = total - float(inside.sum())
    if total > 0 and outside > energy_tol * total:
        msg = f"input carries {outside / total:.2e} of its energy outside |j| <= {J}"
        if strict:
            raise QuantizeError(msg)
        warnings.warn(msg, CutoffWarning, stacklevel=2)
    out = np.zeros(s.grid.shape, np.complex128)
    flat = s.flat()
    for idx, j in enumerate(map(tuple, modes)):
        uj = u.coeffs[tuple(ji % N for ji in j)]
        if uj != 0:
            out += uj * fc.shift_coeffs(flat[idx], j)
    return PeriodicFunction(s.grid, out / TWO_PI ** n)


def check_resolution(s: DiscreteSymbol, K: int, bandwidth_rtol: float = BANDWIDTH_RTOL) -> int:
    """Raise :class:`AliasingError` unless K + bandwidth <= N/2; returns the bandwidth."""
    b = bandwidth(s, bandwidth_rtol, J=min(K, s.J))
    if K + b > s.grid.N // 2:
        raise AliasingError(f"K + bandwidth = {K} + {b} exceeds N/2 = {s.grid.N // 2}; refine the grid")
    return b


def to_matrix(s: DiscreteSymbol, K: int, bandwidth_rtol: float | None = BANDWIDTH_RTOL) -> TruncatedOperator:
    """Matrix of Op(a_j) on |k|_inf <= K: column k holds the coefficients of a_k e_k.

    ``bandwidth_rtol=None`` skips the resolution check; used for derivatives
    of an already checked symbol, whose high modes are amplified on purpose.
    """
    n, N = s.n, s.grid.N
    if K > s.J:
        raise QuantizeError(f"matrix cutoff K={K} exceeds symbol cutoff J={s.J}")
    if bandwidth_rtol is not None:
        check_resolution(s, K, bandwidth_rtol)
    modes = np.array(fc.freq_box(n, K)).reshape(-1, n)
    cols = s.restrict(K).flat().reshape(len(modes), -1)
    off = modes[:, None, :] - modes[None, :, :]
    valid = np.all((off >= -N // 2) & (off < N // 2), axis=-1)
    slot = np.zeros(off.shape[:2], np.int64)
    for d in range(n):
        slot = slot * N + (off[..., d] % N)
    kk = np.broadcast_to(np.arange(len(modes))[None, :], slot.shape)
    M = np.where(valid, cols[kk, slot], 0) / TWO_PI ** n
    return TruncatedOperator(n, K, M)


def default_grid_for(n: int, reach: int) -> TorusGrid:
    N = 8
    while N // 2 <= reach:
        N *= 2
    return TorusGrid(n, N)


def extract_symbol(A: TruncatedOperator, J_out: int, grid: TorusGrid | None = None) -> DiscreteSymbol:
    """a_j = e_-j (A e_j), read from column j on the interior modes |m| <= K - J_out."""
    if J_out > A.K or J_out < 0:
        raise QuantizeError(f"J_out={J_out} needs 0 <= J_out <= K={A.K}")
    reach = A.K - J_out
    n = A.n
    if grid is None:
        grid = default_grid_for(n, reach)
    if reach >= grid.N // 2:
        raise QuantizeError(f"grid N={grid.N} cannot hold modes |m| <= {reach}")
    js = np.array(fc.freq_box(n, J_out)).reshape(-1, n)
    ms = np.array(fc.freq_box(n, reach)).reshape(-1, n)
    col = _lex_index(js, A.K)
    row = _lex_index(js[:, None, :] + ms[None, :, :], A.K)
    vals = A.matrix[row, col[:, None]] * TWO_PI ** n
    table = np.zeros((len(js),) + grid.shape, np.complex128)
    mslots = tuple((ms % grid.N).T)
    for i in range(len(js)):
        table[(i,) + mslots] = vals[i]
    return DiscreteSymbol(grid, J_out, table.reshape((2 * J_out + 1,) * n + grid.shape))


def _lex_index(k, K):
    k = np.asarray(k)
    idx = np.zeros(k.shape[:-1], np.int64)
    for d in range(k.shape[-1]):
        idx = idx * (2 * K + 1) + (k[..., d] + K)
    return idx


def conjugate_translation(A: TruncatedOperator, y) -> TruncatedOperator:
    """T_y A T_-y: entry (l, k) picks up exp(-i (l - k).y)."""
    y = np.broadcast_to(np.asarray(y, float), (A.n,))
    phase = A.modes() @ y
    D = np.exp(-1j * phase)
    return TruncatedOperator(A.n, A.K, D[:, None] * A.matrix * D.conj()[None, :])


# --------------------------------------------------------------------------
# norms
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class NormEstimate:
    value: float
    rayleigh_change: float
    residual: float
    squarings: int
    seed: int


def operator_norm(A, tol: float = 1e-10, seed: int = 0, max_squarings: int = 64,
                  full: bool = False):
    """Largest singular value by power iteration on A*A.

    The power is doubled at every step by squaring the normalised Gram matrix,
    so the start vector sees (A*A)^(2^s) after s steps.  Iteration stops when
    the Rayleigh quotient changes by at most ``tol`` (relative) between
    doublings; the final eigen-residual is reported alongside.
    """
    M = A.matrix if isinstance(A, TruncatedOperator) else np.asarray(A, dtype=np.complex128)
    if tol <= 0:
        raise ValueError("tol must be positive")
    B = M.conj().T @ M
    scale = float(np.linalg.norm(B))
    if scale == 0.0:
        est = NormEstimate(0.0, 0.0, 0.0, 0, seed)
        return est if full else 0.0
    B = B / scale
    rng = np.random.default_rng(seed)
    v0 = rng.standard_normal(B.shape[0]) + 1j * rng.standard_normal(B.shape[0])
    X = B.copy()
    lam_prev = None
    change = math.inf
    for s in range(1, max_squarings + 1):
        v = X @ v0
        nv = np.linalg.norm(v)
        if nv == 0.0:
            v0 = rng.standard_normal(B.shape[0]) + 0j
            continue
        v /= nv
        Bv = B @ v
        lam = float(np.real(np.vdot(v, Bv)))
        if lam_prev is not None:
            change = abs(lam - lam_prev) / max(lam, 1e-300)
            if change <= tol:
                break
        lam_prev = lam
        X = X @ X
        X /= np.linalg.norm(X)
    else:
        raise NormConvergenceError(f"power iteration did not settle within {max_squarings} squarings",
                                   math.sqrt(max(lam_prev or 0.0, 0.0) * scale))
    residual = float(np.linalg.norm(Bv - lam * v)) / max(lam, 1e-300)
    sigma = math.sqrt(max(lam, 0.0) * scale)
    est = NormEstimate(sigma, change, residual, s, seed)
    return est if full else sigma


# --------------------------------------------------------------------------
# lattice norm bound
# --------------------------------------------------------------------------

@dataclass
class NormBoundRecord:
    p: int
    n: int
    K: int
    J: int
    C_p: float
    C_p_upper: float
    C_p_detail: dict
    sup_term: float
    bound: float
    measured: float
    slack: float
    holds: bool
    tolerance: float
    seed: int

    def to_dict(self):
        d = dict(self.__dict__)
        d["kind"] = "norm_bound"
        return d


def norm_bound_check(s: DiscreteSymbol, p: int, K: int, tolerance: float = 1e-8,
                     oversample: int = 4, norm_tol: float = 1e-10, seed: int = 0) -> NormBoundRecord:
    """Compare the truncated norm of Op(a_j) with C_p sup |(1 - Laplacian)^p a_j|."""
    n = s.n
    if not p > n / 2:
        raise QuantizeError(f"norm bound needs an integer p > n/2 (n={n}, p={p})")
    C = lattice_constant(n, p)
    sup_term = float(entry_sup_norms(s, fc.laplacian_multiplier(s.grid, p), oversample).max())
    bound = C.upper * sup_term
    measured = operator_norm(to_matrix(s, K), tol=norm_tol, seed=seed)
    return NormBoundRecord(p, n, K, s.J, C.value, C.upper, C.to_dict(), sup_term, bound, measured,
                           bound - measured, bool(measured <= bound + tolerance), tolerance, seed)


def coefficient_norm_bound(s: DiscreteSymbol) -> float:
    """||Op(a_j)|| <= (2 pi)^-n sum_m sup_j |(a_j)^_m|.

    Op(a_j) is the sum over m of e_m times the Fourier multiplier j -> (a_j)^_m / (2 pi)^n.
    """
    c = np.abs(s.flat()).max(axis=0)
    return float(c.sum() / TWO_PI ** s.n)


# --------------------------------------------------------------------------
# persistence
# --------------------------------------------------------------------------

_HEADER = struct.Struct("<4sIII8s")


def save_matrix(A: TruncatedOperator, path) -> None:
    """Header (magic, version, n, K, ordering tag) then row-major little-endian complex128."""
    header = _HEADER.pack(MAGIC, FORMAT_VERSION, A.n, A.K, ORDERING.encode().ljust(8, b"\0"))
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(A.matrix, dtype="<c16").tobytes(order="C"))


def load_matrix(path) -> TruncatedOperator:
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < _HEADER.size:
        raise QuantizeError("file too short for a matrix header")
    magic, version, n, K, tag = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise QuantizeError(f"bad magic {magic!r}")
    if version != FORMAT_VERSION:
        raise QuantizeError(f"unsupported format version {version}")
    if tag.rstrip(b"\0").decode() != ORDERING:
        raise QuantizeError(f"unsupported ordering {tag!r}")
    d = (2 * K + 1) ** n
    body = np.frombuffer(raw, dtype="<c16", offset=_HEADER.size)
    if body.size != d * d:
        raise QuantizeError(f"expected {d * d} entries, found {body.size}")
    return TruncatedOperator(n, K, body.reshape(d, d))


def matrix_csv(A: TruncatedOperator) -> str:
    """Columns: row, col, l, k, re, im (l, k space-separated mode components)."""
    buf = io.StringIO()
    buf.write("row,col,l,k,re,im\n")
    modes = A.modes()
    labels = [" ".join(str(int(v)) for v in m) for m in modes]
    for r in range(A.dim):
        for c in range(A.dim):
            z = A.matrix[r, c]
            buf.write(f"{r},{c},{labels[r]},{labels[c]},{z.real:.17g},{z.imag:.17g}\n")
    return buf.getvalue()


def identity_symbol(grid: TorusGrid, J: int) -> DiscreteSymbol:
    return constant_symbol(grid, J, 1.0)
