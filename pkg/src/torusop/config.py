"""Experiment configuration: strict TOML loading with field-path errors.

Every section maps onto a frozen dataclass.  Unknown keys, wrong types and
violated invariants raise :class:`ConfigError` naming the offending path,
e.g. ``experiment.K``.  ``to_dict`` / ``from_dict`` round-trip exactly, which
is how a report's config echo is re-run.
"""
from __future__ import annotations

import dataclasses
import json
import typing
from dataclasses import dataclass, field
from pathlib import Path

import tomli

from .catalog import CatalogError, get_entry
from .dsl import SpecSyntaxError, parse_symbol_spec
from .fourier import multi_indices


class ConfigError(ValueError):
    def __init__(self, path: str, msg: str):
        super().__init__(f"{path}: {msg}" if path else msg)
        self.path = path


@dataclass(frozen=True)
class ExperimentSection:
    n: int = 1
    N: int = 128
    J: int = 8
    K: int = 8
    A_max: int = 10
    A_max_alt: int = 14
    # empty means the two smallest integers p > n/2
    p: tuple = ()
    seed: int = 0
    oversample: int = 4


@dataclass(frozen=True)
class SymbolSection:
    catalog: str = ""
    spec: str = ""
    params: dict = field(default_factory=dict)


@dataclass(frozen=True)
class TolerancesSection:
    norm: float = 1e-10
    bound: float = 1e-8
    slope: float = 0.05
    growth: float = 0.1
    b_max: float = 1e6
    two_path: float = 1e-12
    richardson_low: float = 12.0
    richardson_high: float = 20.0
    roundtrip: float = 1e-11
    chain: float = 1e-6
    cond_max: float = 1e12
    c_star_variation: float = 0.1


@dataclass(frozen=True)
class OrbitSection:
    h: float = 1e-2
    # empty: every alpha with 1 <= |alpha| <= 2
    alphas: tuple = ()
    y_count: int = 20
    taylor_degrees: tuple = (2, 4, 6)
    taylor_radius: float = 0.1
    taylor_samples: int = 6


@dataclass(frozen=True)
class InvertSection:
    lam: float = 4.0
    eps: float = 1.0
    J_out: int = 2
    neumann_terms: int = 12


@dataclass(frozen=True)
class RecoverSection:
    # empty: (2, ..., 2)
    beta: tuple = ()
    J_out: int = 4
    alpha_max: int = 6
    mu_p: tuple = (1, 2, 3)


@dataclass(frozen=True)
class OutputSection:
    dir: str = "out"


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: ExperimentSection = field(default_factory=ExperimentSection)
    symbol: SymbolSection = field(default_factory=SymbolSection)
    tolerances: TolerancesSection = field(default_factory=TolerancesSection)
    orbit: OrbitSection = field(default_factory=OrbitSection)
    invert: InvertSection = field(default_factory=InvertSection)
    recover: RecoverSection = field(default_factory=RecoverSection)
    output: OutputSection = field(default_factory=OutputSection)

    def to_dict(self) -> dict:
        return _plain(dataclasses.asdict(self))

    def replace(self, section: str, **changes) -> "ExperimentConfig":
        sec = dataclasses.replace(getattr(self, section), **changes)
        cfg = dataclasses.replace(self, **{section: sec})
        validate(cfg)
        return cfg


def _plain(v):
    if isinstance(v, dict):
        return {k: _plain(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    return v


# --------------------------------------------------------------------------
# coercion
# --------------------------------------------------------------------------

_SECTION_CLS = typing.get_type_hints(ExperimentConfig)
_HINTS = {cls: typing.get_type_hints(cls) for cls in _SECTION_CLS.values()}

# tuple fields and their element shape: "int" for flat tuples, "nested" for tuples of multi-indices
_TUPLE_SHAPE = {
    ("experiment", "p"): "int", ("orbit", "alphas"): "nested",
    ("orbit", "taylor_degrees"): "int", ("recover", "beta"): "int", ("recover", "mu_p"): "int",
}
_MAY_BE_EMPTY = {("experiment", "p"), ("orbit", "alphas"), ("recover", "beta")}


def _int(path, v):
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(path, f"expected an integer, got {v!r}")
    return v


def _coerce(section, name, hint, v):
    path = f"{section}.{name}"
    if hint is int:
        return _int(path, v)
    if hint is float:
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ConfigError(path, f"expected a number, got {v!r}")
        return float(v)
    if hint is str:
        if not isinstance(v, str):
            raise ConfigError(path, f"expected a string, got {v!r}")
        return v
    if hint is dict:
        if not isinstance(v, dict):
            raise ConfigError(path, f"expected a table, got {v!r}")
        for k, x in v.items():
            if isinstance(x, bool) or not isinstance(x, (int, float)):
                raise ConfigError(f"{path}.{k}", f"expected a number, got {x!r}")
        return dict(v)
    if hint is tuple:
        if not isinstance(v, (list, tuple)) or not (v or (section, name) in _MAY_BE_EMPTY):
            raise ConfigError(path, f"expected a non-empty array, got {v!r}")
        if _TUPLE_SHAPE[(section, name)] == "nested":
            out = []
            for i, a in enumerate(v):
                if not isinstance(a, (list, tuple)) or not a:
                    raise ConfigError(f"{path}[{i}]", f"expected a multi-index array, got {a!r}")
                out.append(tuple(_int(f"{path}[{i}]", x) for x in a))
            return tuple(out)
        return tuple(_int(f"{path}[{i}]", x) for i, x in enumerate(v))
    raise AssertionError(hint)


def from_dict(raw: dict) -> ExperimentConfig:
    if not isinstance(raw, dict):
        raise ConfigError("", "configuration must be a table")
    sections = {}
    for sname, body in raw.items():
        if sname not in _SECTION_CLS:
            raise ConfigError(sname, f"unknown section; known: {sorted(_SECTION_CLS)}")
        if not isinstance(body, dict):
            raise ConfigError(sname, "expected a table")
        cls = _SECTION_CLS[sname]
        hints = _HINTS[cls]
        kw = {}
        for k, v in body.items():
            if k not in hints:
                raise ConfigError(f"{sname}.{k}", f"unknown key; known: {sorted(hints)}")
            kw[k] = _coerce(sname, k, hints[k], v)
        sections[sname] = cls(**kw)
    cfg = ExperimentConfig(**sections)
    validate(cfg)
    return cfg


def load_config(path) -> ExperimentConfig:
    """Read TOML, or JSON (a bare config or a report envelope carrying ``config``)."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError("", f"cannot read {path}: {exc.strerror}") from None
    if path.suffix == ".json":
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError("", f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from None
        if isinstance(raw, dict) and "config" in raw and "schema" in raw:
            raw = raw["config"]
        return from_dict(raw)
    try:
        raw = tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        raise ConfigError("", f"{path}: {exc}") from None
    return from_dict(raw)


# --------------------------------------------------------------------------
# invariants
# --------------------------------------------------------------------------

def _positive(path, v):
    if not v > 0:
        raise ConfigError(path, f"must be > 0, got {v}")


def validate(cfg: ExperimentConfig) -> None:
    e = cfg.experiment
    if e.n not in (1, 2, 3):
        raise ConfigError("experiment.n", f"must be 1, 2 or 3, got {e.n}")
    if e.N < 8 or e.N & (e.N - 1):
        raise ConfigError("experiment.N", f"must be a power of two >= 8, got {e.N}")
    if e.K < 0:
        raise ConfigError("experiment.K", f"must be >= 0, got {e.K}")
    if e.K > e.J:
        raise ConfigError("experiment.K", f"K={e.K} exceeds J={e.J}")
    if e.J > e.N // 4:
        raise ConfigError("experiment.J", f"J={e.J} exceeds N/4={e.N // 4}")
    for name in ("A_max", "A_max_alt"):
        v = getattr(e, name)
        if not 4 <= v <= 20:
            raise ConfigError(f"experiment.{name}", f"must lie in [4, 20], got {v}")
    for i, p in enumerate(e.p):
        if not p > e.n / 2:
            raise ConfigError(f"experiment.p[{i}]", f"needs p > n/2 (n={e.n}), got {p}")
    if e.seed < 0 or e.seed >= 1 << 64:
        raise ConfigError("experiment.seed", f"must be an unsigned 64-bit integer, got {e.seed}")
    if e.oversample < 1:
        raise ConfigError("experiment.oversample", f"must be >= 1, got {e.oversample}")

    s = cfg.symbol
    if bool(s.catalog) == bool(s.spec):
        raise ConfigError("symbol", "give exactly one of 'catalog' or 'spec'")
    if s.catalog:
        try:
            entry = get_entry(s.catalog)
            entry.merged_params(s.params)
        except CatalogError as exc:
            raise ConfigError("symbol.catalog", str(exc)) from None
    else:
        try:
            parse_symbol_spec(s.spec, e.n, s.params)
        except SpecSyntaxError as exc:
            raise ConfigError("symbol.spec", str(exc)) from None
        except ValueError as exc:
            raise ConfigError("symbol.params", str(exc)) from None

    for f in dataclasses.fields(TolerancesSection):
        _positive(f"tolerances.{f.name}", getattr(cfg.tolerances, f.name))
    t = cfg.tolerances
    if t.richardson_low >= t.richardson_high:
        raise ConfigError("tolerances.richardson_low", "must be below richardson_high")

    o = cfg.orbit
    if not 1e-4 <= o.h <= 1e-1:
        raise ConfigError("orbit.h", f"must lie in [1e-4, 1e-1], got {o.h}")
    for i, a in enumerate(o.alphas):
        if len(a) != e.n or min(a) < 0 or sum(a) > 4:
            raise ConfigError(f"orbit.alphas[{i}]", f"need {e.n} non-negative entries with sum <= 4, got {list(a)}")
    if o.y_count < 1:
        raise ConfigError("orbit.y_count", f"must be >= 1, got {o.y_count}")
    if max(o.taylor_degrees) > 8 or min(o.taylor_degrees) < 0:
        raise ConfigError("orbit.taylor_degrees", "degrees must lie in [0, 8]")
    if not 0 < o.taylor_radius <= 1:
        raise ConfigError("orbit.taylor_radius", f"must lie in (0, 1], got {o.taylor_radius}")
    if o.taylor_samples < 1:
        raise ConfigError("orbit.taylor_samples", "must be >= 1")

    v = cfg.invert
    if v.lam == 0:
        raise ConfigError("invert.lam", "must be nonzero")
    if not (0 <= v.J_out and 2 * v.J_out <= e.K):
        raise ConfigError("invert.J_out", f"need 0 <= 2*J_out <= K={e.K}, got {v.J_out}")
    if v.neumann_terms < 0:
        raise ConfigError("invert.neumann_terms", "must be >= 0")

    r = cfg.recover
    if r.beta and (len(r.beta) != e.n or min(r.beta) < 0 or not any(r.beta)):
        raise ConfigError("recover.beta", f"need a nonzero multi-index of length {e.n}, got {list(r.beta)}")
    if not 0 <= r.J_out <= e.K:
        raise ConfigError("recover.J_out", f"need 0 <= J_out <= K={e.K}, got {r.J_out}")
    if not 0 <= r.alpha_max <= 20:
        raise ConfigError("recover.alpha_max", f"must lie in [0, 20], got {r.alpha_max}")
    for i, p in enumerate(r.mu_p):
        if p < 1:
            raise ConfigError(f"recover.mu_p[{i}]", f"must be >= 1, got {p}")


def orbit_alphas(cfg: ExperimentConfig) -> list[tuple]:
    return list(cfg.orbit.alphas) or list(multi_indices(cfg.experiment.n, 2, 1))


def norm_ps(cfg: ExperimentConfig) -> tuple:
    p0 = cfg.experiment.n // 2 + 1
    return tuple(cfg.experiment.p) or (p0, p0 + 1)


def recover_beta(cfg: ExperimentConfig) -> tuple:
    return tuple(cfg.recover.beta) or (2,) * cfg.experiment.n
