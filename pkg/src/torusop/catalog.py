"""Shipped symbol families, loaded from ``data/catalog.toml``."""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from typing import Mapping

import numpy as np
import tomli

from . import fourier as fc
from .dsl import SymbolSpec, parse_symbol_spec
from .fourier import TorusGrid, TWO_PI
from .symbols import CHOP_DEFAULT, DiscreteSymbol, build_symbol

# keeps SeedSequence entropy non-negative for negative j components
_SEED_OFFSET = 1 << 20


class CatalogError(KeyError):
    def __str__(self):
        return str(self.args[0])


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    description: str
    order: float | str
    analytic: bool
    sources: Mapping[int, str] = field(default_factory=dict)
    params: Mapping[str, float] = field(default_factory=dict)
    generator: str | None = None

    def merged_params(self, overrides: Mapping | None = None) -> dict:
        out = dict(self.params)
        for k, v in (overrides or {}).items():
            if k not in out:
                raise CatalogError(f"catalog entry {self.name!r} has no parameter {k!r}; "
                                   f"known: {sorted(out)}")
            out[k] = v
        return out

    def spec(self, n: int, params: Mapping | None = None) -> SymbolSpec:
        if self.generator is not None:
            raise CatalogError(f"catalog entry {self.name!r} is generated, not a closed form")
        if n not in self.sources:
            raise CatalogError(f"catalog entry {self.name!r} has no source for n={n}")
        return parse_symbol_spec(self.sources[n], n, self.merged_params(params), name=self.name)

    def order_for(self, params: Mapping | None = None) -> float:
        """Order m of the family; a string names a parameter, optionally negated."""
        if not isinstance(self.order, str):
            return float(self.order)
        p = self.merged_params(params)
        neg = self.order.startswith("-")
        val = float(np.real(p[self.order.lstrip("-")]))
        return -val if neg else val


@lru_cache(maxsize=1)
def load_catalog() -> dict[str, CatalogEntry]:
    raw = tomli.loads(resources.files(__package__).joinpath("data/catalog.toml").read_text())
    out = {}
    for name, body in raw.items():
        out[name] = CatalogEntry(
            name=name, description=body["description"], order=body["order"],
            analytic=bool(body["analytic"]),
            sources={int(k): v for k, v in body.get("source", {}).items()},
            params=dict(body.get("params", {})), generator=body.get("generator"))
    return out


def catalog_names() -> list[str]:
    return list(load_catalog())


def get_entry(name: str) -> CatalogEntry:
    cat = load_catalog()
    if name not in cat:
        raise CatalogError(f"unknown catalog entry {name!r}; known: {sorted(cat)}")
    return cat[name]


def random_trig_symbol(grid: TorusGrid, J: int, d: int = 3, seed: int = 0) -> DiscreteSymbol:
    """a_j = sum_{|m|_inf <= d} c_{j,m} e^{i m.x} with |c_{j,m}| <= (2d+1)^-n.

    Each a_j draws from its own stream keyed by (seed, j), so a_j does not
    change when the cutoff J does; sup |a_j| <= 1.
    """
    n = grid.n
    d = int(d)
    if not 0 <= d < grid.N // 2:
        raise CatalogError(f"degree d={d} must satisfy 0 <= d < N/2 = {grid.N // 2}")
    ms = fc.freq_box(n, d)
    count = len(ms)
    slots = tuple(np.array([[mi % grid.N for mi in m] for m in ms]).T)
    table = np.zeros((2 * J + 1,) * n + grid.shape, np.complex128)
    for j in fc.freq_box(n, J):
        rng = np.random.default_rng(np.random.SeedSequence([int(seed)] + [ji + _SEED_OFFSET for ji in j]))
        radius = np.sqrt(rng.random(count))
        phase = TWO_PI * rng.random(count)
        c = np.zeros(grid.shape, np.complex128)
        c[slots] = radius * np.exp(1j * phase) / count * TWO_PI ** n
        table[tuple(ji + J for ji in j)] = c
    return DiscreteSymbol(grid, J, table)


def catalog_symbol(name: str, grid: TorusGrid, J: int, params: Mapping | None = None,
                   seed: int = 0, chop: float = CHOP_DEFAULT) -> DiscreteSymbol:
    entry = get_entry(name)
    if entry.generator == "random-trig":
        p = entry.merged_params(params)
        return random_trig_symbol(grid, J, int(p["d"]), seed)
    if entry.generator is not None:
        raise CatalogError(f"unknown generator {entry.generator!r}")
    return build_symbol(entry.spec(grid.n, params), grid, J, chop)


__all__ = ["CatalogEntry", "CatalogError", "catalog_names", "catalog_symbol", "get_entry",
           "load_catalog", "random_trig_symbol"]
