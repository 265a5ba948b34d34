"""The five experiments behind the command line.

Each ``cmd_*`` takes a validated :class:`ExperimentConfig` and returns a
:class:`CommandResult`: the report envelope plus CSV tables.  They are pure
functions of the config (the seed lives in it), so re-running one yields
byte-identical JSON.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import __version__
from . import fourier as fc
from . import lbeta as lb
from . import orbit as ob
from . import quantize as qz
from .catalog import catalog_symbol, get_entry
from .config import ExperimentConfig, norm_ps, orbit_alphas, recover_beta
from .dsl import parse_symbol_spec
from .fourier import TorusGrid, TWO_PI
from .lattice import lattice_constant
from .report import Envelope, csv_text
from .symbols import (DiscreteSymbol, analyticity_fit, build_symbol, entry_sup_norms,
                      order_test)

# identity errors below this (relative to the exact norm) are round-off, not O(h^4)
FD_NOISE_FLOOR = 1e-11


@dataclass
class CommandResult:
    envelope: Envelope
    tables: dict = field(default_factory=dict)


def grid_of(cfg: ExperimentConfig) -> TorusGrid:
    return TorusGrid(cfg.experiment.n, cfg.experiment.N)


def symbol_from_config(cfg: ExperimentConfig, J: int | None = None) -> DiscreteSymbol:
    e, s = cfg.experiment, cfg.symbol
    J = e.J if J is None else J
    grid = grid_of(cfg)
    if s.catalog:
        return catalog_symbol(s.catalog, grid, J, s.params, seed=e.seed)
    return build_symbol(parse_symbol_spec(s.spec, e.n, s.params), grid, J)


def _envelope(cmd, cfg, records, summary, status):
    return Envelope(cmd, cfg.to_dict(), cfg.experiment.seed, records, summary, status, __version__)


def _alpha_label(a):
    return " ".join(str(v) for v in a)


# --------------------------------------------------------------------------
# classify
# --------------------------------------------------------------------------

def predicted_orbit_bound(fit, table) -> dict:
    """||A^alpha|| <= mu^n 2^p C_p C^(2p+1) (2C)^|alpha| alpha! from the fitted symbol constant C.

    Logged next to the measured orbit norms; C comes from a finite fit, so
    the comparison is informative rather than certified.
    """
    n = len(table.alphas[0])
    p = n // 2 + 1
    C = fit.C_star
    mu = lb.mu_constant(p).mu
    C_p = lattice_constant(n, p).upper
    prefactor = mu ** n * 2 ** p * C_p * C ** (2 * p + 1)
    bounds = [prefactor * (2 * C) ** sum(a) * fc.mi_factorial(a) for a in table.alphas]
    ratios = [nm / b if b > 0 else 0.0 for nm, b in zip(table.norms, bounds)]
    return {"kind": "predicted_orbit_bound", "p": p, "mu": mu, "C_p": C_p, "C_symbol": C,
            "prefactor": prefactor, "rate": 2 * C, "a_max": table.a_max,
            "max_norm_to_bound": max(ratios), "holds": bool(max(ratios) <= 1.0)}


def cmd_classify(cfg: ExperimentConfig) -> CommandResult:
    """Order-zero test plus the symbol-side and orbit-side analyticity verdicts."""
    e, t = cfg.experiment, cfg.tolerances
    s1 = symbol_from_config(cfg)
    s2 = symbol_from_config(cfg, 2 * e.J)
    records, sym_rows, orb_rows = [], [], []
    orders = [0.0]
    if cfg.symbol.catalog:
        m = get_entry(cfg.symbol.catalog).order_for(cfg.symbol.params)
        if m != 0.0:
            orders.append(m)
    low_alphas = list(fc.multi_indices(e.n, 4))
    for m in orders:
        rep = order_test(s1, m, low_alphas, t.b_max, e.oversample)
        records.append(rep)
    sym_verdicts, orb_verdicts = {}, {}
    fits, orbit_tables = [], []
    for J, s in ((e.J, s1), (2 * e.J, s2)):
        for A in (e.A_max, e.A_max_alt):
            r = analyticity_fit(s, A, t.slope, t.growth, e.oversample)
            records.append(r)
            fits.append(r)
            sym_verdicts[(J, A)] = r.verdict
            sym_rows += [(J, A, _alpha_label(a), Ma, ca) for a, Ma, ca in zip(r.alphas, r.M, r.c)]
    for A in (e.A_max, e.A_max_alt):
        g = ob.orbit_growth_table(s1, A, e.K, slope_tol=t.slope, growth_tol=t.growth,
                                  norm_tol=t.norm)
        records.append(g)
        orbit_tables.append(g)
        orb_verdicts[(e.K, A)] = g.verdict
        orb_rows += [(e.K, A, _alpha_label(a), nm, ca) for a, nm, ca in zip(g.alphas, g.norms, g.c)]
    predicted = predicted_orbit_bound(fits[0], orbit_tables[0])
    records.append(predicted)
    symbol_stable = len(set(sym_verdicts.values())) == 1
    orbit_stable = len(set(orb_verdicts.values())) == 1
    consistent = symbol_stable and orbit_stable and set(sym_verdicts.values()) == set(orb_verdicts.values())
    verdicts = set(sym_verdicts.values()) | set(orb_verdicts.values())
    if not consistent:
        status = "finding"
    elif "inconclusive" in verdicts:
        status = "inconclusive"
    else:
        status = "pass"
    summary = {
        "order_zero": records[0].verdict,
        "symbol_verdicts": [{"J": J, "A_max": A, "verdict": v} for (J, A), v in sym_verdicts.items()],
        "orbit_verdicts": [{"K": K, "A_max": A, "verdict": v} for (K, A), v in orb_verdicts.items()],
        "symbol_stable": symbol_stable, "orbit_stable": orbit_stable, "consistent": consistent,
        "C_star_symbol": predicted["C_symbol"], "C_star_orbit": orbit_tables[0].C_star,
        "predicted_orbit_bound_holds": predicted["holds"],
    }
    tables = {
        "symbol_growth": csv_text(["J", "A_max", "alpha", "M_alpha", "c_alpha"], sym_rows),
        "orbit_growth": csv_text(["K", "A_max", "alpha", "norm", "c_alpha"], orb_rows),
    }
    return CommandResult(_envelope("classify", cfg, records, summary, status), tables)


# --------------------------------------------------------------------------
# norms
# --------------------------------------------------------------------------

def cmd_norms(cfg: ExperimentConfig) -> CommandResult:
    """Truncated operator norm against C_p sup |(1 - Laplacian)^p a_j| for each p."""
    e, t = cfg.experiment, cfg.tolerances
    s = symbol_from_config(cfg)
    records = [qz.norm_bound_check(s, p, e.K, t.bound, e.oversample, t.norm, e.seed) for p in norm_ps(cfg)]
    rows = [(r.p, r.C_p, r.C_p_upper, r.sup_term, r.bound, r.measured, r.slack, r.holds) for r in records]
    status = "pass" if all(r.holds for r in records) else "fail"
    # truncated norms only lower-bound the full norm; record how they grow with K
    ks = sorted({max(1, e.K // 4), max(1, e.K // 2), e.K})
    growth = [(k, qz.operator_norm(qz.to_matrix(s, k), tol=t.norm, seed=e.seed)) for k in ks]
    records.append({"kind": "norm_growth", "K": [k for k, _ in growth],
                    "measured": [v for _, v in growth]})
    summary = {"min_slack": min(r.slack for r in records[:-1]), "all_hold": status == "pass",
               "measured_by_K": {str(k): v for k, v in growth}}
    tables = {"slack": csv_text(["p", "C_p", "C_p_upper", "sup_term", "bound", "measured", "slack", "holds"], rows),
              "norm_growth": csv_text(["K", "measured"], growth)}
    return CommandResult(_envelope("norms", cfg, records, summary, status), tables)


# --------------------------------------------------------------------------
# orbit
# --------------------------------------------------------------------------

def random_points(n: int, count: int, seed: int) -> list[tuple]:
    rng = np.random.default_rng(np.random.SeedSequence([seed, 1]))
    return [tuple(float(v) for v in row) for row in rng.uniform(0.0, TWO_PI, (count, n))]


def two_path_error(s: DiscreteSymbol, y, K: int) -> float:
    """max entry of |conjugate_translation(Op(a)) - Op(T_y a)|."""
    a = qz.conjugate_translation(qz.to_matrix(s, K), y).matrix
    b = ob.orbit_eval(s, y, K).matrix
    return float(np.abs(a - b).max())


def cmd_orbit(cfg: ExperimentConfig) -> CommandResult:
    """Two-path orbit identity, finite-difference derivative checks, Taylor remainders."""
    e, t, o = cfg.experiment, cfg.tolerances, cfg.orbit
    s = symbol_from_config(cfg)
    ys = random_points(e.n, o.y_count, e.seed)
    two = [two_path_error(s, y, e.K) for y in ys]
    two_ok = max(two) <= t.two_path
    records = [{"kind": "two_path", "K": e.K, "y": [list(y) for y in ys], "errors": two,
                "max_error": max(two), "tolerance": t.two_path, "holds": two_ok}]
    deriv_rows, deriv_ok = [], True
    y0 = ys[0]
    for alpha in orbit_alphas(cfg):
        ratio, r1, r2 = ob.richardson_ratio(s, alpha, y0, o.h, e.K)
        floor = FD_NOISE_FLOOR * max(1.0, r1.exact_norm)
        if r1.identity_error <= floor:
            ok, mode = r2.identity_error <= floor, "below-noise"
        else:
            ok, mode = bool(t.richardson_low <= ratio <= t.richardson_high), "ratio"
        deriv_ok &= ok
        records.append({"kind": "richardson", "alpha": list(alpha), "ratio": ratio, "check": mode,
                        "low": t.richardson_low, "high": t.richardson_high, "holds": ok,
                        "coarse": r1, "fine": r2})
        deriv_rows += [(_alpha_label(alpha), r.h, r.fd_estimate, r.exact_norm, r.identity_error)
                       for r in (r1, r2)]
    tr = ob.taylor_remainder_check(s, y0, o.taylor_degrees, o.taylor_radius, e.K,
                                   o.taylor_samples, e.seed)
    rem = tr.remainders
    decays = all(b <= a or b <= 1e-13 for a, b in zip(rem, rem[1:]))
    records.append(tr)
    records.append({"kind": "taylor_decay", "decays": decays})
    if not (two_ok and deriv_ok):
        status = "fail"
    else:
        status = "pass" if decays else "inconclusive"
    summary = {"two_path_max": max(two), "derivative_checks_hold": bool(deriv_ok),
               "taylor_remainders": rem, "taylor_decays": decays}
    tables = {
        "derivatives": csv_text(["alpha", "h", "fd_estimate", "exact_norm", "identity_error"], deriv_rows),
        "taylor": tr.csv(),
    }
    return CommandResult(_envelope("orbit", cfg, records, summary, status), tables)


# --------------------------------------------------------------------------
# invert
# --------------------------------------------------------------------------

def certified_norm_bound(s: DiscreteSymbol, oversample: int = 4) -> dict:
    """Two upper bounds for the norm of Op(a_j); the smaller one certifies."""
    n = s.n
    p = n // 2 + 1
    C = lattice_constant(n, p)
    sup = float(entry_sup_norms(s, fc.laplacian_multiplier(s.grid, p), oversample).max())
    lattice_bound = C.upper * sup
    coef = qz.coefficient_norm_bound(s)
    return {"p": p, "lattice_bound": lattice_bound, "coefficient_bound": coef,
            "bound": min(lattice_bound, coef)}


def neumann_inverse(A: np.ndarray, lam: float, terms: int) -> np.ndarray:
    """lam^-1 sum_{m <= terms} (-A/lam)^m."""
    T = -A / lam
    P = np.eye(A.shape[0], dtype=np.complex128)
    S = P.copy()
    for _ in range(terms):
        P = P @ T
        S = S + P
    return S / lam


def cmd_invert(cfg: ExperimentConfig) -> CommandResult:
    """Invert lam I + eps Op(a) and classify the symbol of the inverse."""
    e, t, v = cfg.experiment, cfg.tolerances, cfg.invert
    s = symbol_from_config(cfg)
    lam, eps = v.lam, v.eps
    cert = certified_norm_bound(s, e.oversample)
    q = abs(eps) * cert["bound"] / abs(lam)
    records = [{"kind": "invertibility", "lam": lam, "eps": eps, **cert, "q": q,
                "margin": abs(lam) - abs(eps) * cert["bound"], "certified": q < 1}]
    if not q < 1:
        summary = {"certified": False, "reason": "|lam| does not exceed the certified bound on |eps| ||Op(a)||"}
        return CommandResult(_envelope("invert", cfg, records, summary, "fail"))
    A = qz.to_matrix(s, e.K)
    total = qz.identity(e.n, e.K) * lam + A * eps
    try:
        inv, cond = qz.inverse(total, t.cond_max)
    except qz.QuantizeError as exc:
        summary = {"certified": True, "reason": str(exc)}
        return CommandResult(_envelope("invert", cfg, records, summary, "fail"))
    records.append({"kind": "inverse", "K": e.K, "condition_number": cond, "cond_max": t.cond_max})
    fits = []
    rows = []
    for J_out in (v.J_out, 2 * v.J_out):
        ex = qz.extract_symbol(inv, J_out)
        r = analyticity_fit(ex, e.A_max, t.slope, t.growth, e.oversample)
        fits.append(r)
        records.append({"kind": "inverse_symbol", "J_out": J_out, "grid_N": ex.grid.N,
                        "interior_reach": e.K - J_out, "fit": r})
        rows += [(J_out, _alpha_label(a), Ma, ca) for a, Ma, ca in zip(r.alphas, r.M, r.c)]
    c1, c2 = fits[0].C_star, fits[1].C_star
    variation = abs(c1 - c2) / max(c1, c2) if max(c1, c2) > 0 else 0.0
    stable = variation < t.c_star_variation
    analytic = all(r.verdict == "uniformly-analytic" for r in fits)
    S = neumann_inverse(A.matrix * eps, lam, v.neumann_terms)
    n_err = qz.operator_norm(S - inv.matrix, tol=t.norm, seed=e.seed)
    n_bound = q ** (v.neumann_terms + 1) / ((1 - q) * abs(lam))
    neumann_ok = n_err <= n_bound
    records.append({"kind": "neumann", "terms": v.neumann_terms, "q": q, "error": n_err,
                    "bound": n_bound, "holds": neumann_ok})
    status = "pass" if (analytic and stable and neumann_ok) else "fail"
    summary = {"certified": True, "condition_number": cond,
               "verdicts": [r.verdict for r in fits], "C_star": [c1, c2],
               "C_star_variation": variation, "C_star_stable": stable,
               "neumann_error": n_err, "neumann_bound": n_bound}
    tables = {"inverse_growth": csv_text(["J_out", "alpha", "M_alpha", "c_alpha"], rows)}
    return CommandResult(_envelope("invert", cfg, records, summary, status), tables)


# --------------------------------------------------------------------------
# recover
# --------------------------------------------------------------------------

def interior_mask(grid: TorusGrid, reach: int) -> np.ndarray:
    ks = [np.broadcast_to(np.abs(k), grid.shape) for k in grid.wavenumbers()]
    return np.maximum.reduce(ks) <= reach


def recovery_error(s: DiscreteSymbol, beta, K: int, J_out: int) -> tuple[float, float]:
    """Run bbeta_build -> to_matrix -> extract_symbol -> recover_symbol.

    Returns the max errors, on the interior modes |m| <= K - J_out and in
    matrix-entry units (2 pi)^-n, of the extracted B^beta symbol and of the
    recovered symbol.
    """
    qz.check_resolution(s, K)
    bs = lb.bbeta_build(s, beta)
    ex = qz.extract_symbol(qz.to_matrix(bs, K, None), J_out, s.grid)
    rec = lb.recover_symbol(ex, beta)
    mask = interior_mask(s.grid, K - J_out)
    scale = TWO_PI ** s.n
    e_ex = float(np.abs((ex.coeffs - bs.restrict(J_out).coeffs)[..., mask]).max(initial=0.0)) / scale
    e_rec = float(np.abs((rec.coeffs - s.restrict(J_out).coeffs)[..., mask]).max(initial=0.0)) / scale
    return e_ex, e_rec


def cmd_recover(cfg: ExperimentConfig) -> CommandResult:
    """B^beta pipeline round trip, derivative bound chain, mu constant and factorial shifts."""
    e, t, r = cfg.experiment, cfg.tolerances, cfg.recover
    s = symbol_from_config(cfg)
    beta = recover_beta(cfg)
    e_ex, e_rec = recovery_error(s, beta, e.K, r.J_out)
    rt_ok = e_rec <= t.roundtrip
    records = [{"kind": "recovery", "beta": list(beta), "K": e.K, "J_out": r.J_out,
                "extract_error": e_ex, "recover_error": e_rec, "tolerance": t.roundtrip,
                "holds": rt_ok}]
    chains = [lb.bound_chain_check(s, a, e.K, t.chain, e.oversample, t.norm)
              for a in fc.multi_indices(e.n, r.alpha_max)]
    records += chains
    mus = [lb.mu_constant(p) for p in r.mu_p]
    records += mus
    shifts = [lb.factorial_shift_check(m.p, a, m.mu)
              for m in mus for a in fc.multi_indices(e.n, r.alpha_max)]
    records += shifts
    mu_ok = all(m.inequality_holds for m in mus)
    ok = rt_ok and all(c.holds for c in chains) and mu_ok and all(f.holds for f in shifts)
    summary = {"recover_error": e_rec, "chains_hold": all(c.holds for c in chains),
               "min_chain_slack": min(c.slack for c in chains),
               "mu": {str(m.p): m.mu for m in mus}, "mu_inequalities_hold": mu_ok,
               "factorial_shifts_hold": all(f.holds for f in shifts)}
    tables = {
        "bound_chain": csv_text(["alpha", "beta", "bbeta_norm", "S", "S_upper", "bound", "M_alpha",
                                 "M_alpha_full", "slack", "holds"],
                                [(_alpha_label(c.alpha), _alpha_label(c.beta), c.bbeta_norm, c.S,
                                  c.S_upper, c.bound, c.M_alpha, c.M_alpha_full, c.slack, c.holds)
                                 for c in chains]),
        "mu": csv_text(["p", "mu", "t_star", "scan_mu", "inequality_holds", "min_log_margin"],
                       [(m.p, m.mu, m.t_star, m.scan_mu, m.inequality_holds, m.min_log_margin)
                        for m in mus]),
    }
    return CommandResult(_envelope("recover", cfg, records, summary, "pass" if ok else "fail"), tables)


COMMANDS = {"classify": cmd_classify, "norms": cmd_norms, "orbit": cmd_orbit,
            "invert": cmd_invert, "recover": cmd_recover}

__all__ = ["COMMANDS", "CommandResult", "cmd_classify", "cmd_invert", "cmd_norms", "cmd_orbit",
           "cmd_recover"]
