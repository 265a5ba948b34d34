import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import random_band_limited, resolved_symbol
from torusop import fourier as fc
from torusop.catalog import catalog_symbol
from torusop.dsl import parse_symbol_spec
from torusop.fourier import PeriodicFunction, TorusGrid
from torusop.quantize import (AliasingError, QuantizeError, TruncatedOperator, adjoint, apply,
                              coefficient_norm_bound, coefficient_vector, compose,
                              conjugate_translation, extract_symbol, identity, inverse,
                              load_matrix, matrix_csv, norm_bound_check, operator_norm,
                              save_matrix, to_matrix)
from torusop.symbols import build_symbol, constant_symbol, symbol_translate

G = TorusGrid(1, 64)


def sym(src, grid=G, J=4):
    return build_symbol(parse_symbol_spec(src, grid.n), grid, J)


def test_identity_symbol_gives_identity():
    A = to_matrix(constant_symbol(G, 4), 4)
    assert np.allclose(A.matrix, np.eye(9), atol=1e-15)


def test_shift_symbol_is_subdiagonal():
    # a_j = e^{ix}: e_k -> e_{k+1}
    A = to_matrix(sym("exp(i*x1)"), 3)
    expected = np.eye(7, k=-1)
    assert np.allclose(A.matrix, expected, atol=1e-14)


def test_multiplier_symbol_is_diagonal():
    A = to_matrix(sym("1+abs(j)^2"), 3)
    assert np.allclose(A.matrix, np.diag([1 + k * k for k in range(-3, 4)]), atol=1e-12)


def test_lex_ordering_two_dims():
    A = identity(2, 1)
    assert A.modes().tolist() == [[a, b] for a in (-1, 0, 1) for b in (-1, 0, 1)]
    assert A.index((1, -1)) == 6


def test_entry_accessor():
    A = to_matrix(sym("exp(i*x1)"), 2)
    assert A.entry((1,), (0,)) == pytest.approx(1.0)
    assert A.entry((0,), (1,)) == pytest.approx(0.0, abs=1e-15)


@pytest.mark.parametrize("n", [1, 2])
def test_apply_agrees_with_matrix(n, rng):
    grid = TorusGrid(n, 32)
    s = catalog_symbol("random-trig", grid, 4, seed=3)
    K = 4
    u = PeriodicFunction(grid, random_band_limited(grid, K, rng))
    direct = coefficient_vector(apply(s, u), K)
    via_matrix = to_matrix(s, K).matrix @ coefficient_vector(u, K)
    # modes near the edge of the box receive contributions from outside |k| <= K
    A = identity(n, K)
    inner = np.all(np.abs(A.modes()) <= K - 3, axis=1)
    assert np.allclose(direct[inner], via_matrix[inner], atol=1e-13)


def test_apply_warns_on_energy_outside_box(rng):
    from torusop.quantize import CutoffWarning
    s = constant_symbol(G, 2)
    u = PeriodicFunction(G, random_band_limited(G, 6, rng))
    with pytest.warns(CutoffWarning):
        apply(s, u)
    with pytest.raises(QuantizeError):
        apply(s, u, strict=True)


def test_aliasing_detected():
    s = sym("1/(2-exp(i*x1))", TorusGrid(1, 32), 4)
    with pytest.raises(AliasingError, match="refine the grid"):
        to_matrix(s, 4)
    to_matrix(sym("1/(2-exp(i*x1))", TorusGrid(1, 128), 4), 4)


def test_cutoff_beyond_symbol_rejected():
    with pytest.raises(QuantizeError):
        to_matrix(constant_symbol(G, 2), 3)


@pytest.mark.parametrize("name", ["constant", "multiplication", "j-decay", "analytic-pole", "random-trig"])
def test_extraction_roundtrip(name):
    s = resolved_symbol(name, 1, 8, 8)
    A = to_matrix(s, 8)
    for J_out in (0, 2, 4):
        e = extract_symbol(A, J_out)
        reach = 8 - J_out
        for j in fc.freq_box(1, J_out):
            want, got = s[j].coeffs, e[j].coeffs
            for m in range(-reach, reach + 1):
                if abs(m) < s.grid.N // 2:
                    assert got[m % e.grid.N] == pytest.approx(want[m % s.grid.N], abs=1e-12)


def test_extraction_bounds():
    with pytest.raises(QuantizeError):
        extract_symbol(identity(1, 3), 4)


def test_composition_of_multipliers():
    a = to_matrix(sym("1+abs(j)"), 3)
    b = to_matrix(sym("2-abs(j)^2/10"), 3)
    ab = compose(a, b)
    assert np.allclose(ab.matrix, a.matrix @ b.matrix)
    assert np.allclose((a @ b).matrix, ab.matrix)
    assert np.allclose(adjoint(a).matrix, a.matrix.conj().T)
    with pytest.raises(QuantizeError):
        compose(identity(1, 2), identity(1, 3))


def test_inverse_and_condition():
    A = identity(1, 3) * 4 + to_matrix(sym("exp(i*x1)/2"), 3)
    inv, cond = inverse(A)
    assert np.allclose(inv.matrix @ A.matrix, np.eye(7), atol=1e-13)
    assert cond == pytest.approx(np.linalg.cond(A.matrix))
    with pytest.raises(QuantizeError, match="ill-conditioned"):
        inverse(A - A)


@pytest.mark.parametrize("y", [0.0, 0.7, -2.5])
def test_conjugation_matches_translated_symbol(y):
    s = sym("1/(2-exp(i*x1))", TorusGrid(1, 128), 6)
    lhs = conjugate_translation(to_matrix(s, 6), y).matrix
    rhs = to_matrix(symbol_translate(s, y), 6).matrix
    assert np.abs(lhs - rhs).max() <= 1e-13


@settings(max_examples=20, deadline=None)
@given(y=st.floats(-4, 4), z=st.floats(-4, 4))
def test_conjugation_group_law(y, z):
    A = to_matrix(catalog_symbol("random-trig", G, 4, seed=9), 4)
    a = conjugate_translation(conjugate_translation(A, y), z).matrix
    b = conjugate_translation(A, y + z).matrix
    assert np.abs(a - b).max() <= 1e-13


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_operator_norm_matches_svd(seed):
    rng = np.random.default_rng(seed)
    M = rng.standard_normal((25, 25)) + 1j * rng.standard_normal((25, 25))
    est = operator_norm(M, tol=1e-12, seed=seed, full=True)
    assert est.value == pytest.approx(np.linalg.svd(M, compute_uv=False)[0], rel=1e-10)
    assert est.squarings >= 1


def test_operator_norm_zero_and_bad_tol():
    assert operator_norm(np.zeros((3, 3))) == 0.0
    with pytest.raises(ValueError):
        operator_norm(np.eye(2), tol=0)


def test_operator_norm_close_singular_values():
    M = np.diag([1.0, 1.0 - 1e-6, 0.5])
    assert operator_norm(M, tol=1e-13) == pytest.approx(1.0, rel=1e-9)


@pytest.mark.parametrize("name", ["constant", "multiplication", "j-decay", "analytic-pole", "random-trig"])
def test_coefficient_bound_dominates_norm(name):
    s = resolved_symbol(name, 1, 8, 8)
    assert operator_norm(to_matrix(s, 8)) <= coefficient_norm_bound(s) * (1 + 1e-12)


@pytest.mark.parametrize("p", [1, 2])
def test_norm_bound_record(p):
    s = sym("1/(2-exp(i*x1))", TorusGrid(1, 128), 8)
    r = norm_bound_check(s, p, 8)
    assert r.holds and r.slack > 0
    assert r.C_p <= r.C_p_upper
    d = r.to_dict()
    assert d["measured"] == r.measured and d["p"] == p


def test_norm_bound_rejects_small_p():
    with pytest.raises(QuantizeError):
        norm_bound_check(constant_symbol(TorusGrid(2, 8), 1), 1, 1)


def test_save_load_roundtrip(tmp_path):
    A = to_matrix(catalog_symbol("random-trig", TorusGrid(2, 16), 2, seed=5), 2)
    path = tmp_path / "m.bin"
    save_matrix(A, path)
    raw = path.read_bytes()
    assert raw[:4] == b"TOPM"
    assert len(raw) == 24 + 25 * 25 * 16
    B = load_matrix(path)
    assert (B.n, B.K) == (2, 2)
    assert np.array_equal(A.matrix, B.matrix)


@pytest.mark.parametrize("mutate,msg", [
    (lambda b: b"XXXX" + b[4:], "bad magic"),
    (lambda b: b[:10], "too short"),
    (lambda b: b[:-16], "expected 25 entries"),
    (lambda b: b[:4] + (9).to_bytes(4, "little") + b[8:], "version"),
])
def test_load_rejects_corrupt_files(tmp_path, mutate, msg):
    path = tmp_path / "m.bin"
    save_matrix(identity(1, 2), path)
    path.write_bytes(mutate(path.read_bytes()))
    with pytest.raises(QuantizeError, match=msg):
        load_matrix(path)


def test_matrix_csv_layout():
    text = matrix_csv(to_matrix(sym("exp(i*x1)"), 1))
    lines = text.splitlines()
    assert lines[0] == "row,col,l,k,re,im"
    assert len(lines) == 1 + 9
    row = dict(zip(lines[0].split(","), lines[1 + 3 * 1 + 0].split(",")))
    assert (row["l"], row["k"]) == ("0", "-1")
    assert float(row["re"]) == pytest.approx(1.0)


def test_operator_arithmetic_checks_shape():
    with pytest.raises(QuantizeError):
        TruncatedOperator(1, 2, np.eye(4))
    with pytest.raises(QuantizeError):
        identity(1, 2) + identity(1, 3)
