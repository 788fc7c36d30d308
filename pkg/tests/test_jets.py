import itertools
import math

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from schwarzian import (
    BranchPointError,
    Jet3,
    SingularPointError,
    compose,
    extract_derivatives,
    jet_analytic,
    jet_arith,
    jet_det,
    seed_variables,
)
from schwarzian.jets import layout


def univariate(jet):
    return np.array([jet.coeff((k,)) for k in range(4)])


def one_minus_z():
    (z,) = seed_variables([0.0])
    return 1 - z


# --- spec examples -----------------------------------------------------------


def test_seed_one_variable():
    (z,) = seed_variables([0.5], 1)
    assert np.allclose(univariate(z), [0.5, 1, 0, 0])


def test_seed_two_variables_at_origin():
    z1, z2 = seed_variables([0, 0])
    assert z1.coeff((1, 0)) == 1 and z1.coeff((0, 1)) == 0
    assert z2.coeff((0, 1)) == 1 and z2.coeff((1, 0)) == 0


def test_seed_constant_terms():
    z1, z2 = seed_variables([1j, -1j])
    assert (z1.value, z2.value) == (1j, -1j)


def test_seed_dimension_mismatch():
    with pytest.raises(ValueError):
        seed_variables([0, 0], 3)


def test_square_at_two():
    (z,) = seed_variables([2.0])
    assert np.allclose(univariate(jet_arith(z, z, "mul")), [4, 4, 1, 0])


def test_geometric_series():
    one = Jet3.constant(1, 1.0)
    assert np.allclose(univariate(jet_arith(one, one_minus_z(), "div")), [1, 1, 1, 1])


def test_add_negation_is_zero():
    (z,) = seed_variables([0.3 + 0.1j])
    w = z * z + 2 * z
    assert np.all(jet_arith(w, jet_arith(w, w, "neg"), "add").coeffs == 0)


def test_division_by_zero_constant_term():
    (z,) = seed_variables([0.0])
    with pytest.raises(SingularPointError):
        Jet3.constant(1, 1.0) / z


def test_sqrt_of_inverse_square():
    w = (one_minus_z() * one_minus_z()).reciprocal()
    assert np.allclose(univariate(jet_analytic(w, "sqrt", branch=1.0)), [1, 1, 1, 1])


def test_exp_of_zero():
    e = jet_analytic(Jet3.zeros(2), "exp")
    assert e.value == 1 and np.all(e.coeffs[1:] == 0)


def test_log_series():
    w = one_minus_z().reciprocal()
    assert np.allclose(univariate(jet_analytic(w, "log", branch=0.0)), [0, 1, 0.5, 1 / 3])


@pytest.mark.parametrize("fn", ["log", "sqrt"])
def test_branch_point(fn):
    (z,) = seed_variables([0.0])
    with pytest.raises(BranchPointError):
        jet_analytic(z, fn)


def test_wrong_branch_value_rejected():
    (z,) = seed_variables([4.0])
    with pytest.raises(BranchPointError):
        jet_analytic(z, "sqrt", branch=3.0)
    with pytest.raises(BranchPointError):
        jet_analytic(z, "log", branch=0.0)


def test_extract_square():
    (z,) = seed_variables([2.0])
    v, g, H, T = extract_derivatives(z * z)
    assert v == 4 and g[0] == 4 and H[0, 0] == 2 and T[0, 0, 0] == 0


def test_extract_mixed():
    z1, z2 = seed_variables([0, 0])
    _, _, H, _ = extract_derivatives(z1 * z2)
    assert H[0, 1] == H[1, 0] == 1 and H[0, 0] == H[1, 1] == 0


def test_extract_third():
    _, _, _, T = extract_derivatives(one_minus_z().reciprocal())
    assert np.isclose(T[0, 0, 0], 6)


# --- sympy oracle --------------------------------------------------------------

X1, X2, X3 = sp.symbols("x1 x2 x3")
SYMS = (X1, X2, X3)


def sympy_derivs(expr, syms, point):
    subs = dict(zip(syms, point))
    n = len(syms)
    val = complex(expr.subs(subs).evalf())
    g = np.array([complex(sp.diff(expr, s).subs(subs).evalf()) for s in syms])
    H = np.empty((n, n), dtype=complex)
    T = np.empty((n, n, n), dtype=complex)
    for i, j in itertools.product(range(n), repeat=2):
        H[i, j] = complex(sp.diff(expr, syms[i], syms[j]).subs(subs).evalf())
    for i, j, k in itertools.product(range(n), repeat=3):
        T[i, j, k] = complex(sp.diff(expr, syms[i], syms[j], syms[k]).subs(subs).evalf())
    return val, g, H, T


CASES = [
    # (sympy expression, jet builder, point)
    (X1**2 * X2 + 3 * X2**3 - X1, lambda a, b: a * a * b + 3 * b * b * b - a, (0.3 + 0.2j, -0.5j)),
    (sp.exp(X1 * X2) / (1 - X1), lambda a, b: jet_analytic(a * b, "exp") / (1 - a), (0.2, 0.4 - 0.1j)),
    (sp.sqrt(1 + X1 + X2**2), lambda a, b: jet_analytic(1 + a + b * b, "sqrt"), (0.1j, 0.3)),
    (sp.log(2 + X1 * X2) * X1, lambda a, b: jet_analytic(2 + a * b, "log") * a, (0.7, -0.2 + 0.6j)),
    ((1 + X1 - X2) ** sp.Rational(-1, 3), lambda a, b: jet_analytic(1 + a - b, "pow", alpha=-1 / 3), (0.2, 0.1j)),
]


@pytest.mark.parametrize("expr,build,point", CASES)
def test_against_sympy(expr, build, point):
    jets = seed_variables(point)
    got = extract_derivatives(build(*jets))
    want = sympy_derivs(expr, (X1, X2), point)
    for g, w in zip(got, want):
        assert np.allclose(g, w, rtol=1e-12, atol=1e-12)


def test_three_variables_against_sympy():
    point = (0.1, -0.2j, 0.3 + 0.1j)
    a, b, c = seed_variables(point)
    got = extract_derivatives(a * b * c / (1 + a * a) + jet_analytic(b + 1, "exp"))
    want = sympy_derivs(X1 * X2 * X3 / (1 + X1**2) + sp.exp(X2 + 1), SYMS, point)
    for g, w in zip(got, want):
        assert np.allclose(g, w, rtol=1e-12, atol=1e-12)


def test_polynomial_coefficients_exact():
    # random cubic in 3 variables: jet coefficients must reproduce its Taylor data
    rng = np.random.default_rng(11)
    lay = layout(3)
    c = rng.normal(size=lay.size) + 1j * rng.normal(size=lay.size)
    poly = sum(ci * sp.Mul(*[s**k for s, k in zip(SYMS, alpha)]) for ci, alpha in zip(c, lay.multi))
    point = (0.2, -0.1j, 0.4)
    seeds = seed_variables(point)
    jet = Jet3.constant(3, 0.0)
    for ci, alpha in zip(c, lay.multi):
        term = Jet3.constant(3, ci)
        for s, k in zip(seeds, alpha):
            for _ in range(k):
                term = term * s
        jet = jet + term
    got = extract_derivatives(jet)
    want = sympy_derivs(poly, SYMS, point)
    for g, w in zip(got, want):
        assert np.allclose(g, w, rtol=1e-12, atol=1e-12)


# --- algebraic laws ------------------------------------------------------------

cplx = st.complex_numbers(max_magnitude=2.0, allow_nan=False, allow_infinity=False)


def random_jet(rng, n):
    size = layout(n).size
    return Jet3(n, rng.normal(size=size) + 1j * rng.normal(size=size))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 3))
def test_product_rule_and_associativity(seed, n):
    rng = np.random.default_rng(seed)
    a, b, c = (random_jet(rng, n) for _ in range(3))
    assert np.allclose(((a * b) * c).coeffs, (a * (b * c)).coeffs, atol=1e-10)
    assert np.allclose((a * (b + c)).coeffs, (a * b + a * c).coeffs, atol=1e-10)
    _, ga, Ha, _ = extract_derivatives(a)
    _, gb, Hb, _ = extract_derivatives(b)
    _, gab, Hab, _ = extract_derivatives(a * b)
    assert np.allclose(gab, a.value * gb + b.value * ga)
    assert np.allclose(Hab, a.value * Hb + b.value * Ha + np.outer(ga, gb) + np.outer(gb, ga))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 3))
def test_reciprocal_inverts(seed, n):
    rng = np.random.default_rng(seed)
    a = random_jet(rng, n)
    a.coeffs[0] += 3.0
    one = a * a.reciprocal()
    assert np.isclose(one.value, 1)
    assert np.allclose(one.coeffs[1:], 0, atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 3), cplx)
def test_sqrt_squares_back(seed, n, c0):
    rng = np.random.default_rng(seed)
    a = random_jet(rng, n)
    a.coeffs[0] = c0 + 3.0
    for branch in (np.sqrt(a.value), -np.sqrt(a.value)):
        r = jet_analytic(a, "sqrt", branch=branch)
        assert np.isclose(r.value, branch)
        assert np.allclose((r * r).coeffs, a.coeffs, atol=1e-10)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 3))
def test_exp_log_roundtrip(seed, n):
    rng = np.random.default_rng(seed)
    a = random_jet(rng, n)
    a.coeffs[0] += 4.0
    back = jet_analytic(jet_analytic(a, "log"), "exp")
    assert np.allclose(back.coeffs, a.coeffs, atol=1e-10)


def test_compose_matches_reciprocal():
    rng = np.random.default_rng(2)
    a = random_jet(rng, 2)
    a.coeffs[0] = 2.0 + 1j
    a0 = a.value
    r = compose(a, [1 / a0, -1 / a0**2, 1 / a0**3, -1 / a0**4])
    assert np.allclose(r.coeffs, a.reciprocal().coeffs)


def test_partial_lowers_degree():
    a, b = seed_variables([0.3, 0.1j])
    u = a * a * b + b * b
    _, g, H, T = extract_derivatives(u)
    du = u.partial(0)
    v, gd, Hd, _ = extract_derivatives(du)
    assert np.isclose(v, g[0])
    assert np.allclose(gd, H[0])
    assert np.allclose(Hd, T[0])


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5, 6])
def test_det_matches_numpy_and_product_rule(n):
    # det of a matrix of jets: value and gradient against numpy + Jacobi's formula
    rng = np.random.default_rng(n)
    M = [[random_jet(rng, 2) for _ in range(n)] for _ in range(n)]
    for i in range(n):
        M[i][i].coeffs[0] += 3.0
    D = jet_det(M)
    vals = np.array([[m.value for m in row] for row in M])
    assert np.isclose(D.value, np.linalg.det(vals))
    grads = np.array([[extract_derivatives(m)[1] for m in row] for row in M])
    inv = np.linalg.inv(vals)
    _, g, _, _ = extract_derivatives(D)
    jacobi = np.linalg.det(vals) * np.einsum("ji,ijk->k", inv, grads)
    assert np.allclose(g, jacobi)


def test_det_cofactor_and_lu_agree():
    from schwarzian.jets import _cofactor_det, _lu_det

    rng = np.random.default_rng(5)
    M = [[random_jet(rng, 2) for _ in range(4)] for _ in range(4)]
    M[0][0].coeffs[0] = 0.0  # forces a pivot swap in the LU route
    assert np.allclose(_cofactor_det(M).coeffs, _lu_det(M).coeffs, atol=1e-9)


def test_substitute_is_chain_rule():
    # u(w) = w1^2 w2 expanded at w(z0), composed with w = (z1 + z2, z1 z2)
    z0 = (0.3, -0.2j)
    z1, z2 = seed_variables(z0)
    inner = [z1 + z2, z1 * z2]
    w1, w2 = seed_variables([j.value for j in inner])
    comp = (w1 * w1 * w2).substitute(inner)
    direct = inner[0] * inner[0] * inner[1]
    assert np.allclose(comp.coeffs, direct.coeffs)


def test_factorials_in_layout():
    lay = layout(2)
    for alpha, f in zip(lay.multi, lay.factorial):
        assert f == math.prod(math.factorial(int(k)) for k in alpha)
