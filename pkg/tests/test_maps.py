import json

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from schwarzian import (
    ConfigError,
    Composition,
    Coordinatewise,
    DomainError,
    Linear,
    LocalUnivalenceError,
    SingularPointError,
    evaluate_jet,
    extract_derivatives,
    map_from_dict,
    map_to_dict,
    moebius_from_matrix,
    one_d,
    roper_suffridge,
    schwarzian_1d,
)
from schwarzian.maps import CONVEX_FNS, continue_log, in_domain
from schwarzian.tensor import pre_schwarzian_1d

Z = sp.symbols("z")
SYMBOLIC = {
    "identity": Z,
    "half_plane": Z / (1 - Z),
    "cayley": 1 / (1 - Z),
    "strip": sp.log((1 + Z) / (1 - Z)) / 2,
    "log_map": -sp.log(1 - Z),
}


def disk_samples(rng, count, rmax=0.95):
    r = rmax * np.sqrt(rng.uniform(size=count))
    return r * np.exp(2j * np.pi * rng.uniform(size=count))


@pytest.mark.parametrize("name", CONVEX_FNS)
def test_registry_derivatives_match_sympy(name):
    phi = one_d(name)
    for z in (0.0, 0.3 - 0.4j, -0.7j, 0.85):
        got = phi.derivatives(z, 4)
        want = [complex(sp.diff(SYMBOLIC[name], Z, k).subs(Z, z).evalf()) for k in range(5)]
        assert np.allclose(got, want, rtol=1e-12, atol=1e-12)


def test_precomposed_matches_sympy():
    a = 0.3 - 0.5j
    expr = SYMBOLIC["strip"].subs(Z, (Z + a) / (1 + np.conj(a) * Z))
    phi = one_d("precomposed", base=one_d("strip"), a=a)
    for z in (0.0, 0.2 + 0.1j, -0.6):
        want = [complex(sp.diff(expr, Z, k).subs(Z, z).evalf()) for k in range(5)]
        assert np.allclose(phi.derivatives(z, 4), want, rtol=1e-10, atol=1e-10)


def test_normalized_entry():
    phi = one_d("normalized", base=one_d("polynomial", coeffs=(2, 3, 1)))
    assert phi.is_normalized()
    d = phi.derivatives(0.4, 3)
    base = one_d("polynomial", coeffs=(2, 3, 1)).derivatives(0.4, 3)
    assert np.isclose(d[0], (base[0] - 2) / 3)
    assert np.allclose(d[1:], base[1:] / 3)


def test_identity_map_jets():
    z = np.array([0.3, 0.4j])
    f = Composition(Linear(np.eye(2)), Coordinatewise((one_d("identity"), one_d("identity"))))
    for k, jet in enumerate(evaluate_jet(f, z)):
        v, g, H, T = extract_derivatives(jet)
        assert v == z[k]
        assert np.allclose(g, np.eye(2)[k])
        assert np.all(H == 0) and np.all(T == 0)


def test_cayley_coefficients_at_zero():
    (jet,) = evaluate_jet(one_d("cayley"), [0.0])
    assert np.allclose([jet.coeff((k,)) for k in range(4)], [1, 1, 1, 1])
    assert np.allclose(one_d("cayley").derivatives(0.0, 3), [1, 1, 2, 6])


def test_roper_suffridge_at_origin():
    f = roper_suffridge(one_d("strip"), 2)
    assert np.allclose(f([0, 0]), 0)
    assert np.allclose(f.jacobian([0, 0]), np.eye(2))


def test_moebius_identity_matrix():
    M = moebius_from_matrix(np.eye(3))
    z = np.array([0.2 + 0.1j, -0.3j])
    assert np.allclose(M(z), z)
    assert np.allclose(M.jacobian(z), np.eye(2))


def test_moebius_one_variable():
    M = moebius_from_matrix([[1, -1], [0, 1]])
    for z in (0.1, 0.5j, -0.4 + 0.2j):
        assert np.isclose(M([z])[0], z / (1 - z))


def test_moebius_errors():
    with pytest.raises(LocalUnivalenceError):
        moebius_from_matrix(np.ones((3, 3)))
    with pytest.raises(SingularPointError):
        moebius_from_matrix([[1, -1], [0, 1]])([1.0])


def test_rs_identity_base():
    f = roper_suffridge(one_d("identity"), 3)
    z = np.array([0.2, 0.1j, -0.3])
    assert np.allclose(f(z), z)


def test_rs_jacobian_determinant_half_plane():
    f = roper_suffridge(one_d("half_plane"), 3)
    rng = np.random.default_rng(0)
    for _ in range(10):
        z = rng.normal(size=3) + 1j * rng.normal(size=3)
        z *= 0.8 / np.linalg.norm(z)
        assert np.isclose(np.linalg.det(f.jacobian(z)), (1 - z[0]) ** -4, rtol=1e-12)


def test_rs_lower_left_entry():
    f = roper_suffridge(one_d("strip"), 2)
    assert abs(f.jacobian([0, 0.5])[1, 0]) < 1e-15
    # and the general formula z2 phi''/(2 sqrt(phi'))
    z = np.array([0.3 + 0.2j, 0.4j])
    d = one_d("strip").derivatives(z[0], 2)
    assert np.isclose(f.jacobian(z)[1, 0], 0.5 * z[1] * d[2] / f.sqrt_dphi(z[0]))


def test_rs_branch_continues_past_negative_axis():
    # phi' = (1-z)^-2 winds; the continued root must stay 1/(1-z), not jump sign
    f = roper_suffridge(one_d("half_plane"), 2)
    for z1 in (0.9, -0.9, 0.9j, -0.6 - 0.6j):
        assert np.isclose(f.sqrt_dphi(z1), 1 / (1 - z1))


def test_rs_rejects_unnormalized():
    with pytest.raises(ConfigError):
        roper_suffridge(one_d("cayley"), 2, normalize_base=False)
    assert roper_suffridge(one_d("cayley"), 2).base.is_normalized()


def test_domain_checks():
    with pytest.raises(DomainError):
        roper_suffridge(one_d("strip"), 2)([0.8, 0.8])
    with pytest.raises(DomainError):
        Coordinatewise((one_d("strip"),) * 2)([1.0, 0.0])
    assert in_domain("polydisk", [0.99, 0.99j])
    assert not in_domain("ball", [0.99, 0.99j])
    assert not in_domain("disk", [1 - 1e-10])


def test_composition_outside_outer_domain():
    inner = Coordinatewise((one_d("cayley"), one_d("identity")))
    outer = Coordinatewise((one_d("strip"), one_d("strip")))
    with pytest.raises(DomainError):
        Composition(outer, inner)([0.5, 0.0])


def test_composition_jet_matches_closed_form():
    # (strip, log_map) after a linear change of variables, against sympy
    inner = Linear(np.array([[0.5, 0.1], [0.0, 0.4]]))
    outer = Coordinatewise((one_d("strip"), one_d("log_map")))
    f = Composition(outer, inner)
    z1, z2 = sp.symbols("z1 z2")
    w1, w2 = 0.5 * z1 + 0.1 * z2, 0.4 * z2
    exprs = [sp.log((1 + w1) / (1 - w1)) / 2, -sp.log(1 - w2)]
    z = (0.3 - 0.2j, 0.5j)
    subs = {z1: z[0], z2: z[1]}
    for jet, e in zip(f.jets(z), exprs):
        v, g, H, T = extract_derivatives(jet)
        assert np.isclose(v, complex(e.subs(subs).evalf()), atol=1e-10)
        want_g = [complex(sp.diff(e, s).subs(subs).evalf()) for s in (z1, z2)]
        assert np.allclose(g, want_g, atol=1e-10)
        want_T = complex(sp.diff(e, z1, z1, z2).subs(subs).evalf())
        assert np.isclose(T[0, 0, 1], want_T, atol=1e-10)


@pytest.mark.parametrize("name", CONVEX_FNS)
def test_convex_registry_bounds(name):
    phi = one_d(name)
    rng = np.random.default_rng(7)
    for z in disk_samples(rng, 200, rmax=1 - 1e-6):
        assert abs(pre_schwarzian_1d(phi, z)) * (1 - abs(z) ** 2) <= 4 + 1e-9
        assert abs(schwarzian_1d(phi, z)) * (1 - abs(z) ** 2) ** 2 <= 2 + 1e-9


def test_polynomial_not_convex_by_default():
    assert not one_d("polynomial", coeffs=(0, 1, 0.5)).convex
    assert one_d("polynomial", coeffs=(0, 1, 0.5), convex_flag=True).convex
    assert one_d("precomposed", base=one_d("strip"), a=0.2).convex


def test_unknown_function_rejected():
    with pytest.raises(ConfigError):
        one_d("exp_map")
    with pytest.raises(ConfigError):
        one_d("precomposed", base=one_d("strip"), a=1.2)


DOCS = [
    {"family": "roper_suffridge", "base": {"fn": "strip"}, "dimension": 3},
    {"family": "coordinatewise", "components": [{"fn": "cayley"}, {"fn": "precomposed", "base": {"fn": "strip"}, "a": [0.1, 0.2]}]},
    {"family": "moebius", "matrix": [[1, 0.2, 0], [0, 1, 0], [0.1, 0, 1]]},
    {"family": "composition", "outer": {"family": "linear", "matrix": [[1, 2], [0, 1]]},
     "inner": {"family": "coordinatewise", "components": [{"fn": "log_map"}, {"fn": "polynomial", "coeffs": [0, 1, "0.3+0.1i"]}]}},
    {"family": "one_d", "fn": "half_plane"},
]


@pytest.mark.parametrize("doc", DOCS)
def test_document_round_trip(doc):
    f = map_from_dict(doc)
    g = map_from_dict(json.loads(json.dumps(map_to_dict(f))))
    z = np.full(f.dimension, 0.1 + 0.05j)
    assert np.allclose(f(z), g(z))
    assert np.allclose(f.jacobian(z), g.jacobian(z))


@pytest.mark.parametrize(
    "doc",
    [
        {"family": "spiral"},
        {"family": "roper_suffridge", "base": {"fn": "strip"}},
        {"family": "roper_suffridge", "base": {"fn": "strip"}, "dimension": 2, "colour": "red"},
        {"family": "coordinatewise", "components": [{"fn": "strip"}], "dimension": 2},
        {"family": "moebius", "matrix": [[1, 2], [2, 4]]},
        {"fn": "strip", "radius": 1},
        "strip",
    ],
)
def test_bad_documents(doc):
    with pytest.raises((ConfigError, LocalUnivalenceError)):
        map_from_dict(doc)


def test_continue_log_tracks_winding():
    # log of e^{4 pi i t} continued from 0 must end at 4 pi i, not 0
    L = continue_log(lambda t: np.exp(4j * np.pi * t), 0.0)
    assert np.isclose(L, 4j * np.pi)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_linear_postcomposition_is_invisible(seed):
    # M o phi has the same tensor as phi: the linear factor never enters the Schwarzian path
    from schwarzian import schwarzian_tensor

    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 4))
    names = rng.choice(CONVEX_FNS, size=n)
    phi = Coordinatewise(tuple(one_d(str(s)) for s in names))
    M = np.eye(n) + 0.5 * (rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)))
    if abs(np.linalg.det(M)) < 1e-3:
        return
    z = disk_samples(rng, n, 0.8)
    a = schwarzian_tensor(phi, z)
    b = schwarzian_tensor(Composition(Linear(M), phi), z)
    assert np.allclose(a.upper, b.upper, atol=1e-9)
    assert np.allclose(a.zero, b.zero, atol=1e-9)
