"""
The Schwarzian derivative tensor of a locally biholomorphic map.

For f = (f_1, ..., f_n) the coefficients are

    S^k_ij f = sum_l  d^2 f_l / dz_i dz_j * (Df^-1)_{kl}
               - (delta^k_i d_j + delta^k_j d_i) log J_f / (n + 1)

and S^0_ij f = J^(1/(n+1)) * (d_ij u0 - sum_k d_k u0 * S^k_ij f) with
u0 = J_f^(-1/(n+1)).  ``SchwarzianTensor.upper[k, i, j]`` stores S^(k+1)_(i+1)(j+1)
(zero-based indices throughout the code).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import LocalUnivalenceError
from .jets import Jet3, extract_derivatives, jet_analytic, jet_det
from .maps import (
    DEFAULT_MARGIN,
    Composition,
    HolomorphicMap,
    OneD,
    as_point,
    continue_log,
)

COND_LIMIT = 1e12


@dataclass(frozen=True)
class LocalData:
    """Derivatives of a map at a point.

    ``d1[l, i] = df_l/dz_i``, ``d2[l, i, j]``, ``d3[l, i, j, k]`` likewise.
    """

    z: np.ndarray
    value: np.ndarray
    d1: np.ndarray
    d2: np.ndarray
    d3: np.ndarray
    jets: tuple
    lu: tuple

    @property
    def n(self) -> int:
        return len(self.z)

    def solve(self, b: np.ndarray) -> np.ndarray:
        return scipy.linalg.lu_solve(self.lu, b)

    @property
    def inverse(self) -> np.ndarray:
        return self.solve(np.eye(self.n, dtype=complex))

    @property
    def log_jacobian_gradient(self) -> np.ndarray:
        # d_i log J = tr(Df^-1 d_i Df)
        inv = self.inverse
        return np.einsum("ba,abi->i", inv, self.d2)


def local_data(f: HolomorphicMap, z, margin: float = DEFAULT_MARGIN, cond_limit: float = COND_LIMIT) -> LocalData:
    z = as_point(z, f.dimension)
    jets = f.jets(z, margin)
    n = len(z)
    value = np.empty(n, dtype=complex)
    d1 = np.empty((n, n), dtype=complex)
    d2 = np.empty((n, n, n), dtype=complex)
    d3 = np.empty((n, n, n, n), dtype=complex)
    for l, jet in enumerate(jets):
        value[l], d1[l], d2[l], d3[l] = extract_derivatives(jet)
    if not np.all(np.isfinite(d1)):
        raise LocalUnivalenceError(f"non-finite Jacobian at {z}")
    cond = np.linalg.cond(d1)
    if not cond < cond_limit:
        raise LocalUnivalenceError(f"Jacobian condition number {cond:.3g} exceeds {cond_limit:.0e} at {z}")
    lu = scipy.linalg.lu_factor(d1)
    return LocalData(z, value, d1, d2, d3, tuple(jets), lu)


@dataclass(frozen=True)
class SchwarzianTensor:
    """Coefficients S^k_ij (``upper[k, i, j]``) and S^0_ij (``zero[i, j]``)."""

    upper: np.ndarray
    zero: np.ndarray

    @property
    def n(self) -> int:
        return self.upper.shape[0]

    def apply(self, v) -> np.ndarray:
        """(v^t S^1 v, ..., v^t S^n v)."""
        v = np.asarray(v, dtype=complex)
        return np.einsum("kij,i,j->k", self.upper, v, v)

    def apply_zero(self, v) -> complex:
        v = np.asarray(v, dtype=complex)
        return complex(v @ self.zero @ v)

    def symmetry_residual(self) -> float:
        return float(np.max(np.abs(self.upper - self.upper.transpose(0, 2, 1))))

    def max_abs(self) -> float:
        return float(max(np.max(np.abs(self.upper)), np.max(np.abs(self.zero))))


def jacobian_jet(data: LocalData) -> Jet3:
    """Jet of J_f = det Df, exact through degree 2."""
    jets = data.jets
    return jet_det([[jets[l].partial(i) for i in range(data.n)] for l in range(data.n)])


def _upper(data: LocalData) -> np.ndarray:
    n = data.n
    inv = data.inverse
    g = data.log_jacobian_gradient
    eye = np.eye(n)
    S = np.einsum("lij,kl->kij", data.d2, inv)
    S -= (np.einsum("ki,j->kij", eye, g) + np.einsum("kj,i->kij", eye, g)) / (n + 1)
    return S


def _u0_jet(data: LocalData, branch: complex | None = None) -> Jet3:
    return jet_analytic(jacobian_jet(data), "pow", alpha=-1.0 / (data.n + 1), branch=branch)


def schwarzian_tensor(f: HolomorphicMap, z, margin: float = DEFAULT_MARGIN, data: LocalData | None = None) -> SchwarzianTensor:
    """S^k_ij f(z) and S^0_ij f(z)."""
    if data is None:
        data = local_data(f, z, margin)
    upper = _upper(data)
    # any branch of J^(-1/(n+1)) works here: S^0 is homogeneous of degree 0 in u0
    u0 = _u0_jet(data)
    val, grad, hess, _ = extract_derivatives(u0)
    zero = (hess - np.einsum("k,kij->ij", grad, upper)) / val
    return SchwarzianTensor(upper, zero)


def schwarzian_1d(phi: OneD, z: complex) -> complex:
    """(phi''/phi')' - (phi''/phi')^2 / 2 from the order-3 jet of phi."""
    _, d1, d2, d3 = extract_derivatives(phi.jets([z])[0])
    p1, p2, p3 = d1[0], d2[0, 0], d3[0, 0, 0]
    if p1 == 0:
        raise LocalUnivalenceError(f"critical point of phi at {z}")
    return complex(p3 / p1 - 1.5 * (p2 / p1) ** 2)


def pre_schwarzian_1d(phi: OneD, z: complex) -> complex:
    d = phi.derivatives(z, 2)
    if d[1] == 0:
        raise LocalUnivalenceError(f"critical point of phi at {z}")
    return complex(d[2] / d[1])


def operator_apply(data: LocalData, v) -> np.ndarray:
    """Df^-1 D^2f(v, v) - 2/(n+1) (grad log J . v) v, without forming the tensor."""
    v = np.asarray(v, dtype=complex)
    second = np.einsum("lij,i,j->l", data.d2, v, v)
    g = data.log_jacobian_gradient
    return data.solve(second) - 2.0 / (data.n + 1) * (g @ v) * v


def schwarzian_apply(f: HolomorphicMap, z, v, route: str = "tensor", margin: float = DEFAULT_MARGIN) -> np.ndarray:
    """S_f(z)(v, v), either by tensor contraction or by the operator formula."""
    data = local_data(f, z, margin)
    if route == "tensor":
        return SchwarzianTensor(_upper(data), np.zeros((data.n, data.n))).apply(v)
    if route == "operator":
        return operator_apply(data, v)
    raise ValueError(f"unknown route {route!r}")


def chain_rule_residual(f: HolomorphicMap, g: HolomorphicMap, z, margin: float = DEFAULT_MARGIN) -> float:
    """Max coefficient mismatch in S(g o f) = S f + pullback of S g."""
    comp = Composition(g, f)
    data_f = local_data(f, z, margin)
    w = data_f.value
    s_comp = _upper(local_data(comp, z, margin))
    s_f = _upper(data_f)
    s_g = _upper(local_data(g, w, margin))
    inv = data_f.inverse
    pulled = np.einsum("rlm,li,mj,kr->kij", s_g, data_f.d1, data_f.d1, inv)
    return float(np.max(np.abs(s_comp - s_f - pulled)))


def canonical_trace_residual(t: SchwarzianTensor) -> float:
    """max_i |sum_j S^j_ij|."""
    return float(np.max(np.abs(np.einsum("jij->i", t.upper))))


def u0_branch(f: HolomorphicMap, z, margin: float = DEFAULT_MARGIN) -> complex:
    """J_f(z)^(-1/(n+1)) continued radially from the domain centre.

    The branch at the centre is the principal one.
    """
    z = as_point(z, f.dimension)
    n = len(z)

    def jac(t: float) -> complex:
        return complex(np.linalg.det(f.jacobian(t * z, margin)))

    L = continue_log(jac, np.log(jac(0.0)))
    return complex(np.exp(-L / (n + 1)))


def pde_residual(f: HolomorphicMap, z, which: int = 0, margin: float = DEFAULT_MARGIN) -> float:
    """Residual of Hess u = sum_k S^k d_k u + S^0 u for u0 (which=0) or u_i = f_i u0.

    ``which`` = i >= 1 selects u_i (one-based, matching f_i).
    """
    data = local_data(f, z, margin)
    t = schwarzian_tensor(f, z, data=data)
    u = _u0_jet(data, branch=u0_branch(f, z, margin))
    if which:
        if not 1 <= which <= data.n:
            raise ValueError(f"which must be in 0..{data.n}, got {which}")
        u = data.jets[which - 1] * u
    val, grad, hess, _ = extract_derivatives(u)
    res = hess - np.einsum("kij,k->ij", t.upper, grad) - t.zero * val
    return float(np.max(np.abs(res)))
