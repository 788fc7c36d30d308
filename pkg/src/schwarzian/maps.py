"""
Locally biholomorphic map families and their order-3 jets.

Every map knows its dimension and the domain it is declared on, evaluates to
a list of component jets at a point, and round-trips through a plain JSON-style
document::

    {"family": "roper_suffridge", "base": {"fn": "strip"}, "dimension": 3}

One-variable registry functions carry closed-form derivatives up to order 4
(order 4 is needed for the jet of sqrt(phi'(z1)) in the Roper-Suffridge
extension); everything built on top of them is obtained by jet propagation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

import numpy as np

from .errors import BranchPointError, ConfigError, DomainError, LocalUnivalenceError, SingularPointError
from .jets import Jet3, compose, jet_analytic, seed_variables

DEFAULT_MARGIN = 1e-9

DOMAINS = ("disk", "polydisk", "ball", "cn")

CONVEX_FNS = ("identity", "half_plane", "cayley", "strip", "log_map")


# ---------------------------------------------------------------------------
# domains


def as_point(z, n: int | None = None) -> np.ndarray:
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    if z.ndim != 1:
        raise ValueError("a point must be a 1-d sequence of complex numbers")
    if n is not None and len(z) != n:
        raise ValueError(f"expected a point in C^{n}, got length {len(z)}")
    return z


def in_domain(domain: str, z, margin: float = DEFAULT_MARGIN) -> bool:
    z = as_point(z)
    if not np.all(np.isfinite(z)):
        return False
    if domain in ("disk", "polydisk"):
        return bool(np.max(np.abs(z)) < 1.0 - margin)
    if domain == "ball":
        return bool(np.sum(np.abs(z) ** 2) < 1.0 - margin)
    if domain == "cn":
        return True
    raise ValueError(f"unknown domain {domain!r}")


def check_domain(domain: str, z, margin: float = DEFAULT_MARGIN) -> np.ndarray:
    z = as_point(z)
    if not in_domain(domain, z, margin):
        raise DomainError(f"point {z} is not inside the {domain} (margin {margin:g})")
    return z


def continue_log(func: Callable[[float], complex], log_start: complex, max_step: float = 0.125) -> complex:
    """Continue log(func(t)) analytically from t = 0 to t = 1.

    ``log_start`` pins the branch at t = 0.  Steps are halved whenever two
    consecutive values differ in argument by more than pi/2.
    """
    t, w, L = 0.0, complex(func(0.0)), complex(log_start)
    if w == 0:
        raise BranchPointError("continuation starts at a zero")
    h = max_step
    while t < 1.0:
        h = min(h, 1.0 - t)
        w_new = complex(func(t + h))
        if w_new == 0:
            raise BranchPointError(f"zero met during continuation at t={t + h}")
        ratio = w_new / w
        if abs(np.angle(ratio)) > np.pi / 2:
            if h < 1e-12:
                raise BranchPointError("continuation step underflow near a branch point")
            h /= 2
            continue
        L += np.log(ratio)
        t += h
        w = w_new
        h = min(2 * h, max_step)
    return L


# ---------------------------------------------------------------------------
# univariate truncated series helpers (orders up to 4)


def _series_mul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.convolve(a, b)[: len(a)]


def _series_compose(outer: np.ndarray, inner: np.ndarray) -> np.ndarray:
    """Taylor coefficients of outer(inner(z)); outer expanded at inner[0]."""
    d = inner.astype(complex).copy()
    d[0] = 0.0
    out = np.zeros(len(inner), dtype=complex)
    power = np.zeros(len(inner), dtype=complex)
    power[0] = 1.0
    for k in range(len(inner)):
        out += outer[k] * power
        power = _series_mul(power, d)
    return out


_FACT = np.array([math.factorial(k) for k in range(8)], dtype=float)


# ---------------------------------------------------------------------------
# base class


class HolomorphicMap:
    """A locally biholomorphic map from a domain in C^n to C^n."""

    dimension: int
    domain: str

    def jets(self, z, margin: float = DEFAULT_MARGIN) -> list[Jet3]:
        z = check_domain(self.domain, as_point(z, self.dimension), margin)
        return self._jets(z)

    def _jets(self, z: np.ndarray) -> list[Jet3]:
        raise NotImplementedError

    def __call__(self, z, margin: float = DEFAULT_MARGIN) -> np.ndarray:
        return np.array([j.value for j in self.jets(z, margin)])

    def jacobian(self, z, margin: float = DEFAULT_MARGIN) -> np.ndarray:
        n = self.dimension
        lay_first = [tuple(int(i == k) for i in range(n)) for k in range(n)]
        return np.array([[j.coeff(e) for e in lay_first] for j in self.jets(z, margin)])

    def to_dict(self) -> dict:
        raise NotImplementedError


# ---------------------------------------------------------------------------
# one-variable registry


@dataclass(frozen=True, eq=False)
class OneD(HolomorphicMap):
    """A registry function of one complex variable on the unit disk.

    ``fn_id`` is one of identity, half_plane, cayley, strip, log_map,
    polynomial, precomposed, normalized.  ``polynomial`` takes ``coeffs``
    (constant term first); ``precomposed`` takes a ``base`` entry and a disk
    automorphism parameter ``a``, giving base((z + a) / (1 + conj(a) z));
    ``normalized`` rescales a ``base`` entry to phi(0) = 0, phi'(0) = 1.
    """

    fn_id: str
    coeffs: tuple = ()
    base: "OneD | None" = None
    a: complex = 0j
    convex_flag: bool | None = None
    dimension: int = field(default=1, init=False)
    domain: str = field(default="disk", init=False)

    def __post_init__(self):
        known = CONVEX_FNS + ("polynomial", "precomposed", "normalized")
        if self.fn_id not in known:
            raise ConfigError(f"unknown one-variable function {self.fn_id!r}")
        if self.fn_id in ("precomposed", "normalized") and self.base is None:
            raise ConfigError(f"{self.fn_id} requires a base function")
        if self.fn_id == "precomposed" and not abs(self.a) < 1:
            raise ConfigError(f"automorphism parameter must lie in the disk, got {self.a}")
        if self.fn_id == "polynomial" and len(self.coeffs) == 0:
            raise ConfigError("polynomial requires coefficients")

    @property
    def convex(self) -> bool:
        if self.convex_flag is not None:
            return self.convex_flag
        if self.fn_id in CONVEX_FNS:
            return True
        if self.base is not None:
            return self.base.convex
        return False

    def derivatives(self, z: complex, order: int = 4) -> np.ndarray:
        """phi^(k)(z) for k = 0..order (order <= 4)."""
        z = complex(z)
        k = np.arange(order + 1)
        fid = self.fn_id
        if fid == "identity":
            return np.array([z, 1.0, 0.0, 0.0, 0.0][: order + 1], dtype=complex)
        if fid in ("cayley", "half_plane"):
            out = _FACT[: order + 1] / (1 - z) ** (k + 1)
            if fid == "half_plane":
                out = out.astype(complex)
                out[0] = z / (1 - z)
            return out.astype(complex)
        if fid == "strip":
            out = np.empty(order + 1, dtype=complex)
            out[0] = 0.5 * np.log((1 + z) / (1 - z))
            for m in range(1, order + 1):
                out[m] = 0.5 * _FACT[m - 1] * ((-1) ** (m - 1) / (1 + z) ** m + 1 / (1 - z) ** m)
            return out
        if fid == "log_map":
            out = np.empty(order + 1, dtype=complex)
            out[0] = -np.log(1 - z)
            for m in range(1, order + 1):
                out[m] = _FACT[m - 1] / (1 - z) ** m
            return out
        if fid == "polynomial":
            p = np.polynomial.Polynomial(np.asarray(self.coeffs, dtype=complex))
            return np.array([p.deriv(m)(z) if m else p(z) for m in range(order + 1)], dtype=complex)
        return self.taylor(z, order) * _FACT[: order + 1]

    def taylor(self, z: complex, order: int = 4) -> np.ndarray:
        """Taylor coefficients phi^(k)(z)/k! for k = 0..order."""
        if self.fn_id == "precomposed":
            a = complex(self.a)
            z = complex(z)
            tau = np.empty(order + 1, dtype=complex)
            tau[0] = (z + a) / (1 + np.conj(a) * z)
            for m in range(1, order + 1):
                # m-th derivative of (z + a)/(1 + conj(a) z), divided by m!
                tau[m] = (1 - abs(a) ** 2) * (-np.conj(a)) ** (m - 1) / (1 + np.conj(a) * z) ** (m + 1)
            return _series_compose(self.base.taylor(tau[0], order), tau)
        if self.fn_id == "normalized":
            base0 = self.base.derivatives(0.0, 1)
            if base0[1] == 0:
                raise LocalUnivalenceError("cannot normalize: phi'(0) = 0")
            out = self.base.taylor(z, order).copy()
            out[0] -= base0[0]
            return out / base0[1]
        return self.derivatives(z, order) / _FACT[: order + 1]

    def is_normalized(self, tol: float = 1e-12) -> bool:
        d = self.derivatives(0.0, 1)
        return abs(d[0]) <= tol and abs(d[1] - 1) <= tol

    def _jets(self, z: np.ndarray) -> list[Jet3]:
        (s,) = seed_variables(z)
        return [compose(s, self.taylor(z[0], 3))]

    def to_dict(self) -> dict:
        d: dict[str, Any] = {"fn": self.fn_id}
        if self.fn_id == "polynomial":
            d["coeffs"] = [_complex_out(c) for c in self.coeffs]
        if self.base is not None:
            d["base"] = self.base.to_dict()
        if self.fn_id == "precomposed":
            d["a"] = _complex_out(self.a)
        if self.convex_flag is not None:
            d["convex"] = self.convex_flag
        return d


def one_d(fn_id: str, **params) -> OneD:
    """Registry lookup, e.g. ``one_d("strip")`` or ``one_d("polynomial", coeffs=(0, 1, 0.5))``."""
    if "coeffs" in params:
        params["coeffs"] = tuple(complex(c) for c in params["coeffs"])
    if "a" in params:
        params["a"] = complex(params["a"])
    return OneD(fn_id, **params)


def normalize(phi: OneD) -> OneD:
    """(phi - phi(0)) / phi'(0), skipped when phi is already normalized."""
    if phi.is_normalized():
        return phi
    return OneD("normalized", base=phi)


# ---------------------------------------------------------------------------
# maps of C^n


@dataclass(frozen=True, eq=False)
class Moebius(HolomorphicMap):
    """z -> (l_1/l_0, ..., l_n/l_0) with l_i(z) = A[i,0] + sum_j A[i,j] z_j."""

    matrix: np.ndarray
    domain: str = "cn"

    def __post_init__(self):
        A = np.asarray(self.matrix, dtype=complex)
        if A.ndim != 2 or A.shape[0] != A.shape[1] or A.shape[0] < 2:
            raise ConfigError(f"Moebius matrix must be (n+1)x(n+1) with n >= 1, got {A.shape}")
        if abs(np.linalg.det(A)) < 1e-14 * max(1.0, np.max(np.abs(A))) ** A.shape[0]:
            raise LocalUnivalenceError("Moebius matrix is singular")
        object.__setattr__(self, "matrix", A)

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0] - 1

    def _jets(self, z: np.ndarray) -> list[Jet3]:
        A = self.matrix
        seeds = seed_variables(z)
        forms = []
        for row in A:
            l = Jet3.constant(len(z), row[0])
            for j, s in enumerate(seeds):
                l = l + s * row[j + 1]
            forms.append(l)
        if abs(forms[0].value) < 1e-14:
            raise SingularPointError(f"Moebius denominator vanishes at {z}")
        inv = forms[0].reciprocal()
        return [l * inv for l in forms[1:]]

    def to_dict(self) -> dict:
        return {"family": "moebius", "matrix": _matrix_out(self.matrix), "domain": self.domain}


def moebius_from_matrix(A, domain: str = "cn") -> Moebius:
    return Moebius(np.asarray(A, dtype=complex), domain=domain)


@dataclass(frozen=True, eq=False)
class Linear(HolomorphicMap):
    matrix: np.ndarray
    domain: str = "cn"

    def __post_init__(self):
        M = np.asarray(self.matrix, dtype=complex)
        if M.ndim != 2 or M.shape[0] != M.shape[1]:
            raise ConfigError(f"linear map needs a square matrix, got {M.shape}")
        if abs(np.linalg.det(M)) < 1e-14:
            raise LocalUnivalenceError("linear map is singular")
        object.__setattr__(self, "matrix", M)

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    def _jets(self, z: np.ndarray) -> list[Jet3]:
        seeds = seed_variables(z)
        out = []
        for row in self.matrix:
            acc = Jet3.zeros(len(z))
            for m, s in zip(row, seeds):
                acc = acc + s * m
            out.append(acc)
        return out

    def to_dict(self) -> dict:
        return {"family": "linear", "matrix": _matrix_out(self.matrix), "domain": self.domain}


@dataclass(frozen=True, eq=False)
class Coordinatewise(HolomorphicMap):
    """(phi_1(z_1), ..., phi_n(z_n)) on the polydisk."""

    components: tuple
    domain: str = field(default="polydisk", init=False)

    def __post_init__(self):
        if not self.components:
            raise ConfigError("coordinatewise map needs at least one component")
        object.__setattr__(self, "components", tuple(self.components))

    @property
    def dimension(self) -> int:
        return len(self.components)

    def _jets(self, z: np.ndarray) -> list[Jet3]:
        seeds = seed_variables(z)
        return [compose(s, phi.taylor(zi, 3)) for s, phi, zi in zip(seeds, self.components, z)]

    def to_dict(self) -> dict:
        return {"family": "coordinatewise", "components": [c.to_dict() for c in self.components]}


@dataclass(frozen=True, eq=False)
class RoperSuffridge(HolomorphicMap):
    """(phi(z_1), sqrt(phi'(z_1)) z_2, ..., sqrt(phi'(z_1)) z_n) on the ball.

    The square-root branch is pinned by sqrt(phi'(0)) = 1 and continued along
    the radial segment from 0 to z_1.
    """

    base: OneD
    n: int
    domain: str = field(default="ball", init=False)

    def __post_init__(self):
        if self.n < 1:
            raise ConfigError("dimension must be >= 1")
        if not self.base.is_normalized(1e-10):
            raise ConfigError("Roper-Suffridge base must satisfy phi(0) = 0, phi'(0) = 1")

    @property
    def dimension(self) -> int:
        return self.n

    def sqrt_dphi(self, z1: complex) -> complex:
        L = continue_log(lambda t: self.base.derivatives(t * z1, 1)[1], 0.0)
        return complex(np.exp(0.5 * L))

    def _jets(self, z: np.ndarray) -> list[Jet3]:
        seeds = seed_variables(z)
        t = self.base.taylor(z[0], 4)
        first = compose(seeds[0], t[:4])
        if self.n == 1:
            return [first]
        dphi = compose(seeds[0], [(k + 1) * t[k + 1] for k in range(4)])
        root = jet_analytic(dphi, "sqrt", branch=self.sqrt_dphi(z[0]))
        return [first] + [root * s for s in seeds[1:]]

    def to_dict(self) -> dict:
        return {"family": "roper_suffridge", "base": self.base.to_dict(), "dimension": self.n}


def roper_suffridge(phi: OneD, n: int, normalize_base: bool = True) -> RoperSuffridge:
    """Roper-Suffridge extension of ``phi`` to the ball in C^n.

    With ``normalize_base`` the input is first brought to the normal form
    phi(0) = 0, phi'(0) = 1 (which changes no Schwarzian quantity); otherwise
    a non-normalized ``phi`` is rejected.
    """
    if normalize_base:
        phi = normalize(phi)
    return RoperSuffridge(phi, n)


@dataclass(frozen=True, eq=False)
class Composition(HolomorphicMap):
    """outer o inner, on the domain of ``inner``."""

    outer: HolomorphicMap
    inner: HolomorphicMap

    def __post_init__(self):
        if self.outer.dimension != self.inner.dimension:
            raise ConfigError(
                f"composition dimension mismatch: {self.outer.dimension} vs {self.inner.dimension}"
            )

    @property
    def dimension(self) -> int:
        return self.inner.dimension

    @property
    def domain(self) -> str:
        return self.inner.domain

    def _jets(self, z: np.ndarray) -> list[Jet3]:
        w = self.inner._jets(z)
        w0 = np.array([j.value for j in w])
        if not in_domain(self.outer.domain, w0):
            raise DomainError(f"inner value {w0} lies outside the outer map's {self.outer.domain}")
        return [j.substitute(w) for j in self.outer._jets(w0)]

    def to_dict(self) -> dict:
        return {"family": "composition", "outer": self.outer.to_dict(), "inner": self.inner.to_dict()}


def evaluate_jet(f: HolomorphicMap, z, margin: float = DEFAULT_MARGIN) -> list[Jet3]:
    """Component jets of ``f`` at ``z``."""
    return f.jets(z, margin)


# ---------------------------------------------------------------------------
# documents


def parse_complex(x) -> complex:
    if isinstance(x, (list, tuple)):
        if len(x) != 2:
            raise ConfigError(f"complex number as a list needs [re, im], got {x!r}")
        return complex(float(x[0]), float(x[1]))
    if isinstance(x, str):
        try:
            return complex(x.replace(" ", "").replace("i", "j"))
        except ValueError as exc:
            raise ConfigError(f"cannot parse complex number {x!r}") from exc
    if isinstance(x, (int, float, complex)) and not isinstance(x, bool):
        return complex(x)
    raise ConfigError(f"cannot parse complex number {x!r}")


def _complex_out(c: complex) -> list[float]:
    c = complex(c)
    return [c.real, c.imag]


def _matrix_out(M: np.ndarray) -> list:
    return [[_complex_out(x) for x in row] for row in M]


def _matrix_in(rows) -> np.ndarray:
    if not isinstance(rows, list) or not rows:
        raise ConfigError("matrix must be a non-empty list of rows")
    return np.array([[parse_complex(x) for x in row] for row in rows], dtype=complex)


def _check_keys(doc: dict, allowed: set, what: str) -> None:
    extra = set(doc) - allowed
    if extra:
        raise ConfigError(f"unknown field(s) {sorted(extra)} in {what}")


def one_d_from_dict(doc: dict) -> OneD:
    if not isinstance(doc, dict) or "fn" not in doc:
        raise ConfigError(f"one-variable entry needs an 'fn' field: {doc!r}")
    _check_keys(doc, {"fn", "coeffs", "base", "a", "convex"}, "one-variable entry")
    kwargs: dict[str, Any] = {}
    if "coeffs" in doc:
        kwargs["coeffs"] = tuple(parse_complex(c) for c in doc["coeffs"])
    if "base" in doc:
        kwargs["base"] = one_d_from_dict(doc["base"])
    if "a" in doc:
        kwargs["a"] = parse_complex(doc["a"])
    if "convex" in doc:
        kwargs["convex_flag"] = bool(doc["convex"])
    return OneD(doc["fn"], **kwargs)


def map_from_dict(doc: dict) -> HolomorphicMap:
    """Build a map from its document form (see module docstring)."""
    if not isinstance(doc, dict):
        raise ConfigError("map document must be an object")
    doc = {k: v for k, v in doc.items() if k != "schema_version"}
    family = doc.get("family")
    if family is None and "fn" in doc:
        return one_d_from_dict(doc)
    if family == "one_d":
        return one_d_from_dict({k: v for k, v in doc.items() if k not in ("family", "dimension", "domain")})
    if family == "moebius":
        _check_keys(doc, {"family", "matrix", "domain", "dimension"}, "moebius map")
        m = Moebius(_matrix_in(doc.get("matrix")), domain=doc.get("domain", "cn"))
        _check_dimension(doc, m)
        return m
    if family == "linear":
        _check_keys(doc, {"family", "matrix", "domain", "dimension"}, "linear map")
        m = Linear(_matrix_in(doc.get("matrix")), domain=doc.get("domain", "cn"))
        _check_dimension(doc, m)
        return m
    if family == "coordinatewise":
        _check_keys(doc, {"family", "components", "dimension", "domain"}, "coordinatewise map")
        if doc.get("domain", "polydisk") != "polydisk":
            raise ConfigError("coordinatewise maps live on the polydisk")
        m = Coordinatewise(tuple(one_d_from_dict(c) for c in doc.get("components", [])))
        _check_dimension(doc, m)
        return m
    if family == "roper_suffridge":
        _check_keys(doc, {"family", "base", "dimension", "domain", "normalize"}, "roper_suffridge map")
        if doc.get("domain", "ball") != "ball":
            raise ConfigError("Roper-Suffridge maps live on the ball")
        if "base" not in doc or "dimension" not in doc:
            raise ConfigError("roper_suffridge needs 'base' and 'dimension'")
        return roper_suffridge(one_d_from_dict(doc["base"]), int(doc["dimension"]), doc.get("normalize", True))
    if family == "composition":
        _check_keys(doc, {"family", "outer", "inner", "dimension", "domain"}, "composition")
        m = Composition(map_from_dict(doc["outer"]), map_from_dict(doc["inner"]))
        _check_dimension(doc, m)
        return m
    raise ConfigError(f"unknown map family {family!r}")


def _check_dimension(doc: dict, m: HolomorphicMap) -> None:
    if "dimension" in doc and int(doc["dimension"]) != m.dimension:
        raise ConfigError(f"declared dimension {doc['dimension']} but map has dimension {m.dimension}")
    if "domain" in doc and doc["domain"] not in DOMAINS:
        raise ConfigError(f"unknown domain {doc['domain']!r}")


def map_to_dict(f: HolomorphicMap) -> dict:
    doc = f.to_dict()
    if isinstance(f, OneD):
        doc = {"family": "one_d", **doc}
    return doc
