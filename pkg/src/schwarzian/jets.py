"""
Truncated multivariate Taylor arithmetic (jets) through total degree 3.

A jet stores the Taylor coefficients c_a = d^a u(z0) / a! of a scalar
holomorphic function u of n complex variables at an implicit base point z0,
for every multi-index a with |a| <= 3.  Coefficients live in a dense complex
array ordered by graded lexicographic multi-index, so multiplication is a
plain truncated convolution.

    >>> z, = seed_variables([2.0])
    >>> (z * z).coeffs
    array([4.+0.j, 4.+0.j, 1.+0.j, 0.+0.j])
"""

from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import BranchPointError, SingularPointError

ORDER = 3

# Below this magnitude a constant term is treated as zero.
_TINY = 1e-300


@dataclass(frozen=True)
class _Layout:
    n: int
    multi: np.ndarray  # (N, n) multi-indices, graded lex
    degree: np.ndarray  # (N,)
    index: dict
    factorial: np.ndarray  # a! per multi-index
    mul_i: np.ndarray
    mul_j: np.ndarray
    mul_k: np.ndarray

    @property
    def size(self) -> int:
        return len(self.degree)


def _multi_indices(n: int) -> list[tuple[int, ...]]:
    out = []
    for d in range(ORDER + 1):
        # graded lexicographic: within a degree, larger leading exponents first
        block = [a for a in itertools.product(range(d + 1), repeat=n) if sum(a) == d]
        block.sort(reverse=True)
        out.extend(block)
    return out


@functools.lru_cache(maxsize=None)
def layout(n: int) -> _Layout:
    """Multi-index bookkeeping for dimension ``n`` (cached)."""
    if n < 1:
        raise ValueError(f"dimension must be >= 1, got {n}")
    multi = _multi_indices(n)
    index = {a: k for k, a in enumerate(multi)}
    arr = np.array(multi, dtype=int).reshape(len(multi), n)
    degree = arr.sum(axis=1)
    fact = np.array([math.prod(math.factorial(e) for e in a) for a in multi], dtype=float)
    ii, jj, kk = [], [], []
    for i, a in enumerate(multi):
        for j, b in enumerate(multi):
            if degree[i] + degree[j] <= ORDER:
                ii.append(i)
                jj.append(j)
                kk.append(index[tuple(x + y for x, y in zip(a, b))])
    return _Layout(
        n=n,
        multi=arr,
        degree=degree,
        index=index,
        factorial=fact,
        mul_i=np.array(ii),
        mul_j=np.array(jj),
        mul_k=np.array(kk),
    )


class Jet3:
    """Order-3 truncated Taylor expansion of a scalar field in ``n`` variables.

    Supports ``+``, ``-``, ``*``, ``/`` and unary ``-`` against other jets of
    the same dimension and against complex scalars.
    """

    __slots__ = ("n", "coeffs")

    def __init__(self, n: int, coeffs):
        lay = layout(n)
        c = np.asarray(coeffs, dtype=complex)
        if c.shape != (lay.size,):
            raise ValueError(f"expected {lay.size} coefficients for n={n}, got shape {c.shape}")
        self.n = n
        self.coeffs = c

    @classmethod
    def constant(cls, n: int, value: complex) -> "Jet3":
        c = np.zeros(layout(n).size, dtype=complex)
        c[0] = value
        return cls(n, c)

    @classmethod
    def zeros(cls, n: int) -> "Jet3":
        return cls(n, np.zeros(layout(n).size, dtype=complex))

    @property
    def value(self) -> complex:
        return complex(self.coeffs[0])

    def coeff(self, alpha: Sequence[int]) -> complex:
        return complex(self.coeffs[layout(self.n).index[tuple(alpha)]])

    def __repr__(self) -> str:
        return f"Jet3(n={self.n}, coeffs={np.array2string(self.coeffs, precision=6)})"

    # arithmetic -----------------------------------------------------------

    def _coerce(self, other) -> "Jet3":
        if isinstance(other, Jet3):
            if other.n != self.n:
                raise ValueError(f"dimension mismatch: {self.n} vs {other.n}")
            return other
        return Jet3.constant(self.n, complex(other))

    def __add__(self, other):
        if isinstance(other, Jet3):
            return Jet3(self.n, self.coeffs + self._coerce(other).coeffs)
        c = self.coeffs.copy()
        c[0] += other
        return Jet3(self.n, c)

    __radd__ = __add__

    def __neg__(self):
        return Jet3(self.n, -self.coeffs)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, Jet3):
            return Jet3(self.n, self.coeffs * complex(other))
        other = self._coerce(other)
        lay = layout(self.n)
        prod = self.coeffs[lay.mul_i] * other.coeffs[lay.mul_j]
        re = np.bincount(lay.mul_k, weights=prod.real, minlength=lay.size)
        im = np.bincount(lay.mul_k, weights=prod.imag, minlength=lay.size)
        return Jet3(self.n, re + 1j * im)

    __rmul__ = __mul__

    def reciprocal(self) -> "Jet3":
        a0 = self.coeffs[0]
        if abs(a0) <= _TINY:
            raise SingularPointError("division by a jet with zero constant term")
        # 1/w expanded at a0: sum_k (-1)^k a0^(-k-1) (w - a0)^k
        return compose(self, [1 / a0, -1 / a0**2, 1 / a0**3, -1 / a0**4])

    def __truediv__(self, other):
        if not isinstance(other, Jet3):
            other = complex(other)
            if abs(other) <= _TINY:
                raise SingularPointError("division by zero scalar")
            return Jet3(self.n, self.coeffs / other)
        return self * self._coerce(other).reciprocal()

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def partial(self, i: int) -> "Jet3":
        """Jet of du/dz_i.  Exact through degree 2 only; degree-3 terms are zero."""
        lay = layout(self.n)
        out = np.zeros(lay.size, dtype=complex)
        e = np.zeros(self.n, dtype=int)
        e[i] = 1
        for k in range(lay.size):
            if lay.degree[k] >= ORDER:
                continue
            beta = tuple(lay.multi[k] + e)
            out[k] = (lay.multi[k][i] + 1) * self.coeffs[lay.index[beta]]
        return Jet3(self.n, out)

    def substitute(self, inner: Sequence["Jet3"]) -> "Jet3":
        """Compose this jet (a polynomial in z - z0) with ``inner`` jets.

        ``inner[i]`` must have constant term equal to the i-th base point
        coordinate of ``self``; only the increments ``inner[i] - inner[i].value``
        enter, so the base point itself is never needed.
        """
        if len(inner) != self.n:
            raise ValueError(f"need {self.n} inner jets, got {len(inner)}")
        m = inner[0].n
        lay = layout(self.n)
        incs = [w - w.value for w in inner]
        monos: list[Jet3] = [Jet3.constant(m, 1.0)]
        out = Jet3.constant(m, self.coeffs[0])
        for k in range(1, lay.size):
            alpha = lay.multi[k]
            i = int(np.flatnonzero(alpha)[-1])
            prev = alpha.copy()
            prev[i] -= 1
            mono = monos[lay.index[tuple(prev)]] * incs[i]
            monos.append(mono)
            if self.coeffs[k] != 0:
                out = out + mono * self.coeffs[k]
        return out


def seed_variables(z0: Sequence[complex], n: int | None = None) -> list[Jet3]:
    """Coordinate jets z_1, ..., z_n expanded at ``z0``."""
    z0 = np.atleast_1d(np.asarray(z0, dtype=complex))
    if n is None:
        n = len(z0)
    if n < 1 or len(z0) != n:
        raise ValueError(f"point of length {len(z0)} does not match dimension {n}")
    lay = layout(n)
    jets = []
    for i in range(n):
        c = np.zeros(lay.size, dtype=complex)
        c[0] = z0[i]
        e = [0] * n
        e[i] = 1
        c[lay.index[tuple(e)]] = 1.0
        jets.append(Jet3(n, c))
    return jets


def compose(a: Jet3, taylor: Sequence[complex]) -> Jet3:
    """g(a) for a univariate g with Taylor coefficients g^(k)(a0)/k!, k = 0..3.

    This is the order-3 Faa di Bruno formula written in Taylor-coefficient
    form: sum_k g_k (a - a0)^k.
    """
    t = list(taylor) + [0.0] * (ORDER + 1 - len(taylor))
    d = a - a.value
    d2 = d * d
    d3 = d2 * d
    return Jet3.constant(a.n, t[0]) + d * t[1] + d2 * t[2] + d3 * t[3]


def jet_arith(a: Jet3, b: Jet3, op: str) -> Jet3:
    """Dispatch form of the jet arithmetic operators."""
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        return a / b
    if op == "neg":
        return -a
    raise ValueError(f"unknown jet operation {op!r}")


def _is_power_value(w0: complex, a0: complex, alpha: float, max_sheets: int = 64) -> bool:
    # w0 must equal exp(alpha * (Log a0 + 2 pi i m)) for some integer m
    principal = a0**alpha
    if abs(abs(w0) - abs(principal)) > 1e-8 * abs(principal):
        return False
    return any(
        abs(w0 - principal * np.exp(2j * np.pi * alpha * m)) <= 1e-8 * abs(principal)
        for m in range(-max_sheets, max_sheets + 1)
    )


def _binom(alpha: float, k: int) -> complex:
    out = 1.0
    for j in range(k):
        out *= (alpha - j) / (j + 1)
    return out


def jet_analytic(a: Jet3, fn: str, *, alpha: float | None = None, branch: complex | None = None) -> Jet3:
    """Apply exp, log, sqrt or pow(alpha) to a jet.

    For the multivalued functions ``branch`` is the value the result should
    take at the base point (for log: a logarithm of ``a.value``; for sqrt and
    pow: a value of ``a.value ** alpha``).  When omitted the principal branch
    is used.
    """
    a0 = a.value
    if fn == "exp":
        e0 = np.exp(a0)
        return compose(a, [e0, e0, e0 / 2, e0 / 6])
    if fn == "sqrt":
        fn, alpha = "pow", 0.5
    if fn not in ("log", "pow"):
        raise ValueError(f"unknown analytic function {fn!r}")
    if abs(a0) <= _TINY:
        raise BranchPointError(f"{fn} of a jet with zero constant term")
    if fn == "log":
        l0 = np.log(a0) if branch is None else complex(branch)
        if abs(np.exp(l0) - a0) > 1e-8 * abs(a0):
            raise BranchPointError(f"branch value {l0} is not a logarithm of {a0}")
        return compose(a, [l0, 1 / a0, -1 / (2 * a0**2), 1 / (3 * a0**3)])
    if alpha is None:
        raise ValueError("pow requires an exponent alpha")
    w0 = a0**alpha if branch is None else complex(branch)
    if not _is_power_value(w0, a0, alpha):
        raise BranchPointError(f"branch value {w0} is not a value of {a0}**{alpha}")
    return compose(a, [w0 * _binom(alpha, k) / a0**k for k in range(ORDER + 1)])


def extract_derivatives(a: Jet3) -> tuple[complex, np.ndarray, np.ndarray, np.ndarray]:
    """(value, gradient, Hessian, third-derivative tensor) from a jet.

    Hessian and third tensor are fully symmetric arrays of raw partial
    derivatives (Taylor coefficients rescaled by a!).
    """
    n = a.n
    lay = layout(n)
    raw = a.coeffs * lay.factorial
    grad = np.zeros(n, dtype=complex)
    hess = np.zeros((n, n), dtype=complex)
    third = np.zeros((n, n, n), dtype=complex)
    for k in range(1, lay.size):
        alpha = lay.multi[k]
        idx = tuple(np.repeat(np.arange(n), alpha))
        if lay.degree[k] == 1:
            grad[idx[0]] = raw[k]
        elif lay.degree[k] == 2:
            for p in set(itertools.permutations(idx)):
                hess[p] = raw[k]
        else:
            for p in set(itertools.permutations(idx)):
                third[p] = raw[k]
    return complex(raw[0]), grad, hess, third


def jet_det(matrix: Sequence[Sequence[Jet3]]) -> Jet3:
    """Determinant of a square matrix with jet entries.

    Cofactor expansion for sizes up to 4, elimination with partial pivoting
    on the constant terms beyond that.
    """
    m = [list(row) for row in matrix]
    size = len(m)
    if any(len(row) != size for row in m):
        raise ValueError("jet matrix must be square")
    if size <= 4:
        return _cofactor_det(m)
    return _lu_det(m)


def _cofactor_det(m: list[list[Jet3]]) -> Jet3:
    size = len(m)
    if size == 1:
        return m[0][0]
    if size == 2:
        return m[0][0] * m[1][1] - m[0][1] * m[1][0]
    total = None
    for j in range(size):
        minor = [row[:j] + row[j + 1:] for row in m[1:]]
        term = m[0][j] * _cofactor_det(minor)
        if j % 2:
            term = -term
        total = term if total is None else total + term
    return total


def _lu_det(m: list[list[Jet3]]) -> Jet3:
    size = len(m)
    m = [row[:] for row in m]
    det = Jet3.constant(m[0][0].n, 1.0)
    for col in range(size):
        piv = max(range(col, size), key=lambda r: abs(m[r][col].value))
        if abs(m[piv][col].value) <= _TINY:
            raise SingularPointError("jet matrix is singular at the base point")
        if piv != col:
            m[col], m[piv] = m[piv], m[col]
            det = -det
        det = det * m[col][col]
        inv = m[col][col].reciprocal()
        for r in range(col + 1, size):
            factor = m[r][col] * inv
            for c in range(col + 1, size):
                m[r][c] = m[r][c] - factor * m[col][c]
    return det
