"""
Bergman metrics of the polydisk and the unit ball.

``MetricAtPoint.G`` is the Hermitian matrix of the quadratic form, so that
||v||^2 = v^H G v.  On the ball this means

    G = (n+1)/(1-|z|^2)^2 * [(1-|z|^2) I + z z^H],

i.e. ||v||^2 = (n+1)/(1-|z|^2)^2 * [(1-|z|^2)|v|^2 + |<v, z>|^2], the
automorphism-invariant form.  In the textbook notation g_ij with the factor
conj(z_i) z_j this reads ||v||^2 = sum_ij g_ij v_i conj(v_j); the transposed
pairing is not invariant and does not reproduce the Roper-Suffridge norm
reduction, see ``tests/test_bergman.py``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import SchwarzianError
from .maps import DEFAULT_MARGIN, as_point, check_domain


@dataclass(frozen=True)
class MetricAtPoint:
    domain: str
    z: np.ndarray
    G: np.ndarray

    @property
    def n(self) -> int:
        return len(self.z)

    @cached_property
    def whitener(self) -> np.ndarray:
        return whiten(self)

    def norm(self, v) -> float:
        return bergman_norm(self, v)


def metric_at(domain: str, z, margin: float = DEFAULT_MARGIN) -> MetricAtPoint:
    z = check_domain(domain, as_point(z), margin)
    n = len(z)
    if domain == "polydisk":
        G = np.diag(2.0 / (1.0 - np.abs(z) ** 2) ** 2).astype(complex)
    elif domain == "ball":
        s = 1.0 - float(np.sum(np.abs(z) ** 2))
        G = (n + 1) / s**2 * (s * np.eye(n) + np.outer(z, z.conj()))
    else:
        raise ValueError(f"no Bergman metric for domain {domain!r}")
    return MetricAtPoint(domain, z, G)


def bergman_norm(m: MetricAtPoint, v) -> float:
    v = np.asarray(v, dtype=complex)
    if v.shape != (m.n,):
        raise ValueError(f"vector of shape {v.shape} does not match dimension {m.n}")
    q = v.conj() @ m.G @ v
    # G is Hermitian, so the form is real up to rounding
    assert abs(q.imag) <= 1e-12 * max(1.0, abs(q.real)), q
    return float(np.sqrt(max(q.real, 0.0)))


def whiten(m: MetricAtPoint) -> np.ndarray:
    """Inverse Hermitian square root A of G, so that A^H G A = I."""
    lam, U = np.linalg.eigh(m.G)
    if not lam[0] > 0:
        raise SchwarzianError(f"metric is not positive definite (min eigenvalue {lam[0]:.3g})")
    return (U / np.sqrt(lam)) @ U.conj().T
