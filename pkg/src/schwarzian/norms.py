"""
Operator norms of the Schwarzian tensor in the Bergman metric.

The pointwise norm is sup ||S_f(z)(v, v)|| over Bergman-unit v.  With the
whitener A (A^H G A = I) the constraint becomes the Euclidean unit sphere,
v = A u, and the objective F(u) = ||S(Au, Au)||_G^2 is a real quartic form
maximized by multi-start projected gradient ascent.  The gradient is the
analytic Wirtinger one: for w = S(v, v) and q = G w,

    dF/dv_c = 2 * sum_b conj(q_b) (S^b v)_c .
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize
from scipy.stats import qmc

from .bergman import MetricAtPoint, bergman_norm, metric_at
from .errors import SchwarzianError
from .maps import DEFAULT_MARGIN, Coordinatewise, HolomorphicMap, OneD, RoperSuffridge, as_point, in_domain
from .tensor import SchwarzianTensor, pre_schwarzian_1d, schwarzian_1d, schwarzian_tensor

H_CLAIM = 4.0 / 27.0
DISCREPANCY_RTOL = 1e-6
# norms below this are rounding noise of a vanishing tensor
ABS_FLOOR = 1e-12


def theorem1_bound(n: int) -> float:
    """sqrt(8 (n+3)(n-1)) / (n+1): the coordinatewise convex polydisk bound."""
    return math.sqrt(8 * (n + 3) * (n - 1)) / (n + 1)


def theorem2_constant(n: int) -> float:
    """2 / (3 sqrt(3 (n+1))): the claimed Roper-Suffridge ball bound."""
    return 2.0 / (3.0 * math.sqrt(3 * (n + 1)))


@dataclass
class NormReport:
    value: float
    witness_v: np.ndarray
    method: str
    starts_used: int = 0
    converged: bool = True
    restricted_value: float | None = None
    discrepancy: bool = False


def metric_domain(f: HolomorphicMap, domain: str | None = None) -> str:
    domain = domain or f.domain
    if domain == "disk":
        return "polydisk"
    if domain not in ("polydisk", "ball"):
        raise SchwarzianError(f"no Bergman metric on {domain!r}; pass domain='polydisk' or 'ball'")
    return domain


def _objective(S: np.ndarray, G: np.ndarray, V: np.ndarray) -> np.ndarray:
    W = np.einsum("kij,mi,mj->mk", S, V, V)
    return np.real(np.einsum("mk,kl,ml->m", W.conj(), G, W))


def _value(S, G, v) -> float:
    w = np.einsum("kij,i,j->k", S, v, v)
    return float(np.real(w.conj() @ G @ w))


def _gradient(S, G, A, u) -> np.ndarray:
    """d with dF = 2 Re <d, du> for F(u) = ||S(Au, Au)||_G^2 (Wirtinger calculus)."""
    v = A @ u
    w = np.einsum("kij,i,j->k", S, v, v)
    Sv = np.einsum("kij,j->ki", S, v)
    dv = 2.0 * (G @ w).conj() @ Sv
    return A.conj().T @ dv.conj()


def _ascend(S, G, A, u, max_iter: int, rtol: float) -> tuple[np.ndarray, float, bool]:
    u = u / np.linalg.norm(u)
    F = _value(S, G, A @ u)
    step = None
    for _ in range(max_iter):
        d = _gradient(S, G, A, u)
        d -= np.real(np.vdot(u, d)) * u
        dn = np.linalg.norm(d)
        if dn <= 1e-300 or F <= 0:
            return u, F, True
        if step is None:
            step = 0.25 / dn
        while True:
            trial = u + step * d
            trial /= np.linalg.norm(trial)
            Ft = _value(S, G, A @ trial)
            if Ft > F:
                break
            step *= 0.5
            if step * dn < 1e-15:
                return u, F, True
        improvement = Ft - F
        u, F = trial, Ft
        step *= 2.0
        if improvement <= rtol * F:
            return u, F, True
    return u, F, False


def _fix_phase(v: np.ndarray) -> np.ndarray:
    k = int(np.argmax(np.abs(v)))
    if abs(v[k]) == 0:
        return v
    return v * (abs(v[k]) / v[k])


def maximize_on_sphere(
    S: np.ndarray,
    metric: MetricAtPoint,
    *,
    starts: int = 16,
    probes: int | None = None,
    seed: int = 0,
    extra: list | None = None,
    max_iter: int = 400,
    rtol: float = 1e-12,
) -> NormReport:
    """Maximize ||S(v, v)||_G over v^H G v = 1.

    Candidates are ``probes`` random sphere points, the whitened coordinate
    axes and any ``extra`` vectors (in v coordinates); gradient ascent is run
    from the best ``starts`` of them.
    """
    n = metric.n
    G, A = metric.G, metric.whitener
    if probes is None:
        probes = 4096 if n <= 3 else 512 * n
    rng = np.random.default_rng(seed)
    U = rng.normal(size=(probes, n)) + 1j * rng.normal(size=(probes, n))
    cand = [np.eye(n, dtype=complex)]
    if extra:
        Ainv = np.linalg.inv(A)
        cand.append(np.array([Ainv @ np.asarray(e, dtype=complex) for e in extra]))
    U = np.vstack(cand + [U])
    U /= np.linalg.norm(U, axis=1, keepdims=True)
    F = _objective(S, G, U @ A.T)
    order = np.argsort(-F, kind="stable")[:starts]
    best_u, best_F, any_conv = U[order[0]], F[order[0]], False
    for idx in order:
        u, Fu, conv = _ascend(S, G, A, U[idx], max_iter, rtol)
        any_conv |= conv
        if Fu > best_F:
            best_u, best_F = u, Fu
    v = _fix_phase(A @ best_u)
    return NormReport(
        value=float(np.sqrt(max(best_F, 0.0))),
        witness_v=v,
        method="generic_opt",
        starts_used=len(order),
        converged=bool(any_conv),
    )


def pointwise_norm(
    f: HolomorphicMap,
    z,
    domain: str | None = None,
    *,
    starts: int = 16,
    probes: int | None = None,
    seed: int = 0,
    tensor: SchwarzianTensor | None = None,
    margin: float = DEFAULT_MARGIN,
) -> NormReport:
    """||S_f(z)|| in the Bergman metric of ``domain`` (default: the map's own)."""
    z = as_point(z, f.dimension)
    domain = metric_domain(f, domain)
    metric = metric_at(domain, z, margin)
    if tensor is None:
        tensor = schwarzian_tensor(f, z, margin)
    restricted = None
    extra = None
    if isinstance(f, RoperSuffridge) and domain == "ball":
        restricted = restricted_axis_norm(f, z, tensor=tensor, metric=metric)
        extra = [restricted.witness_v]
    rep = maximize_on_sphere(tensor.upper, metric, starts=starts, probes=probes, seed=seed, extra=extra)
    if restricted is not None:
        rep.restricted_value = restricted.value
        scale = max(rep.value, restricted.value)
        rep.discrepancy = abs(rep.value - restricted.value) > DISCREPANCY_RTOL * scale + ABS_FLOOR
        if restricted.value > rep.value:
            rep.value, rep.witness_v, rep.method = restricted.value, restricted.witness_v, "restricted_axis"
    return rep


# ---------------------------------------------------------------------------
# polydisk proof quantities


@dataclass
class ProofQuantities:
    """Quantities of the coordinatewise estimate at a point.

    ``a[k, i]`` is the coefficient a_i in the rewritten form of m_k;
    ``delta`` and ``m`` are filled when a vector is supplied.
    """

    z: np.ndarray
    pre: np.ndarray
    a: np.ndarray
    cs_bound: float
    delta: np.ndarray | None = None
    m: np.ndarray | None = None


def cs_bound(f: HolomorphicMap, z, v=None) -> ProofQuantities:
    if not isinstance(f, Coordinatewise):
        raise SchwarzianError("cs_bound applies to coordinatewise polydisk maps only")
    z = as_point(z, f.dimension)
    n = len(z)
    pre = np.array([pre_schwarzian_1d(phi, zi) for phi, zi in zip(f.components, z)])
    weight = pre * (1.0 - np.abs(z) ** 2)
    a = np.tile(-2.0 / (n + 1) * weight, (n, 1))
    a[np.diag_indices(n)] = (n - 1) / (n + 1) * weight
    bound = float(np.max(np.linalg.norm(a, axis=1)) / np.sqrt(2.0))
    out = ProofQuantities(z, pre, a, bound)
    if v is not None:
        v = np.asarray(v, dtype=complex)
        out.delta = pre * v - 2.0 / (n + 1) * np.sum(pre * v)
        out.m = a @ (v / (1.0 - np.abs(z) ** 2))
    return out


# ---------------------------------------------------------------------------
# Roper-Suffridge restricted axis


def h_function(x, y):
    """(1-x-y)^2 y / ((1-x)^3 (1-y)^2)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        return (1 - x - y) ** 2 * y / ((1 - x) ** 3 * (1 - y) ** 2)


def rs_prefactor(phi: OneD, z1: complex, n: int) -> float:
    """|S_phi(z1)|^2 (1-|z1|^2)^4 / (4 (n+1))."""
    s = schwarzian_1d(phi, z1)
    return abs(s) ** 2 * (1 - abs(z1) ** 2) ** 4 / (4 * (n + 1))


def rs_closed_form(phi: OneD, z, n: int) -> NormReport:
    """Restricted-axis norm from the factorized expression (no tensor needed)."""
    z = as_point(z, n)
    x = abs(z[0]) ** 2
    y = float(np.sum(np.abs(z[1:]) ** 2))
    if not x + y < 1:
        raise SchwarzianError(f"{z} is not in the ball")
    s = schwarzian_1d(phi, z[0])
    value2 = abs(s) ** 2 * (1 - x) * y * (1 - x - y) ** 2 / (4 * (n + 1) * (1 - y) ** 2)
    v1 = (1 - x - y) / np.sqrt((n + 1) * (1 - y))
    witness = np.zeros(n, dtype=complex)
    witness[0] = v1
    return NormReport(float(np.sqrt(value2)), witness, "restricted_axis")


def restricted_axis_norm(
    f: HolomorphicMap,
    z,
    *,
    tensor: SchwarzianTensor | None = None,
    metric: MetricAtPoint | None = None,
) -> NormReport:
    """||S_f(z)(v, v)|| for v = e_1 / ||e_1||, evaluated from the tensor."""
    z = as_point(z, f.dimension)
    metric = metric or metric_at("ball", z)
    tensor = tensor or schwarzian_tensor(f, z)
    e1 = np.zeros(len(z), dtype=complex)
    e1[0] = 1.0
    v = e1 / bergman_norm(metric, e1)
    return NormReport(bergman_norm(metric, tensor.apply(v)), v, "restricted_axis")


# ---------------------------------------------------------------------------
# suprema over domains


@dataclass(frozen=True)
class GridSpec:
    """Deterministic interior grid.

    Each complex coordinate takes the origin plus ``resolution - 1`` radii
    r_j = 1 - (1 - j/resolution)^radial_bias times ``phases`` angles; the
    full product is used when it has at most ``max_points`` points, otherwise
    the first ``max_points`` points of an unscrambled Halton sequence mapped
    through the same radial law.  Points closer than ``margin`` to the
    boundary are dropped.  Rays are sampled at t = 1 - 2^-m, m = 1..ray_steps.
    """

    resolution: int = 4
    radial_bias: float = 1.0
    margin: float = 1e-9
    phases: int = 4
    max_points: int = 512
    ray_steps: int = 10

    def to_dict(self) -> dict:
        return dict(
            resolution=self.resolution,
            radial_bias=self.radial_bias,
            margin=self.margin,
            phases=self.phases,
            max_points=self.max_points,
            ray_steps=self.ray_steps,
        )


def grid_points(domain: str, n: int, grid: GridSpec) -> np.ndarray:
    if grid.resolution < 1:
        raise ValueError("grid resolution must be >= 1")
    j = np.arange(1, grid.resolution)
    radii = 1.0 - (1.0 - j / grid.resolution) ** grid.radial_bias
    angles = 2 * np.pi * np.arange(grid.phases) / grid.phases
    axis = np.concatenate([[0.0], (radii[:, None] * np.exp(1j * angles)[None, :]).ravel()])
    if len(axis) ** n <= grid.max_points:
        mesh = np.meshgrid(*([axis] * n), indexing="ij")
        pts = np.stack([m.ravel() for m in mesh], axis=1)
    else:
        h = qmc.Halton(d=2 * n, scramble=False).random(grid.max_points + 1)[1:]
        r = 1.0 - (1.0 - h[:, :n]) ** grid.radial_bias
        pts = r * np.exp(2j * np.pi * h[:, n:])
    if domain == "ball":
        # the polydisk product does not fit in the ball; shrink radially
        pts = pts / np.sqrt(n)
    keep = [in_domain(domain, p, grid.margin) for p in pts]
    return pts[np.array(keep, dtype=bool)]


RAYS = ("diagonal", "z1", "z2", "hpath")


def ray_point(name: str, domain: str, n: int, t: float) -> np.ndarray:
    z = np.zeros(n, dtype=complex)
    if name == "diagonal":
        z[:] = t / np.sqrt(n) if domain == "ball" else t
    elif name == "z1":
        z[0] = t
    elif name == "z2":
        if n < 2:
            raise ValueError("ray z2 needs n >= 2")
        z[1] = t
    elif name == "hpath":
        if n < 2:
            raise ValueError("ray hpath needs n >= 2")
        # |z1|^2 = t, sum_{i>=2} |z_i|^2 = (1 - t)/3
        z[0] = np.sqrt(t)
        z[1] = np.sqrt((1 - t) / 3)
    else:
        raise ValueError(f"unknown ray {name!r}; choose from {RAYS}")
    return z


@dataclass
class SweepRow:
    source: str
    index: int
    z: np.ndarray
    value: float
    method: str
    flag: str = ""


@dataclass
class SupReport:
    sup: float
    witness_z: np.ndarray
    witness: SweepRow
    rows: list = field(default_factory=list)
    tails: dict = field(default_factory=dict)


def domain_sup(
    f: HolomorphicMap,
    domain: str | None = None,
    grid: GridSpec | None = None,
    rays=("diagonal",),
    *,
    seed: int = 0,
    starts: int = 8,
    probes: int | None = 1024,
) -> SupReport:
    """Maximum of the pointwise norm over an interior grid and boundary rays.

    Ties are broken by row order (grid rows first, then rays in the given
    order), so the reduction is schedule independent.
    """
    grid = grid or GridSpec()
    domain = metric_domain(f, domain)
    n = f.dimension
    rows: list[SweepRow] = []

    def evaluate(source: str, index: int, z: np.ndarray) -> SweepRow:
        rep = pointwise_norm(f, z, domain, starts=starts, probes=probes, seed=seed, margin=grid.margin)
        flag = "OQ-2" if rep.discrepancy else ""
        return SweepRow(source, index, z, rep.value, rep.method, flag)

    for idx, z in enumerate(grid_points(domain, n, grid)):
        rows.append(evaluate("grid", idx, z))
    tails = {}
    for name in rays:
        vals = []
        for m in range(1, grid.ray_steps + 1):
            t = 1.0 - 2.0**-m
            z = ray_point(name, domain, n, t)
            if not in_domain(domain, z, grid.margin):
                break
            row = evaluate(f"ray:{name}", m, z)
            rows.append(row)
            vals.append(row.value)
        diffs = np.diff(vals)
        tails[name] = {
            "values": vals,
            "monotone": bool(np.all(diffs >= -1e-12)) if len(vals) > 1 else True,
            "last": vals[-1] if vals else float("nan"),
            "last_increment": float(diffs[-1]) if len(diffs) else float("nan"),
        }
    values = np.array([r.value for r in rows])
    best = int(np.argmax(values))
    return SupReport(float(values[best]), rows[best].z, rows[best], rows, tails)


# ---------------------------------------------------------------------------
# h(x, y) oracle


@dataclass
class HReport:
    sup_estimate: float
    argmax: tuple
    grid_max: float
    claimed: float
    discrepancy: bool
    slice_y0_max: float
    slice_x0_error: float
    hpath: list


def optimize_h(resolution: int = 400, hpath_ts=(1e-1, 1e-2, 1e-3)) -> HReport:
    """Brute-force supremum of h over {x, y >= 0, x + y < 1}, with refinement.

    Also evaluates the slices h(x, 0), h(0, y) and h(1 - t, t/3) against their
    closed forms 0, y and (4/27)/(1 - t/3)^2.
    """
    if resolution < 100:
        raise ValueError("resolution must be >= 100")
    s = np.arange(resolution) / resolution
    X, Y = np.meshgrid(s, s, indexing="ij")
    mask = X + Y < 1
    H = np.where(mask, h_function(np.where(mask, X, 0), np.where(mask, Y, 0)), -np.inf)
    i, j = np.unravel_index(int(np.argmax(H)), H.shape)
    grid_max = float(H[i, j])
    x0 = np.array([X[i, j], Y[i, j]])

    res = minimize(
        lambda p: -float(h_function(p[0], p[1])),
        x0,
        method="SLSQP",
        bounds=[(0.0, 1.0), (0.0, 1.0)],
        constraints=[{"type": "ineq", "fun": lambda p: 1.0 - 1e-12 - p[0] - p[1]}],
    )
    refined = -float(res.fun) if res.success and res.x[0] + res.x[1] < 1 else -np.inf
    if refined > grid_max:
        sup, argmax = refined, (float(res.x[0]), float(res.x[1]))
    else:
        sup, argmax = grid_max, (float(x0[0]), float(x0[1]))

    slice_y0 = float(np.max(np.abs(h_function(s, 0.0))))
    slice_x0 = float(np.max(np.abs(h_function(0.0, s) - s)))
    hpath = []
    for t in hpath_ts:
        val = float(h_function(1 - t, t / 3))
        expected = H_CLAIM / (1 - t / 3) ** 2
        hpath.append({"t": t, "value": val, "expected": expected, "error": abs(val - expected)})
    return HReport(
        sup_estimate=sup,
        argmax=argmax,
        grid_max=grid_max,
        claimed=H_CLAIM,
        discrepancy=bool(sup > H_CLAIM * (1 + DISCREPANCY_RTOL)),
        slice_y0_max=slice_y0,
        slice_x0_error=slice_x0,
        hpath=hpath,
    )
