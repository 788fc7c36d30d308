"""
Reproducible verification suites with pass / fail / flagged-discrepancy cases.

Hard cases fail loudly.  Cases in flag mode carry an open-question id
(``OQ-1``: the h supremum, ``OQ-2``: the restricted Roper-Suffridge maximizer
and the ball constant that rests on both) and are reported as
``flagged-discrepancy`` instead of ``fail`` when the measurement contradicts
the reference.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import DomainError, SingularPointError
from .maps import (
    Composition,
    Coordinatewise,
    HolomorphicMap,
    Linear,
    OneD,
    RoperSuffridge,
    moebius_from_matrix,
    one_d,
    roper_suffridge,
)
from .norms import (
    GridSpec,
    cs_bound,
    domain_sup,
    h_function,
    optimize_h,
    pointwise_norm,
    restricted_axis_norm,
    rs_closed_form,
    rs_prefactor,
    theorem1_bound,
    theorem2_constant,
)
from .tensor import (
    canonical_trace_residual,
    chain_rule_residual,
    local_data,
    operator_apply,
    pde_residual,
    pre_schwarzian_1d,
    schwarzian_1d,
    schwarzian_tensor,
)

PROVENANCE = ("PAPER", "DERIVED", "TRIVIAL")
STATUSES = ("pass", "fail", "flagged-discrepancy")
OPEN_QUESTIONS = ("OQ-1", "OQ-2")
CSV_COLUMNS = ("suite", "case", "measured", "reference", "provenance", "tolerance", "status")

TOL_IDENTITY = 1e-9
TOL_PDE = 1e-7


@dataclass
class Case:
    """One comparison.  ``kind`` is ``eq`` (|m - r| <= tol) or ``le`` (m <= r + tol)."""

    suite: str
    case: str
    measured: float
    reference: float
    provenance: str
    tolerance: float
    kind: str = "eq"
    oq: str | None = None
    criterion: int | None = None
    status: str = field(init=False)

    def __post_init__(self):
        if self.provenance not in PROVENANCE:
            raise ValueError(f"case {self.case!r} needs a provenance tag from {PROVENANCE}")
        if self.oq is not None and self.oq not in OPEN_QUESTIONS:
            raise ValueError(f"unknown open question {self.oq!r}")
        self.measured = float(self.measured)
        self.reference = float(self.reference)
        if self.kind == "eq":
            ok = abs(self.measured - self.reference) <= self.tolerance
        elif self.kind == "le":
            ok = self.measured <= self.reference + self.tolerance
        else:
            raise ValueError(f"unknown comparison kind {self.kind!r}")
        if ok:
            self.status = "pass"
        else:
            self.status = "flagged-discrepancy" if self.oq else "fail"

    def row(self) -> list[str]:
        return [
            self.suite,
            self.case,
            _fmt(self.measured),
            _fmt(self.reference),
            self.provenance,
            _fmt(self.tolerance),
            self.status,
        ]


def _fmt(x: float) -> str:
    return repr(float(x))


@dataclass
class VerifyReport:
    suite: str
    cases: list = field(default_factory=list)
    environment: dict = field(default_factory=dict)

    def add(self, case: str, measured, reference, provenance: str, tolerance: float, **kw) -> Case:
        c = Case(self.suite, case, measured, reference, provenance, tolerance, **kw)
        self.cases.append(c)
        return c

    @property
    def hard_failures(self) -> list[Case]:
        return [c for c in self.cases if c.status == "fail"]

    @property
    def flagged(self) -> list[Case]:
        return [c for c in self.cases if c.status == "flagged-discrepancy"]

    def for_criterion(self, k: int) -> list[Case]:
        return [c for c in self.cases if c.criterion == k]

    def to_dict(self) -> dict:
        return {
            "suite": self.suite,
            "environment": self.environment,
            "cases": [asdict(c) for c in self.cases],
        }


def reports_to_csv(reports: list[VerifyReport]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for rep in reports:
        for c in rep.cases:
            w.writerow(c.row())
    return buf.getvalue()


def reports_to_json(reports: list[VerifyReport]) -> str:
    return json.dumps([r.to_dict() for r in reports], indent=2, sort_keys=True) + "\n"


# ---------------------------------------------------------------------------
# sampling


@dataclass(frozen=True)
class SamplePlan:
    """Sample counts and grids for every suite (defaults match the acceptance criteria)."""

    seed: int = 0
    moebius_maps: int = 50
    moebius_points: int = 20
    chain_pairs: int = 50
    pde_pairs: int = 30
    degenerate_samples: int = 20
    route_samples: int = 30
    theorem1_maps: int = 5
    theorem1_grid: GridSpec = GridSpec(resolution=4, phases=3, radial_bias=2.0, max_points=64)
    sharpness_t: float = 1 - 1e-3
    rs_structure_points: int = 20
    rs_identity_points: int = 100
    rs_generic_points: int = 10
    theorem2_grid: GridSpec = GridSpec(resolution=3, phases=3, radial_bias=2.0, max_points=48, ray_steps=8)
    h_resolution: int = 400
    convexity_samples: int = 1000
    tol_identity: float = TOL_IDENTITY
    tol_pde: float = TOL_PDE

    def environment(self) -> dict:
        return asdict(self)


QUICK_PLAN = SamplePlan(
    moebius_maps=6,
    moebius_points=4,
    chain_pairs=6,
    pde_pairs=6,
    degenerate_samples=6,
    route_samples=6,
    theorem1_maps=2,
    theorem1_grid=GridSpec(resolution=3, phases=2, max_points=16),
    rs_structure_points=5,
    rs_identity_points=10,
    rs_generic_points=3,
    theorem2_grid=GridSpec(resolution=2, phases=2, max_points=8, ray_steps=5),
    h_resolution=100,
    convexity_samples=100,
)


def random_point(rng: np.random.Generator, domain: str, n: int, rmax: float = 0.9) -> np.ndarray:
    if domain in ("polydisk", "disk"):
        r = rmax * np.sqrt(rng.uniform(size=n))
        return r * np.exp(2j * np.pi * rng.uniform(size=n))
    d = rng.normal(size=n) + 1j * rng.normal(size=n)
    d /= np.linalg.norm(d)
    return rmax * rng.uniform() ** (1 / (2 * n)) * d


def random_convex_one_d(rng: np.random.Generator) -> OneD:
    names = ["identity", "half_plane", "cayley", "strip", "log_map", "precomposed"]
    name = names[rng.integers(len(names))]
    if name != "precomposed":
        return one_d(name)
    base = one_d(["half_plane", "cayley", "strip", "log_map"][rng.integers(4)])
    a = 0.6 * np.sqrt(rng.uniform()) * np.exp(2j * np.pi * rng.uniform())
    return one_d("precomposed", base=base, a=a)


def random_one_d(rng: np.random.Generator) -> OneD:
    """Convex registry entry or a small locally univalent polynomial."""
    if rng.uniform() < 0.25:
        c2, c3 = 0.2 * (rng.normal(size=2) + 1j * rng.normal(size=2))
        return one_d("polynomial", coeffs=(0.0, 1.0, c2, c3))
    return random_convex_one_d(rng)


def random_moebius(rng: np.random.Generator, n: int, scale: float = 0.2):
    A = np.eye(n + 1) + scale * (rng.normal(size=(n + 1, n + 1)) + 1j * rng.normal(size=(n + 1, n + 1)))
    return moebius_from_matrix(A)


def random_map(rng: np.random.Generator, n: int) -> HolomorphicMap:
    kind = rng.integers(4)
    if kind == 0:
        return Coordinatewise(tuple(random_one_d(rng) for _ in range(n)))
    if kind == 1:
        return roper_suffridge(random_convex_one_d(rng), n)
    if kind == 2:
        M = np.eye(n) + 0.3 * (rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)))
        return Composition(Linear(M), Coordinatewise(tuple(random_one_d(rng) for _ in range(n))))
    return random_moebius(rng, n)


def _map_domain(f: HolomorphicMap) -> str:
    return "ball" if f.domain == "cn" else f.domain


# ---------------------------------------------------------------------------
# suites


def verify_identities(plan: SamplePlan = SamplePlan()) -> VerifyReport:
    rep = VerifyReport("identities", environment=plan.environment())
    rng = np.random.default_rng([plan.seed, 1])
    trace_max: dict[str, float] = {}
    symmetry_max = 0.0

    def note_trace(label, t):
        nonlocal symmetry_max
        trace_max[label] = max(trace_max.get(label, 0.0), canonical_trace_residual(t))
        symmetry_max = max(symmetry_max, t.symmetry_residual())

    # Moebius maps have a vanishing tensor
    for m in range(plan.moebius_maps):
        n = 2 if m % 2 == 0 else 3
        M = random_moebius(rng, n)
        worst = 0.0
        for _ in range(plan.moebius_points):
            z = random_point(rng, "ball", n)
            t = schwarzian_tensor(M, z)
            note_trace("moebius", t)
            worst = max(worst, t.max_abs())
        rep.add(f"moebius vanishing #{m} n={n}", worst, 0.0, "PAPER", plan.tol_identity, criterion=1)

    # chain rule and Moebius invariance
    done = 0
    while done < plan.chain_pairs:
        n = 2 if done % 2 == 0 else 3
        f = random_map(rng, n)
        z = random_point(rng, _map_domain(f), n, rmax=0.6)
        g = random_map(rng, n) if done % 3 else random_moebius(rng, n)
        try:
            res = chain_rule_residual(f, g, z)
        except (DomainError, SingularPointError):
            continue
        rep.add(f"chain rule #{done} n={n}", res, 0.0, "DERIVED", 1e-8, criterion=2)
        gm = random_moebius(rng, n)
        try:
            diff = np.max(np.abs(
                schwarzian_tensor(Composition(gm, f), z).upper - schwarzian_tensor(f, z).upper
            ))
        except SingularPointError:
            continue
        rep.add(f"moebius invariance #{done} n={n}", diff, 0.0, "PAPER", plan.tol_identity, criterion=2)
        done += 1

    # PDE system solutions u0 and u_i = f_i u0
    for p in range(plan.pde_pairs):
        n = 2 + p % 2
        f = random_map(rng, n)
        z = random_point(rng, _map_domain(f), n, rmax=0.8)
        t = schwarzian_tensor(f, z)
        note_trace(type(f).__name__.lower(), t)
        worst = max(pde_residual(f, z, w) for w in range(n + 1))
        rep.add(f"pde u0..u{n} #{p} n={n}", worst, 0.0, "PAPER", plan.tol_pde, criterion=4)

    # route equivalence and quadratic homogeneity
    route, homog = 0.0, 0.0
    for _ in range(plan.route_samples):
        n = int(rng.integers(2, 4))
        f = random_map(rng, n)
        z = random_point(rng, _map_domain(f), n, rmax=0.8)
        v = rng.normal(size=n) + 1j * rng.normal(size=n)
        data = local_data(f, z)
        t = schwarzian_tensor(f, z, data=data)
        note_trace(type(f).__name__.lower(), t)
        a, b = t.apply(v), operator_apply(data, v)
        route = max(route, float(np.max(np.abs(a - b)) / max(1.0, np.max(np.abs(a)))))
        lam = complex(rng.normal(), rng.normal())
        homog = max(homog, float(np.max(np.abs(t.apply(lam * v) - lam**2 * a)) / max(1.0, abs(lam) ** 2 * np.max(np.abs(a)))))
    rep.add("tensor route vs operator formula", route, 0.0, "DERIVED", 1e-10)
    rep.add("quadratic homogeneity", homog, 0.0, "TRIVIAL", 1e-12)
    rep.add("symmetry S^k_ij = S^k_ji", symmetry_max, 0.0, "TRIVIAL", 1e-11)

    for label in sorted(trace_max):
        rep.add(f"canonical trace ({label})", trace_max[label], 0.0, "PAPER", 1e-10, criterion=3)

    # n = 1: the tensor vanishes identically
    worst = 0.0
    for _ in range(plan.degenerate_samples):
        phi = random_one_d(rng)
        z = random_point(rng, "disk", 1, rmax=0.8)
        worst = max(worst, float(np.max(np.abs(schwarzian_tensor(phi, z).upper))))
    rep.add("n=1 tensor vanishes", worst, 0.0, "PAPER", 1e-12, criterion=5)
    return rep


def theorem1_maps(rng: np.random.Generator, n: int, count: int) -> list[Coordinatewise]:
    """Extremal product, strip product, then random mixed / precomposed products."""
    maps = [
        Coordinatewise(tuple(one_d("cayley") for _ in range(n))),
        Coordinatewise(tuple(one_d("strip") for _ in range(n))),
    ]
    while len(maps) < count:
        maps.append(Coordinatewise(tuple(random_convex_one_d(rng) for _ in range(n))))
    return maps[:count]


def verify_theorem1(n: int, plan: SamplePlan = SamplePlan()) -> VerifyReport:
    if not 2 <= n <= 8:
        raise ValueError("theorem1 suite needs 2 <= n <= 8")
    rep = VerifyReport(f"theorem1_n{n}", environment=plan.environment())
    rng = np.random.default_rng([plan.seed, 2, n])
    bound = theorem1_bound(n)
    published = {2: 2.1081, 3: 2.4495}
    if n in published:
        rep.add(f"bound value n={n}", bound, published[n], "PAPER", 1e-4, criterion=6)
    for m in range(2, 9):
        rep.add(f"bound below sqrt(8) n={m}", theorem1_bound(m), math.sqrt(8), "PAPER", 0.0, kind="le")

    from .norms import grid_points

    pts = grid_points("polydisk", n, plan.theorem1_grid)
    for idx, f in enumerate(theorem1_maps(rng, n, plan.theorem1_maps)):
        worst, cs_excess = 0.0, -np.inf
        for z in pts:
            r = pointwise_norm(f, z, starts=8, probes=1024, seed=plan.seed)
            worst = max(worst, r.value)
            cs_excess = max(cs_excess, r.value - cs_bound(f, z).cs_bound)
        name = "+".join(c.fn_id for c in f.components)
        rep.add(f"bound over grid map#{idx} ({name})", worst, bound, "PAPER", 1e-6, kind="le", criterion=6)
        rep.add(f"norm <= cs_bound map#{idx} ({name})", cs_excess, 0.0, "PAPER", 1e-8, kind="le", criterion=8)

    # sharpness along the extremal ray
    ext = Coordinatewise(tuple(one_d("cayley") for _ in range(n)))
    ts = [1 - 10.0**-k for k in (1, 2, 3)]
    vals = [pointwise_norm(ext, [t] * n, seed=plan.seed).value for t in ts]
    decreases = sum(b < a - 1e-12 for a, b in zip(vals, vals[1:]))
    rep.add("extremal ray increasing", decreases, 0, "PAPER", 0.0, criterion=7)
    t = plan.sharpness_t
    val = pointwise_norm(ext, [t] * n, seed=plan.seed).value
    rep.add(f"extremal norm at t={t:g} within 1% of bound", val, bound, "PAPER", 0.01 * bound, criterion=7)
    q = cs_bound(ext, [t] * n)
    rep.add(f"cs_bound at t={t:g} within 1% of bound", q.cs_bound, bound, "PAPER", 0.01 * bound)
    off, on = abs(q.a[0, 1]), abs(q.a[0, 0])
    rep.add("|a_i| -> 8/(n+1)", off, 8 / (n + 1), "PAPER", 0.005 * 8 / (n + 1), criterion=7)
    rep.add("|a_k| -> 4(n-1)/(n+1)", on, 4 * (n - 1) / (n + 1), "PAPER", 0.005 * 4 * (n - 1) / (n + 1), criterion=7)
    return rep


def rs_structure_error(f: RoperSuffridge, z) -> float:
    """Max deviation of S^k f from the closed form (1/2) z_k S_phi(z_1) E_11."""
    z = np.asarray(z, dtype=complex)
    t = schwarzian_tensor(f, z)
    expected = np.zeros_like(t.upper)
    s = schwarzian_1d(f.base, z[0])
    for k in range(1, f.n):
        expected[k, 0, 0] = 0.5 * z[k] * s
    return float(np.max(np.abs(t.upper - expected)))


DEFAULT_RS_BASES = (
    one_d("strip"),
    one_d("log_map"),
    one_d("precomposed", base=one_d("strip"), a=0.4j),
)


def _label(phi: OneD) -> str:
    if phi.fn_id == "precomposed":
        return f"precomposed({phi.base.fn_id}, a={phi.a})"
    return phi.fn_id


def verify_theorem2(n: int, bases=DEFAULT_RS_BASES, plan: SamplePlan = SamplePlan()) -> VerifyReport:
    if not 2 <= n <= 8:
        raise ValueError("theorem2 suite needs 2 <= n <= 8")
    rep = VerifyReport(f"theorem2_n{n}", environment=plan.environment())
    rng = np.random.default_rng([plan.seed, 3, n])
    const = theorem2_constant(n)
    if n == 2:
        rep.add("constant value n=2", const, 2 / 9, "PAPER", 1e-15)

    for phi in bases:
        name = _label(phi)
        f = roper_suffridge(phi, n)
        worst = 0.0
        for _ in range(plan.rs_structure_points):
            worst = max(worst, rs_structure_error(f, random_point(rng, "ball", n)))
        crit = 9 if name in ("strip", "log_map") else None
        rep.add(f"S^k matrices closed form ({name})", worst, 0.0, "PAPER", 1e-10, criterion=crit)

        direct_err, fact_err = 0.0, 0.0
        for _ in range(plan.rs_identity_points):
            z = random_point(rng, "ball", n)
            closed = rs_closed_form(f.base, z, n)
            direct = restricted_axis_norm(f, z)
            direct_err = max(direct_err, abs(closed.value - direct.value))
            x, y = abs(z[0]) ** 2, float(np.sum(np.abs(z[1:]) ** 2))
            fact = rs_prefactor(f.base, z[0], n) * float(h_function(x, y))
            fact_err = max(fact_err, abs(direct.value**2 - fact))
        rep.add(f"restricted closed form vs direct ({name})", direct_err, 0.0, "DERIVED", 1e-10, criterion=10)
        rep.add(f"factorized identity ({name})", fact_err, 0.0, "DERIVED", 1e-10, criterion=10)

        gap = 0.0
        for _ in range(plan.rs_generic_points):
            z = random_point(rng, "ball", n)
            r = pointwise_norm(f, z, starts=8, probes=1024, seed=plan.seed)
            gap = max(gap, (r.value - r.restricted_value) / max(r.value, 1e-8))
        rep.add(f"generic vs restricted maximizer ({name})", gap, 0.0, "PAPER", 1e-6, kind="le", oq="OQ-2", criterion=11)

        sup = domain_sup(f, "ball", plan.theorem2_grid, rays=("z2", "hpath", "diagonal"), seed=plan.seed)
        rep.add(f"domain sup vs constant ({name})", sup.sup, const, "PAPER", 1e-9, kind="le", oq="OQ-2", criterion=11)
        rep.add(f"restricted-only sup vs constant ({name})",
                max(rs_closed_form(f.base, r.z, n).value for r in sup.rows),
                const, "PAPER", 1e-9, kind="le", oq="OQ-1", criterion=11)

    moeb = roper_suffridge(one_d("half_plane"), n)
    sup = domain_sup(moeb, "ball", plan.theorem2_grid, rays=("z2",), seed=plan.seed)
    rep.add("Moebius base domain sup", sup.sup, 0.0, "TRIVIAL", 1e-12)

    h = optimize_h(plan.h_resolution)
    rep.add("h(x, 0) = 0", h.slice_y0_max, 0.0, "TRIVIAL", 1e-15, criterion=11)
    rep.add("h(0, y) = y", h.slice_x0_error, 0.0, "DERIVED", 1e-12, criterion=11)
    for item in h.hpath:
        rep.add(f"h(1-t, t/3) at t={item['t']:g}", item["value"], item["expected"], "DERIVED", 1e-10, criterion=11)
    rep.add("h supremum vs 4/27", h.sup_estimate, h.claimed, "PAPER", 1e-9, kind="le", oq="OQ-1", criterion=11)
    return rep


def radial_samples(rng: np.random.Generator, count: int, rmax: float = 1 - 1e-6) -> np.ndarray:
    r = rmax * (1 - rng.uniform(size=count) ** 3)
    return r * np.exp(2j * np.pi * rng.uniform(size=count))


CONVEXITY_SET = (
    ("identity", {}),
    ("half_plane", {}),
    ("cayley", {}),
    ("strip", {}),
    ("log_map", {}),
    ("precomposed", {"base": one_d("strip"), "a": 0.5j}),
    ("precomposed", {"base": one_d("cayley"), "a": -0.3 + 0.2j}),
)


def verify_convexity(plan: SamplePlan = SamplePlan()) -> VerifyReport:
    rep = VerifyReport("convexity", environment=plan.environment())
    rng = np.random.default_rng([plan.seed, 4])
    for name, params in CONVEXITY_SET:
        phi = one_d(name, **params)
        label = name if not params else f"{name}({params['base'].fn_id}, a={params['a']})"
        zs = radial_samples(rng, plan.convexity_samples)
        pre = max(abs(pre_schwarzian_1d(phi, z)) * (1 - abs(z) ** 2) for z in zs)
        sch = max(abs(schwarzian_1d(phi, z)) * (1 - abs(z) ** 2) ** 2 for z in zs)
        rep.add(f"pre-Schwarzian bound ({label})", pre, 4.0, "PAPER", 1e-9, kind="le", criterion=12)
        rep.add(f"Schwarzian norm bound ({label})", sch, 2.0, "PAPER", 1e-9, kind="le", criterion=12)
    strip0 = abs(schwarzian_1d(one_d("strip"), 0.0))
    rep.add("strip attains 2 at the origin", strip0, 2.0, "PAPER", 1e-6, criterion=12)
    r = 1 - 1e-3
    rep.add("half_plane pre-Schwarzian at r", abs(pre_schwarzian_1d(one_d("half_plane"), r)) * (1 - r * r),
            2 * (1 + r), "DERIVED", 1e-12)
    ident = one_d("identity")
    rep.add("identity quantities vanish", abs(pre_schwarzian_1d(ident, 0.5)) + abs(schwarzian_1d(ident, 0.5)),
            0.0, "TRIVIAL", 0.0)
    return rep


SUITES = ("identities", "theorem1", "theorem2", "convexity", "all")


def run_suites(suite: str, ns=(2, 3), plan: SamplePlan = SamplePlan()) -> list[VerifyReport]:
    if suite not in SUITES:
        raise ValueError(f"unknown suite {suite!r}; choose from {SUITES}")
    out = []
    if suite in ("identities", "all"):
        out.append(verify_identities(plan))
    if suite in ("theorem1", "all"):
        out.extend(verify_theorem1(n, plan) for n in ns)
    if suite in ("theorem2", "all"):
        out.extend(verify_theorem2(n, plan=plan) for n in ns)
    if suite in ("convexity", "all"):
        out.append(verify_convexity(plan))
    return out
