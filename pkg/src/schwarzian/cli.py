"""Command-line front end.

    schwarzian tensor --map moebius.json --at 0.1,0.2
    schwarzian norm --map cw.json --at 0.5:0.1,0 --seed 3
    schwarzian sweep --map rs_strip_n3.json --grid 64 --ray z1 --out sweep.csv
    schwarzian verify --suite theorem1 --n 2
    schwarzian selftest
    schwarzian --config run.json

Exit status: 0 success, 1 a hard verification case failed, 2 bad input.
Flagged discrepancies never change the exit status; they are summarized on
standard error.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError, SchwarzianError
from .maps import map_from_dict, map_to_dict, parse_complex
from .norms import RAYS, GridSpec, domain_sup, pointwise_norm
from .tensor import schwarzian_tensor
from .verify import QUICK_PLAN, SUITES, SamplePlan, reports_to_csv, reports_to_json, run_suites

SCHEMA_VERSION = 1
COMMANDS = ("tensor", "norm", "sweep", "verify", "selftest")
FORMATS = ("csv", "structured")


@dataclass
class RunConfig:
    command: str
    map: dict | None = None
    point: list | None = None
    grid: dict = field(default_factory=dict)
    rays: list = field(default_factory=list)
    n: list | None = None
    suite: str = "all"
    seed: int = 0
    tolerances: dict = field(default_factory=dict)
    output: str | None = None
    format: str = "csv"
    schema_version: int = SCHEMA_VERSION

    @classmethod
    def from_dict(cls, doc: dict) -> "RunConfig":
        if not isinstance(doc, dict):
            raise ConfigError("run configuration must be an object")
        known = {f.name for f in dataclasses.fields(cls)}
        extra = set(doc) - known
        if extra:
            raise ConfigError(f"unknown configuration field(s): {sorted(extra)}")
        if doc.get("schema_version", SCHEMA_VERSION) != SCHEMA_VERSION:
            raise ConfigError(f"unsupported schema_version {doc['schema_version']!r}")
        if "command" not in doc:
            raise ConfigError("configuration needs a 'command'")
        cfg = cls(**doc)
        cfg.validate()
        return cfg

    def validate(self) -> None:
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        if self.format not in FORMATS:
            raise ConfigError(f"format must be one of {FORMATS}")
        if self.suite not in SUITES:
            raise ConfigError(f"suite must be one of {SUITES}")
        if self.command in ("tensor", "norm", "sweep") and self.map is None:
            raise ConfigError(f"{self.command} needs a map")
        if self.command in ("tensor", "norm") and self.point is None:
            raise ConfigError(f"{self.command} needs a point")
        for r in self.rays:
            if r not in RAYS:
                raise ConfigError(f"unknown ray {r!r}; choose from {RAYS}")
        grid_fields = {f.name for f in dataclasses.fields(GridSpec)}
        if set(self.grid) - grid_fields:
            raise ConfigError(f"unknown grid field(s): {sorted(set(self.grid) - grid_fields)}")
        tol_fields = {"identity", "pde"}
        if set(self.tolerances) - tol_fields:
            raise ConfigError(f"unknown tolerance(s): {sorted(set(self.tolerances) - tol_fields)}")
        if not isinstance(self.seed, int) or isinstance(self.seed, bool):
            raise ConfigError("seed must be an integer")
        # JSON has no complex type: accept "re:im,..." or a list of numbers / [re, im] / strings
        if isinstance(self.point, str):
            self.point = parse_point(self.point)
        elif self.point is not None:
            self.point = [parse_complex(c) for c in self.point]
        if isinstance(self.n, int):
            self.n = [self.n]


# ---------------------------------------------------------------------------
# formatting


def _num(x: float) -> str:
    return repr(float(x))


def format_point(z) -> str:
    return ",".join(f"{_num(c.real)}:{_num(c.imag)}" for c in np.asarray(z, dtype=complex))


def parse_point(text: str) -> list[complex]:
    out = []
    for item in text.split(","):
        item = item.strip()
        if not item:
            raise ConfigError(f"empty coordinate in point {text!r}")
        if ":" in item:
            re_, im_ = item.split(":", 1)
            try:
                out.append(complex(float(re_), float(im_)))
            except ValueError as exc:
                raise ConfigError(f"bad coordinate {item!r}") from exc
        else:
            out.append(parse_complex(item))
    return out


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


# ---------------------------------------------------------------------------
# commands


def _tensor(cfg: RunConfig, f) -> tuple[str, int]:
    z = np.array(cfg.point, dtype=complex)
    t = schwarzian_tensor(f, z)
    n = t.n
    if cfg.format == "structured":
        doc = {
            "point": format_point(z),
            "map": map_to_dict(f),
            "upper": [[[[_num(x.real), _num(x.imag)] for x in row] for row in mat] for mat in t.upper],
            "zero": [[[_num(x.real), _num(x.imag)] for x in row] for row in t.zero],
        }
        return json.dumps(doc, indent=2) + "\n", 0
    rows = []
    for k in range(n):
        for i in range(n):
            for j in range(n):
                c = t.upper[k, i, j]
                rows.append([format_point(z), "upper", k + 1, i + 1, j + 1, _num(c.real), _num(c.imag), _num(abs(c))])
    for i in range(n):
        for j in range(n):
            c = t.zero[i, j]
            rows.append([format_point(z), "zero", 0, i + 1, j + 1, _num(c.real), _num(c.imag), _num(abs(c))])
    return _csv(["point", "coefficient", "k", "i", "j", "re", "im", "abs"], rows), 0


def _norm(cfg: RunConfig, f) -> tuple[str, int]:
    z = np.array(cfg.point, dtype=complex)
    rep = pointwise_norm(f, z, seed=cfg.seed)
    row = {
        "point": format_point(z),
        "value": _num(rep.value),
        "method": rep.method,
        "converged": rep.converged,
        "starts_used": rep.starts_used,
        "restricted_value": "" if rep.restricted_value is None else _num(rep.restricted_value),
        "discrepancy": rep.discrepancy,
        "witness": format_point(rep.witness_v),
    }
    if rep.discrepancy:
        print(
            f"flagged (OQ-2): generic maximum {rep.value:.6g} differs from restricted-axis value "
            f"{rep.restricted_value:.6g}",
            file=sys.stderr,
        )
    if cfg.format == "structured":
        return json.dumps(row, indent=2) + "\n", 0
    return _csv(list(row), [list(row.values())]), 0


def _sweep(cfg: RunConfig, f) -> tuple[str, int]:
    grid = GridSpec(**cfg.grid)
    rep = domain_sup(f, grid=grid, rays=tuple(cfg.rays), seed=cfg.seed)
    rows = [
        [k, r.source, r.index, format_point(r.z), _num(r.value), r.method, r.flag]
        for k, r in enumerate(rep.rows)
    ]
    flagged = sum(1 for r in rep.rows if r.flag)
    if flagged:
        print(f"flagged (OQ-2): {flagged} of {len(rows)} points exceed the restricted-axis value", file=sys.stderr)
    if cfg.format == "structured":
        doc = {
            "map": map_to_dict(f),
            "grid": grid.to_dict(),
            "sup": _num(rep.sup),
            "witness": format_point(rep.witness_z),
            "tails": rep.tails,
            "rows": [dict(zip(["row", "source", "step", "point", "value", "method", "flag"], r)) for r in rows],
        }
        return json.dumps(doc, indent=2) + "\n", 0
    return _csv(["row", "source", "step", "point", "value", "method", "flag"], rows), 0


def _verify(cfg: RunConfig, quick: bool = False) -> tuple[str, int]:
    plan = QUICK_PLAN if quick else SamplePlan()
    overrides = {"seed": cfg.seed}
    if "identity" in cfg.tolerances:
        overrides["tol_identity"] = float(cfg.tolerances["identity"])
    if "pde" in cfg.tolerances:
        overrides["tol_pde"] = float(cfg.tolerances["pde"])
    plan = dataclasses.replace(plan, **overrides)
    ns = tuple(cfg.n) if cfg.n else (2, 3)
    suite = cfg.suite
    if cfg.command == "selftest":
        reports = run_suites("identities", plan=plan) + run_suites("convexity", plan=plan)
    else:
        reports = run_suites(suite, ns=ns, plan=plan)
    failures = [c for r in reports for c in r.hard_failures]
    flagged = [c for r in reports for c in r.flagged]
    for c in flagged:
        print(f"flagged ({c.oq}) {c.suite}: {c.case}: measured {c.measured:.6g}, reference {c.reference:.6g}",
              file=sys.stderr)
    for c in failures:
        print(f"FAIL {c.suite}: {c.case}: measured {c.measured:.6g}, reference {c.reference:.6g}", file=sys.stderr)
    text = reports_to_json(reports) if cfg.format == "structured" else reports_to_csv(reports)
    return text, 1 if failures else 0


def run(cfg: RunConfig) -> int:
    """Execute a validated configuration; returns the exit status."""
    try:
        cfg.validate()
        f = map_from_dict(cfg.map) if cfg.map is not None else None
        if cfg.command == "tensor":
            text, status = _tensor(cfg, f)
        elif cfg.command == "norm":
            text, status = _norm(cfg, f)
        elif cfg.command == "sweep":
            text, status = _sweep(cfg, f)
        else:
            text, status = _verify(cfg, quick=cfg.command == "selftest")
    except (SchwarzianError, ValueError, TypeError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if cfg.output:
        Path(cfg.output).write_text(text)
    else:
        sys.stdout.write(text)
    return status


# ---------------------------------------------------------------------------
# argument parsing


def _load_map(arg: str) -> dict:
    text = arg if arg.lstrip().startswith("{") else Path(arg).read_text()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"map document is not valid JSON: {exc}") from exc


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="schwarzian", description=__doc__.splitlines()[0])
    p.add_argument("--config", help="JSON run configuration (replaces the subcommand)")
    sub = p.add_subparsers(dest="command")

    def common(sp):
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--out")
        sp.add_argument("--format", choices=FORMATS, default="csv")

    for name in ("tensor", "norm"):
        sp = sub.add_parser(name)
        sp.add_argument("--map", required=True, help="map document (file path or inline JSON)")
        sp.add_argument("--at", required=True, help="point as comma-separated re:im pairs")
        common(sp)
    sp = sub.add_parser("sweep")
    sp.add_argument("--map", required=True)
    sp.add_argument("--grid", type=int, default=4, help="per-axis grid resolution")
    sp.add_argument("--ray", action="append", default=[], choices=RAYS)
    common(sp)
    sp = sub.add_parser("verify")
    sp.add_argument("--suite", choices=SUITES, default="all")
    sp.add_argument("--n", type=int, action="append", help="dimension (repeatable); default 2 and 3")
    common(sp)
    sp = sub.add_parser("selftest")
    common(sp)
    return p


def config_from_args(args: argparse.Namespace) -> RunConfig:
    if args.config:
        return RunConfig.from_dict(json.loads(Path(args.config).read_text()))
    if not args.command:
        raise ConfigError("a subcommand or --config is required")
    cfg = RunConfig(command=args.command, seed=args.seed, output=args.out, format=args.format)
    if args.command in ("tensor", "norm", "sweep"):
        cfg.map = _load_map(args.map)
    if args.command in ("tensor", "norm"):
        cfg.point = parse_point(args.at)
    if args.command == "sweep":
        cfg.grid = {"resolution": args.grid}
        cfg.rays = list(args.ray)
    if args.command == "verify":
        cfg.suite = args.suite
        cfg.n = args.n
    cfg.validate()
    return cfg


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    try:
        cfg = config_from_args(args)
    except (SchwarzianError, ValueError, OSError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
