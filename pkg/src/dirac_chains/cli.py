"""Command-line front end.

Every subcommand writes a JSON report that embeds the configuration that
produced it, plus an optional CSV table for plotting.  Exit status:

    0  all checks passed
    1  a residual exceeded its tolerance
    2  the input could not be parsed or validated
    3  the run finished with a warning (for example an empty battery)
"""
from __future__ import annotations

import argparse
import csv
import io as _io
import json
import math
import os
import re
import sys
from dataclasses import asdict, dataclass, field

import numpy as np

from . import io
from .batteries import standard_battery
from .chains import DiracChain
from .errors import DiracChainsError
from .exterior import MultiVector
from .forms import FormField, d
from .homotopy import (
    HomotopyMap,
    cone,
    homotopy_residual,
    ivt_check,
    poincare_cone,
    poincare_form,
)
from .maps import MapField
from .matrices import ChainBasis, complex_diagnostics, lattice_complex, matrix_of
from .norms import LatticeSpec, br_sandwich, pairing
from .operators import (
    AffineCell,
    boundary_h,
    cell_chain,
    circle_chain,
    extrusion,
    interval_chain,
    multiply,
    square_boundary_chain,
)

SCHEMA_VERSION = 1
PROFILE_ENV = "DIRAC_CHAINS_TOLERANCE_PROFILE"
PROFILES = {"strict": 0.1, "default": 1.0, "loose": 10.0}

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_WARN = 0, 1, 2, 3


class InputError(Exception):
    pass


@dataclass
class RunConfig:
    """Everything needed to reproduce a run."""

    subcommand: str
    options: dict = field(default_factory=dict)
    tolerance: float | None = None
    profile: str = "default"
    seed: int = 0
    out: str | None = None
    csv: str | None = None

    def to_json(self) -> dict:
        return asdict(self)

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> RunConfig:
        skip = {"command", "handler", "tolerance", "profile", "seed", "out", "csv"}
        options = {k: v for k, v in sorted(vars(args).items()) if k not in skip}
        profile = args.profile or os.environ.get(PROFILE_ENV, "default")
        if profile not in PROFILES:
            raise InputError(f"unknown tolerance profile {profile!r}; choose from {sorted(PROFILES)}")
        return cls(args.command, options, args.tolerance, profile, args.seed, args.out, args.csv)

    def tol(self, default: float) -> float:
        if self.tolerance is not None:
            return self.tolerance
        return default * PROFILES[self.profile]


# input helpers


def _floats(text: str) -> list[float]:
    return [float(v) for v in str(text).split(",") if v.strip()]


def _ints(text: str) -> list[int]:
    return [int(v) for v in str(text).split(",") if v.strip()]


def parse_cell(text: str) -> AffineCell:
    named = {"unit-interval": 1, "unit-square": 2, "unit-cube": 3}
    if text in named:
        return AffineCell.unit_cube(named[text])
    return io.cell_from_json(text)


def parse_cycle(text: str) -> tuple[DiracChain, float | None]:
    """Built-in cycles (``circle256``, ``square-boundary50``) or a chain file.

    Returns the chain and the exact area it encloses when known.
    """
    m = re.fullmatch(r"circle(\d+)", text)
    if m:
        return circle_chain(int(m.group(1))), math.pi
    m = re.fullmatch(r"square-boundary(\d+)", text)
    if m:
        return square_boundary_chain(int(m.group(1))), 1.0
    return io.chain_from_json(text), None


def parse_homotopy(text: str, n: int) -> HomotopyMap:
    """``radial`` (contract to the origin), ``radial:cx,cy`` or a JSON file."""
    if text == "radial":
        return HomotopyMap.radial((0.0,) * n)
    if text.startswith("radial:"):
        center = _floats(text.split(":", 1)[1])
        if len(center) != n:
            raise InputError(f"contraction center {center} is not in R^{n}")
        return HomotopyMap.radial(center)
    return io.homotopy_from_json(text)


def parse_interval_or_chain(text: str) -> DiracChain:
    m = re.fullmatch(r"interval(\d+)", text)
    if m:
        return interval_chain(int(m.group(1)))
    return io.chain_from_json(text)


def parse_map(text: str) -> MapField:
    s = text.strip()
    if s.startswith("{") or os.path.exists(s):
        return io.map_from_json(s)
    # inline "t: 3*t^2 - 2*t^3" or "x,y: 2*x; 3*y"
    if ":" not in s:
        raise InputError("inline maps look like 'x,y: 2*x; 3*y'")
    head, body = s.split(":", 1)
    variables = [v.strip() for v in head.split(",")]
    comps = [c.strip().replace("^", "**") for c in body.split(";")]
    return MapField(comps, variables)


def parse_lattice(text: str, n: int) -> LatticeSpec:
    """``h,extent``: grid points 0, h, ..., extent along each of n axes."""
    vals = _floats(text)
    if len(vals) != 2:
        raise InputError("lattice text is 'h,extent'")
    return LatticeSpec.grid(n, vals[0], vals[1])


def load_battery(path: str | None, n: int, degree: int, count: int) -> list[FormField]:
    if path is None:
        return standard_battery(n, degree, count)
    forms = io.battery_from_json(path, n)
    for f in forms:
        if f.degree != degree:
            raise InputError(f"battery form of degree {f.degree}, expected {degree}")
    return forms


# subcommands


def run_stokes(cfg: RunConfig) -> dict:
    o = cfg.options
    cell = parse_cell(o["cell"])
    form = io.form_from_json(o["form"], cell.n)
    if form.degree != cell.k - 1:
        raise InputError(f"form of degree {form.degree} on a {cell.k}-cell; need degree {cell.k - 1}")
    dform = d(form)
    tol = cfg.tol(1e-2)
    rows = []
    for N in _ints(o["N"]):
        chain = cell_chain(cell, N)
        rhs = pairing(chain, dform)
        for h in _floats(o["h"]):
            lhs = pairing(boundary_h(chain, h), form)
            rows.append({"N": N, "h": h, "lhs": lhs, "rhs": rhs, "residual": abs(lhs - rhs)})
    passed = all(r["residual"] <= tol for r in rows)
    return {"passed": passed, "tolerance": tol, "rows": rows}


def run_cone(cfg: RunConfig) -> dict:
    o = cfg.options
    chain = io.chain_from_json(o["chain"])
    hmap = parse_homotopy(o["homotopy"], chain.n)
    tol = cfg.tol(1e-2)
    rows, pairings = [], []
    N, h = _ints(o["N"]), _floats(o["h"])
    kj = cone(chain, hmap, N[0])
    battery = load_battery(o.get("battery"), chain.n, chain.k + 1, 10) if chain.k < chain.n else []
    pairings = [pairing(kj, w) for w in battery]
    result = {"terms": len(kj), "grade": kj.k, "degenerate": kj.is_zero() and chain.k >= chain.n,
              "pairings": pairings, "tolerance": tol}
    if chain.k >= 1:
        hb = load_battery(o.get("battery_k"), chain.n, chain.k, 10)
        if not hb:
            return {**result, "warning": "empty battery", "passed": True, "rows": []}
        for n_ in N:
            for h_ in h:
                rep = homotopy_residual(chain, hmap, n_, h_, hb)
                rows.append({"N": n_, "h": h_, "lhs": rep.max, "rhs": 0.0, "residual": rep.max})
    if o.get("chain_out"):
        with open(o["chain_out"], "w") as fh:
            fh.write(io.dumps(io.chain_to_json(kj)))
    result.update(rows=rows, passed=all(r["residual"] <= tol for r in rows))
    return result


def run_poincare_chains(cfg: RunConfig) -> dict:
    o = cfg.options
    cycle, area = parse_cycle(o["cycle"])
    hmap = parse_homotopy(o["contraction"], cycle.n)
    tol = cfg.tol(1e-2)
    battery = load_battery(o.get("battery"), cycle.n, cycle.k, 10)
    if not battery:
        return {"warning": "empty battery", "passed": True, "rows": []}
    rows = []
    for N in _ints(o["N"]):
        for h in _floats(o["h"]):
            res = poincare_cone(cycle, hmap, N, h, battery)
            row = {"N": N, "h": h, "lhs": res.certificate.max, "rhs": 0.0, "residual": res.certificate.max}
            if cycle.k == cycle.n - 1:
                top = FormField(cycle.n, cycle.n, [1])
                row["volume"] = pairing(res.chain, top)
                if area is not None:
                    row["volume_error"] = abs(row["volume"] - area)
            rows.append(row)
    passed = all(r["residual"] <= tol and r.get("volume_error", 0.0) <= tol for r in rows)
    return {"passed": passed, "tolerance": tol, "expected_volume": area, "rows": rows}


def run_poincare_forms(cfg: RunConfig) -> dict:
    o = cfg.options
    n = o["dim"]
    form = io.form_from_json(o["form"], n)
    hmap = parse_homotopy(o["contraction"], form.n)
    tol = cfg.tol(1e-4)
    res = poincare_form(form, hmap, o["M"], o["samples"], o["step"], cfg.seed)
    out = {"residual": res.residual, "tolerance": tol, "M": o["M"]}
    passed = res.residual <= tol
    if o.get("compare"):
        ref = io.form_from_json(o["compare"], form.n)
        rng = np.random.default_rng(cfg.seed + 1)
        pts = rng.uniform(-0.5, 0.5, (o["samples"], form.n))
        alphas = rng.standard_normal((o["samples"], len(ref.coefficients)))
        gap = float(np.max(np.abs(res.primitive.evaluate_many(pts, alphas) - ref.evaluate_many(pts, alphas))))
        out["compare_residual"] = gap
        passed = passed and gap <= tol
    out["passed"] = passed
    return out


def run_ivt(cfg: RunConfig) -> dict:
    o = cfg.options
    mapping = parse_map(o["map"])
    J = parse_interval_or_chain(o["J"])
    K = parse_interval_or_chain(o["K"])
    rep = ivt_check(mapping, J, K, o["h"], cfg.tol(1e-3))
    return {**rep.to_json(), "passed": rep.consistent}


def run_norm(cfg: RunConfig) -> dict:
    o = cfg.options
    chain = io.chain_from_json(o["chain"])
    lattice = parse_lattice(o["lattice"], chain.n) if o.get("lattice") else None
    domain = lattice.region if lattice is not None else None
    battery = load_battery(o.get("battery"), chain.n, chain.k, 10)
    if domain is None:
        pts = chain.points
        from .domains import Box

        domain = Box(tuple(pts.min(axis=0)), tuple(pts.max(axis=0))) if len(chain) else None
    if not battery or domain is None:
        return {"warning": "empty battery", "passed": True, "upper": None}
    sand = br_sandwich(chain, o["r"], domain, battery, lattice)
    out = sand.to_json()
    slack = 1e-9 * max(1.0, out["upper"])
    out["passed"] = out["lower"] <= out["upper"] + slack
    if sand.lower.status == "warning":
        out["warning"] = "empty battery"
    return out


def _operator(name: str, n: int, k: int):
    """Operator and output grade for ``boundary``, ``extrusion:i`` or ``multiply:expr``."""
    if name == "boundary":
        return None, k - 1
    if name.startswith("extrusion:"):
        beta = MultiVector.basis(n, *_ints(name.split(":", 1)[1]))
        return (lambda c: extrusion(beta, c)), k + beta.k
    if name.startswith("multiply:"):
        f = FormField(n, 0, [name.split(":", 1)[1]])
        return (lambda c: multiply(f, c)), k
    raise InputError(f"unknown operator {name!r}")


def run_matrices(cfg: RunConfig) -> dict:
    o = cfg.options
    n, k = o["dim"], o["k"]
    lattice = parse_lattice(o["lattice"], n)
    op, k_out = _operator(o["op"], n, k)
    if op is None:
        op = lambda c: boundary_h(c, lattice.h)  # noqa: E731
    cubical = o["op"] == "boundary"
    b_in, b_out = ChainBasis(lattice, k, cubical), ChainBasis(lattice, k_out, cubical)
    mat = matrix_of(op, b_in, b_out)
    text = _format_matrix(mat, o["format"])
    if o.get("matrix_out"):
        with open(o["matrix_out"], "w") as fh:
            fh.write(text)
    return {"passed": True, "shape": list(mat.shape), "nonzeros": int(np.count_nonzero(mat)),
            "format": o["format"], "matrix": text if not o.get("matrix_out") else o["matrix_out"]}


def _format_matrix(mat: np.ndarray, fmt: str) -> str:
    buf = _io.StringIO()
    if fmt == "csv":
        writer = csv.writer(buf, lineterminator="\n")
        for row in mat:
            writer.writerow([repr(float(v)) for v in row])
    else:
        for i, j in zip(*np.nonzero(mat)):
            buf.write(f"{i} {j} {float(mat[i, j])!r}\n")
    return buf.getvalue()


def run_diagnostics(cfg: RunConfig) -> dict:
    o = cfg.options
    lattice = parse_lattice(o["lattice"], o["dim"])
    mats, dims = lattice_complex(lattice)
    diag = complex_diagnostics(mats, dims)
    return {"passed": True, **diag.to_json()}


HANDLERS = {
    "stokes": run_stokes,
    "cone": run_cone,
    "poincare-chains": run_poincare_chains,
    "poincare-forms": run_poincare_forms,
    "ivt": run_ivt,
    "norm": run_norm,
    "matrices": run_matrices,
    "diagnostics": run_diagnostics,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tolerance", type=float, default=None, help="override the pass/fail tolerance")
    common.add_argument("--profile", choices=sorted(PROFILES), default=None,
                        help=f"tolerance profile (default from ${PROFILE_ENV} or 'default')")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", help="write the JSON report here instead of stdout")
    common.add_argument("--csv", help="write convergence rows as CSV")

    parser = argparse.ArgumentParser(prog="dirac-chains", description="Verification workflows for Dirac chains.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("stokes", parents=[common], help="pair the difference boundary of a cell with a form")
    p.add_argument("--cell", default="unit-square", help="unit-interval, unit-square, unit-cube or a JSON cell")
    p.add_argument("--form", required=True, help="form text such as 'x dy', or a JSON file")
    p.add_argument("--N", default="100", help="subdivision counts, comma separated")
    p.add_argument("--h", default="1e-3", help="difference steps, comma separated")

    p = sub.add_parser("cone", parents=[common], help="cone over a chain and the chain-homotopy residual")
    p.add_argument("--chain", required=True, help="chain JSON file")
    p.add_argument("--homotopy", default="radial", help="radial, radial:c1,c2,... or a JSON file")
    p.add_argument("--N", default="200")
    p.add_argument("--h", default="1e-3")
    p.add_argument("--battery", help="JSON list of forms paired with the cone")
    p.add_argument("--battery-k", dest="battery_k", help="JSON list of forms for the homotopy residual")
    p.add_argument("--chain-out", dest="chain_out", help="write the cone chain as JSON")

    p = sub.add_parser("poincare-chains", parents=[common], help="fill a cycle with -K J")
    p.add_argument("--cycle", required=True, help="circle<M>, square-boundary<M> or a chain JSON file")
    p.add_argument("--contraction", default="radial")
    p.add_argument("--N", default="200")
    p.add_argument("--h", default="1e-3")
    p.add_argument("--battery")

    p = sub.add_parser("poincare-forms", parents=[common], help="primitive -A w of a closed form")
    p.add_argument("--form", required=True)
    p.add_argument("--dim", type=int, default=None, help="ambient dimension for form text")
    p.add_argument("--contraction", default="radial")
    p.add_argument("--M", type=int, default=100)
    p.add_argument("--samples", type=int, default=100)
    p.add_argument("--step", type=float, default=1e-4)
    p.add_argument("--compare", help="expected primitive, compared at sampled points")

    p = sub.add_parser("ivt", parents=[common], help="check G_* boundary J = boundary K iff G_* J = K")
    p.add_argument("--map", required=True, help="'t: 3*t^2 - 2*t^3' or a JSON file")
    p.add_argument("--J", required=True, help="interval<N> or a chain JSON file")
    p.add_argument("--K", required=True)
    p.add_argument("--h", type=float, default=1e-4)

    p = sub.add_parser("norm", parents=[common], help="lower and upper bounds on a B^r norm")
    p.add_argument("--chain", required=True)
    p.add_argument("--r", type=int, default=1)
    p.add_argument("--lattice", help="h,extent")
    p.add_argument("--battery")

    p = sub.add_parser("matrices", parents=[common], help="matrix of an operator on a lattice basis")
    p.add_argument("--lattice", required=True, help="h,extent")
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--op", default="boundary", help="boundary, extrusion:i[,j..] or multiply:expr")
    p.add_argument("--format", choices=["csv", "triplet"], default="csv")
    p.add_argument("--matrix-out", dest="matrix_out")

    p = sub.add_parser("diagnostics", parents=[common], help="ranks and defects of the lattice complex")
    p.add_argument("--lattice", required=True, help="h,extent")
    p.add_argument("--dim", type=int, default=2)
    return parser


def write_csv(path: str, cfg: RunConfig, rows: list[dict]):
    cols = ["N", "h", "lhs", "rhs", "residual"]
    keys = ["subcommand"] + [k for k, v in cfg.options.items()
                             if k not in cols and not isinstance(v, (dict, list))]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(keys + cols)
        prefix = [cfg.subcommand] + [cfg.options[k] for k in keys[1:]]
        for row in rows:
            writer.writerow(prefix + [row.get(c, "") for c in cols])


def run(cfg: RunConfig) -> tuple[int, dict]:
    """Execute a configuration; returns the exit status and the report."""
    handler = HANDLERS[cfg.subcommand]
    try:
        result = handler(cfg)
    except (InputError, DiracChainsError, ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        report = {"schema_version": SCHEMA_VERSION, "config": cfg.to_json(), "status": "error",
                  "error": f"{type(exc).__name__}: {exc}"}
        return EXIT_INPUT, report
    if "warning" in result:
        status, code = "warning", EXIT_WARN
    elif result.get("passed"):
        status, code = "pass", EXIT_OK
    else:
        status, code = "fail", EXIT_FAIL
    report = {"schema_version": SCHEMA_VERSION, "config": cfg.to_json(), "status": status, "result": result}
    return code, report


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = RunConfig.from_args(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    code, report = run(cfg)
    text = io.dumps(report)
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if cfg.csv and "result" in report:
        write_csv(cfg.csv, cfg, report["result"].get("rows", []))
    if code == EXIT_INPUT:
        print(report["error"], file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
