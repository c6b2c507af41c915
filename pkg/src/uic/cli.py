"""Command line front end.

    uic iterate --map ex1 --start 8.5 --milestones 20
    uic check --map ex2 --condition meir-keeler --eps 1 --delta 1
    uic counterexample --kind sehgal --k 0.9 --n 3
    uic reproduce-table

Exit codes: 0 success, 1 usage or I/O error, 2 no convergence verdict,
3 condition falsified, 4 reproduced table off the reference values.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, fields
from fractions import Fraction
from typing import Optional

from . import conditions as cond
from .builtin import MAP_IDS, get_builtin
from .certificates import example3_certificate
from .engine import DEFAULT_BUDGET, Status, error_bounds, milestones, run_until_verdict
from .errors import UICError
from .metric import L1Point, PlanePoint

EXIT_OK, EXIT_USAGE, EXIT_NO_CONVERGENCE, EXIT_FALSIFIED, EXIT_TABLE = 0, 1, 2, 3, 4

# Ex1 from 8.5: (n, p_n, T^{p_n} 8.5, k^n M) as printed to six digits
REFERENCE_ROWS = (
    (0, 0, 8.5, 20.6474),
    (1, 10, 0.654004, 12.8014),
    (2, 11, 0.653772, 7.93684),
    (5, 14, 0.653698, 1.89157),
    (10, 19, 0.653697, 0.173293),
    (20, 29, 0.653697, 0.00145445),
)
ITERATE_TOL = 1e-4
BOUND_RTOL = 1e-3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


@dataclass
class RunConfig:
    map: str = "ex1"
    start: Optional[str] = None
    max_iterations: int = DEFAULT_BUDGET
    fp_tolerance: float = 1e-10
    milestone_count: int = 20
    seed: int = 0
    output_format: str = "csv"
    output_path: Optional[str] = None

    def validate(self) -> "RunConfig":
        if self.map not in MAP_IDS:
            raise UsageError(f"unknown map {self.map!r}; choose from {', '.join(MAP_IDS)}")
        if not self.fp_tolerance > 0:
            raise UsageError("tolerance must be positive")
        if self.max_iterations < 1 or self.milestone_count < 1:
            raise UsageError("iteration and milestone counts must be at least 1")
        if self.output_format not in ("csv", "json"):
            raise UsageError("output format must be csv or json")
        return self


def load_config(path: str) -> dict:
    """Read a JSON object whose keys are :class:`RunConfig` fields."""
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise UsageError("config file must hold a JSON object")
    known = {f.name for f in fields(RunConfig)}
    unknown = set(data) - known
    if unknown:
        raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
    return data


def build_config(args) -> RunConfig:
    data = load_config(args.config) if getattr(args, "config", None) else {}
    overrides = {
        "map": getattr(args, "map", None),
        "start": getattr(args, "start", None),
        "max_iterations": getattr(args, "max_iterations", None),
        "fp_tolerance": getattr(args, "tol", None),
        "milestone_count": getattr(args, "milestones", None),
        "seed": getattr(args, "seed", None),
        "output_format": getattr(args, "format", None),
        "output_path": getattr(args, "output", None),
    }
    data.update({k: v for k, v in overrides.items() if v is not None})
    return RunConfig(**data).validate()


# -- point literals ----------------------------------------------------------

def _number(text: str) -> float:
    try:
        return float(Fraction(text.strip()))
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"not a number: {text!r}") from None


def parse_point(map_id: str, text: Optional[str]):
    """``8.5`` or ``3/5`` on the line, ``x,y`` on the plane, ``i:c,...`` or
    ``center`` for an offset from the l1 center (``;`` also separates, as in
    the CSV output)."""
    if map_id == "ex2":
        if text is None or text.strip() in ("", "center"):
            return L1Point.center()
        coeffs = {}
        for item in text.replace(";", ",").split(","):
            index, sep, value = item.partition(":")
            if not sep or not index.strip().isdigit():
                raise UsageError(f"l1 offsets are written i:c,..., got {item!r}")
            coeffs[int(index)] = coeffs.get(int(index), 0.0) + _number(value)
        return L1Point.from_mapping(coeffs, centered=True)
    if text is None:
        raise UsageError(f"--start is required for {map_id}")
    if map_id == "ex3":
        parts = text.split(",")
        if len(parts) != 2:
            raise UsageError(f"plane points are written x,y, got {text!r}")
        return PlanePoint(_number(parts[0]), _number(parts[1]))
    return _number(text)


def point_json(point):
    if isinstance(point, PlanePoint):
        return [point.x, point.y]
    if isinstance(point, L1Point):
        return {"centered": point.centered, "offsets": [[i, c] for i, c in point.offsets]}
    return point


def point_cells(point) -> list:
    if isinstance(point, PlanePoint):
        return [repr(point.x), repr(point.y)]
    if isinstance(point, L1Point):
        return [";".join(f"{i}:{c!r}" for i, c in point.offsets) or "center"]
    return [repr(float(point))]


def point_headers(point) -> list:
    if isinstance(point, PlanePoint):
        return ["iterate_x", "iterate_y"]
    return ["iterate"]


def _finite(value):
    # JSON has no infinities; an unbounded estimate is reported as null
    return value if value is None or math.isfinite(value) else None


def _cell(value) -> str:
    if isinstance(value, float):
        return repr(value)
    if value is None:
        return ""
    return str(value)


# -- output ------------------------------------------------------------------

def _emit(text: str, path: Optional[str]) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _json_text(payload: dict) -> str:
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def _csv_text(comments: list, header: list, rows: list) -> str:
    buf = io.StringIO()
    for line in comments:
        buf.write(f"# {line}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_cell(v) for v in row])
    return buf.getvalue()


# -- subcommands -------------------------------------------------------------

def cmd_iterate(args) -> int:
    config = build_config(args)
    builtin = get_builtin(config.map)
    handle = builtin.handle
    x0 = parse_point(config.map, config.start)
    if not handle.domain_predicate(x0):
        raise UsageError(f"start {config.start!r} is outside the domain of {config.map}")
    orbit, verdict = run_until_verdict(handle, x0, config.fp_tolerance, config.max_iterations)
    cert = builtin.certificate_for(x0)
    rows = []
    Mx = None
    if cert is not None:
        trace = milestones(handle, cert, x0, config.milestone_count, config.max_iterations)
        Mx = trace.Mx
        rows = error_bounds(trace)
    converged = verdict.status is Status.CONVERGED
    summary = {
        "map": config.map,
        "kind": builtin.kind,
        "start": point_json(x0),
        "status": verdict.status.value,
        "witness": point_json(verdict.witness),
        "residual": _finite(verdict.residual),
        "remaining": _finite(verdict.remaining),
        "steps": verdict.steps,
        "tolerance": config.fp_tolerance,
        "k": cert.k if cert is not None else None,
        "Mx": Mx,
        # the bounds presuppose a limit; flag them when none was confirmed
        "bounds_presuppose_convergence": not converged,
    }
    if config.output_format == "json":
        payload = dict(summary)
        payload["rows"] = [
            {"n": r.n, "p_n": r.p_n, "iterate": point_json(r.point),
             "bound_alpha": r.bound_alpha, "bound_sup": r.bound_sup}
            for r in rows
        ]
        _emit(_json_text(payload), config.output_path)
    else:
        comments = [f"{key}={json.dumps(value, sort_keys=True)}" for key, value in summary.items()]
        header = ["n", "p_n"] + point_headers(x0) + ["bound_alpha", "bound_sup"]
        body = [[r.n, r.p_n] + point_cells(r.point) + [r.bound_alpha, r.bound_sup] for r in rows]
        _emit(_csv_text(comments, header, body), config.output_path)
    print(f"{verdict.status.value} after {verdict.steps} iterations", file=sys.stderr)
    return EXIT_OK if converged else EXIT_NO_CONVERGENCE


def _build_spec(args, builtin):
    kind = args.condition
    need = {"banach": ["k"], "kannan": ["k"], "chatterjea": ["k"], "hardy-rogers": ["k1", "k2", "k3"],
            "meir-keeler": ["eps", "delta"], "iterate-contraction": ["k", "n"], "uic": []}[kind]
    missing = [name for name in need if getattr(args, name) is None]
    if missing:
        raise UsageError(f"{kind} needs --{' --'.join(missing)}")
    if kind == "banach":
        return cond.Banach(args.k)
    if kind == "kannan":
        return cond.Kannan(args.k)
    if kind == "chatterjea":
        return cond.Chatterjea(args.k)
    if kind == "hardy-rogers":
        return cond.HardyRogers(args.k1, args.k2, args.k3)
    if kind == "meir-keeler":
        return cond.MeirKeeler(tuple(args.eps), args.delta)
    if kind == "iterate-contraction":
        return cond.IterateContraction(args.k, args.n)
    if builtin.id == "ex3":
        if args.restrict is None:
            raise UsageError("uic on ex3 needs a slice: --restrict Y R")
        return cond.UIC(example3_certificate(args.restrict[0], args.restrict[1]))
    if builtin.certificate is None:
        raise UsageError(f"{builtin.id} has no certificate")
    return cond.UIC(builtin.certificate)


def _constructed_pairs(spec) -> list:
    """The explicit l1 pairs that target ``spec`` on Ex2."""
    if isinstance(spec, cond.MeirKeeler):
        out = []
        for eps in spec.eps_grid:
            c = cond.counterexample_meir_keeler_l1(eps, spec.delta)
            out.append((c.x, c.y))
        return out
    if isinstance(spec, (cond.HardyRogers, cond.Banach, cond.Kannan, cond.Chatterjea)):
        c = cond.counterexample_hardy_rogers_l1(*spec.weights())
        return [(c.x, c.y)]
    if isinstance(spec, cond.IterateContraction):
        c = cond.counterexample_sehgal_l1(L1Point.center(), spec.k, spec.n)
        return [(c.x, c.y)]
    return []


def _violation_json(v: cond.Counterexample) -> dict:
    return {"x": point_json(v.x), "y": point_json(v.y), "lhs": v.lhs, "rhs": v.rhs,
            "margin": v.margin, "detail": v.detail}


def _report_output(report, payload: dict, fmt: str, path: Optional[str]) -> None:
    if fmt == "json":
        payload["violations"] = [_violation_json(v) for v in report.violations]
        _emit(_json_text(payload), path)
        return
    comments = [f"{key}={json.dumps(value, sort_keys=True)}" for key, value in payload.items()]
    header = ["index", "x", "y", "lhs", "rhs", "margin", "detail"]
    rows = [[i, json.dumps(point_json(v.x)), json.dumps(point_json(v.y)), v.lhs, v.rhs, v.margin, v.detail]
            for i, v in enumerate(report.violations)]
    _emit(_csv_text(comments, header, rows), path)


def cmd_check(args) -> int:
    config = build_config(args)
    builtin = get_builtin(config.map)
    spec = _build_spec(args, builtin)
    restrict = tuple(args.restrict) if args.restrict is not None else None
    pairs = cond.sample_pairs(config.map, args.samples, config.seed, restrict)
    if config.map == "ex2":
        pairs = pairs + _constructed_pairs(spec)
    report = cond.check_condition(builtin.handle, spec, pairs, workers=args.workers)
    payload = {"map": config.map, "condition": cond.describe(spec), "seed": config.seed,
               "pairs_tested": report.pairs_tested, "points_tested": report.points_tested,
               "verdict": report.verdict, "violation_count": len(report.violations)}
    _report_output(report, payload, config.output_format, config.output_path)
    print(f"{report.verdict}: {len(report.violations)} violations in {report.pairs_tested} pairs",
          file=sys.stderr)
    return EXIT_FALSIFIED if report.violations else EXIT_OK


def cmd_counterexample(args) -> int:
    fmt = args.format or "json"
    if args.kind == "meir-keeler":
        if args.eps is None or args.delta is None:
            raise UsageError("meir-keeler needs --eps and --delta")
        cex = cond.counterexample_meir_keeler_l1(args.eps, args.delta)
        params = {"eps": args.eps, "delta": args.delta}
    elif args.kind == "hardy-rogers":
        ks = (args.k1 or 0.0, args.k2 or 0.0, args.k3 or 0.0)
        cex = cond.counterexample_hardy_rogers_l1(*ks)
        params = dict(zip(("k1", "k2", "k3"), ks))
    else:
        if args.k is None or args.n is None:
            raise UsageError("sehgal needs --k and --n")
        x = parse_point("ex2", args.start)
        cex = cond.counterexample_sehgal_l1(x, args.k, args.n)
        params = {"k": args.k, "n": args.n}
    payload = {"kind": args.kind, "parameters": params, **_violation_json(cex)}
    if fmt == "json":
        _emit(_json_text(payload), args.output)
    else:
        header = ["x", "y", "lhs", "rhs", "margin", "detail"]
        row = [json.dumps(point_json(cex.x)), json.dumps(point_json(cex.y)), cex.lhs, cex.rhs, cex.margin, cex.detail]
        _emit(_csv_text([f"kind={args.kind}", f"parameters={json.dumps(params, sort_keys=True)}"], header, [row]),
              args.output)
    return EXIT_OK


def reproduce_rows() -> list:
    """Recompute the Ex1 table from 8.5 and compare with the reference rows."""
    builtin = get_builtin("ex1")
    trace = milestones(builtin.handle, builtin.certificate, 8.5, REFERENCE_ROWS[-1][0])
    rows = error_bounds(trace)
    out = []
    for n, p_ref, x_ref, bound_ref in REFERENCE_ROWS:
        row = rows[n]
        ok_p = row.p_n == p_ref
        ok_x = abs(row.point - x_ref) <= ITERATE_TOL
        ok_b = math.isclose(row.bound_alpha, bound_ref, rel_tol=BOUND_RTOL)
        out.append({"n": n, "p_n": row.p_n, "iterate": row.point, "bound_alpha": row.bound_alpha,
                    "bound_sup": row.bound_sup, "reference_p_n": p_ref, "reference_iterate": x_ref,
                    "reference_bound": bound_ref, "pass_p_n": ok_p, "pass_iterate": ok_x, "pass_bound": ok_b})
    return out


def cmd_reproduce_table(args) -> int:
    rows = reproduce_rows()
    fmt = args.format or "csv"
    all_ok = all(r["pass_p_n"] and r["pass_iterate"] and r["pass_bound"] for r in rows)
    if fmt == "json":
        _emit(_json_text({"map": "ex1", "start": 8.5, "k": 0.62, "rows": rows, "all_pass": all_ok}), args.output)
    else:
        header = list(rows[0])
        _emit(_csv_text([], header, [[r[h] for h in header] for r in rows]), args.output)
    print("table reproduced" if all_ok else "table mismatch", file=sys.stderr)
    return EXIT_OK if all_ok else EXIT_TABLE


# -- argument parsing --------------------------------------------------------

def _common(p, with_map=True):
    if with_map:
        p.add_argument("--config", help="JSON file with RunConfig fields")
        p.add_argument("--map", choices=MAP_IDS)
        p.add_argument("--start", help="start point literal")
        p.add_argument("--seed", type=int)
        p.add_argument("--max-iterations", type=int, dest="max_iterations")
        p.add_argument("--tol", type=float)
        p.add_argument("--milestones", type=int)
    p.add_argument("--format", choices=("csv", "json"))
    p.add_argument("--output", help="write here instead of standard output")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="uic", description="Certified fixed-point iteration tools.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("iterate", help="run an orbit, its verdict and error-bound rows")
    _common(p)
    p.set_defaults(func=cmd_iterate)

    p = sub.add_parser("check", help="test a contraction condition on sampled pairs")
    _common(p)
    p.add_argument("--condition", required=True,
                   choices=("banach", "kannan", "chatterjea", "hardy-rogers", "meir-keeler",
                            "iterate-contraction", "uic"))
    p.add_argument("--k", type=float)
    p.add_argument("--k1", type=float)
    p.add_argument("--k2", type=float)
    p.add_argument("--k3", type=float)
    p.add_argument("--eps", type=float, nargs="+")
    p.add_argument("--delta", type=float)
    p.add_argument("--n", type=int)
    p.add_argument("--restrict", type=float, nargs=2, metavar=("A", "B"),
                   help="sample interval (ex1, ex4) or slice Y R (ex3)")
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("counterexample", help="build an l1 pair breaking a condition for ex2")
    _common(p, with_map=False)
    p.add_argument("--kind", required=True, choices=("meir-keeler", "hardy-rogers", "sehgal"))
    p.add_argument("--eps", type=float)
    p.add_argument("--delta", type=float)
    p.add_argument("--k", type=float)
    p.add_argument("--k1", type=float)
    p.add_argument("--k2", type=float)
    p.add_argument("--k3", type=float)
    p.add_argument("--n", type=int)
    p.add_argument("--start", help="l1 point x for sehgal, i:c,... offsets from the center")
    p.set_defaults(func=cmd_counterexample)

    p = sub.add_parser("reproduce-table", help="recompute the Ex1 error table from 8.5")
    _common(p, with_map=False)
    p.set_defaults(func=cmd_reproduce_table)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, UICError, OSError, json.JSONDecodeError, TypeError) as exc:
        print(f"uic: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
