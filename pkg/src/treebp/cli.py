"""Command-line front end: reproducible experiments with CSV/JSON output.

Subcommands: ``threshold`` (bisection vs closed form), ``bounds`` (per-level
bound table at one noise level), ``sweep`` (bound curves over distances
below threshold), ``exponent`` (near-critical slope and exponent fits),
``oracle-check`` (exact enumeration vs the layer pipeline).  Exit codes:
0 success, 1 usage error, 2 invariant violation, 3 resource limit.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import dataclass

import numpy as np

from .channels import TreeParams, delta_c
from .criticality import (
    SandwichViolation,
    conjecture_report,
    find_threshold,
    tau_sweep,
)
from .dynamics import FixedPointConfig, local_comparison
from .oracle import ResourceLimitError, exact_de, exact_tree
from .channels import functionals
from .quantize import uniform_grid

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INVARIANT = 2
EXIT_RESOURCE = 3

_SANDWICH_SLACK = 1e-12


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class RunConfig:
    """Validated configuration of one bound computation.

    Exactly one of ``delta`` and ``tau`` is given; ``tau`` means the
    distance below the reconstruction threshold of the chosen arity.
    """

    command: str
    d: int
    delta: float | None
    tau: float | None
    grid_cells: int
    depth: int | str
    tol: float
    output_format: str
    output_path: str | None

    def __post_init__(self):
        if self.d < 2:
            raise UsageError(f"arity must be at least 2, got {self.d}")
        if (self.delta is None) == (self.tau is None):
            raise UsageError("specify exactly one of --delta and --tau")
        if self.delta is not None and not 0.0 <= self.delta <= 0.5:
            raise UsageError("--delta must lie in [0, 1/2]")
        if self.tau is not None:
            dc = delta_c(self.d)
            if not 0.0 < self.tau < dc:
                raise UsageError(f"--tau must lie in (0, {dc:.6g}) for d={self.d}")
        if self.grid_cells < 1:
            raise UsageError("--cells must be positive")
        if self.depth != "auto" and (not isinstance(self.depth, int) or self.depth < 1):
            raise UsageError("depth must be a positive integer or 'auto'")
        if self.tol <= 0:
            raise UsageError("--tol must be positive")

    @property
    def resolved_delta(self) -> float:
        if self.delta is not None:
            return self.delta
        return delta_c(self.d) - self.tau

    @property
    def resolved_depth(self) -> int | None:
        return None if self.depth == "auto" else self.depth

    def echo(self) -> dict:
        doc = {"command": self.command, "d": self.d}
        if self.delta is not None:
            doc["delta"] = self.delta
        else:
            doc["tau"] = self.tau
            doc["delta"] = self.resolved_delta
        doc.update(grid_cells=self.grid_cells, depth=self.depth, tol=self.tol)
        return doc


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad flags; the interface promises 1.
    def error(self, message):
        raise UsageError(message)


def _fmt(x) -> str:
    """Numbers are printed with 12 significant digits."""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return f"{x:.12g}"
    return str(x)


def _round12(obj):
    """Round floats to 12 significant digits for stable JSON output."""
    if isinstance(obj, float):
        return float(f"{obj:.12g}")
    if isinstance(obj, dict):
        return {k: _round12(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round12(v) for v in obj]
    return obj


def _emit(text: str, path: str | None):
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", newline="") as fh:
            fh.write(text)


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def _json_text(config, results, fits=None, warnings=None) -> str:
    doc = {
        "config": _round12(config),
        "results": _round12(results),
        "fits": _round12(fits or {}),
        "warnings": list(warnings or []),
    }
    return json.dumps(doc, indent=2) + "\n"


def _parse_depth(value: str):
    if value == "auto":
        return None
    try:
        depth = int(value)
    except ValueError as exc:
        raise UsageError(f"depth must be an integer or 'auto', got {value!r}") from exc
    if depth < 1:
        raise UsageError("depth must be positive")
    return depth


def _check_arity(d: int):
    if d < 2:
        raise UsageError(f"arity must be at least 2, got {d}")


def cmd_threshold(args) -> int:
    _check_arity(args.d)
    if args.tol <= 0:
        raise UsageError("--tol must be positive")
    value = find_threshold(args.d, tol=args.tol)
    closed = delta_c(args.d)
    if args.format == "json":
        _emit(
            _json_text(
                {"command": "threshold", "d": args.d, "tol": args.tol},
                {
                    "threshold": value,
                    "closed_form": closed,
                    "abs_error": abs(value - closed),
                },
            ),
            args.output,
        )
    else:
        _emit(
            f"{_fmt(value)}\ndeviation_from_closed_form {_fmt(abs(value - closed))}\n",
            args.output,
        )
    return EXIT_OK


def _bounds_rows(d, delta, cells, depth, tol):
    params = TreeParams(d, delta)
    grid = uniform_grid(cells)
    cfg = FixedPointConfig(tol=tol, max_iters=100_000 if depth is None else depth)
    runs = {
        "lower_Pe": local_comparison(params, "BEC", "error", grid, depth=depth, cfg=cfg),
        "upper_Pe": local_comparison(params, "BSC", "error", grid, depth=depth, cfg=cfg),
        "lower_I": local_comparison(params, "BSC", "info", grid, depth=depth, cfg=cfg),
        "upper_I": local_comparison(params, "BEC", "info", grid, depth=depth, cfg=cfg),
    }
    tracks = {
        "lower_Pe": runs["lower_Pe"].track("p_e"),
        "upper_Pe": runs["upper_Pe"].track("p_e"),
        "lower_I": runs["lower_I"].track("capacity"),
        "upper_I": runs["upper_I"].track("capacity"),
    }
    levels = max(len(t) for t in tracks.values())
    rows = []
    for k in range(levels):
        # A converged pipeline holds its final value on later rows.
        row = [k + 1] + [
            float(tracks[key][min(k, len(tracks[key]) - 1)])
            for key in ("lower_Pe", "upper_Pe", "lower_I", "upper_I")
        ]
        rows.append(row)
    converged = {key: bool(r.converged) for key, r in runs.items()}
    return rows, converged


def cmd_bounds(args) -> int:
    depth = _parse_depth(args.depth)
    cfg = RunConfig(
        command="bounds",
        d=args.d,
        delta=args.delta,
        tau=args.tau,
        grid_cells=args.cells,
        depth="auto" if depth is None else depth,
        tol=args.tol,
        output_format=args.format,
        output_path=args.output,
    )
    rows, converged = _bounds_rows(
        cfg.d, cfg.resolved_delta, cfg.grid_cells, cfg.resolved_depth, cfg.tol
    )

    bad = [
        r for r in rows
        if r[1] > r[2] + _SANDWICH_SLACK or r[3] > r[4] + _SANDWICH_SLACK
    ]
    if bad:
        sys.stderr.write("invariant violation: bound sandwich failed\n")
        return EXIT_INVARIANT

    config = cfg.echo()
    # With an explicit depth the rows are exactly what was asked for; only
    # depth=auto runs promise convergence.
    warnings = []
    if cfg.depth == "auto":
        warnings = [f"{k} hit the level cap before converging"
                    for k, ok in converged.items() if not ok]
    if args.format == "json":
        results = {
            "levels": [
                {
                    "level": r[0],
                    "lower_Pe": r[1],
                    "upper_Pe": r[2],
                    "lower_I": r[3],
                    "upper_I": r[4],
                }
                for r in rows
            ],
            "final_gap_Pe": rows[-1][2] - rows[-1][1],
            "final_gap_I": rows[-1][4] - rows[-1][3],
            "converged": converged,
        }
        _emit(_json_text(config, results, warnings=warnings), args.output)
    else:
        header = ["level", "lower_Pe", "upper_Pe", "lower_I", "upper_I"]
        _emit(_csv_text(header, rows), args.output)
        for w in warnings:
            sys.stderr.write(w + "\n")
    return EXIT_OK


def _parse_taus(args) -> list[float]:
    if args.taus:
        try:
            taus = [float(t) for t in args.taus.split(",") if t.strip()]
        except ValueError as exc:
            raise UsageError(f"bad --taus list: {args.taus!r}") from exc
        if not taus:
            raise UsageError("--taus is empty")
        return taus
    if args.tau_count < 1:
        raise UsageError("--tau-count must be positive")
    if not 0.0 < args.tau_min <= args.tau_max:
        raise UsageError("need 0 < --tau-min <= --tau-max")
    if args.tau_count == 1:
        return [args.tau_min]
    return list(np.geomspace(args.tau_min, args.tau_max, args.tau_count))


def _sweep_warnings(sweep):
    stalled = sweep.metadata.get("stalled", [False] * len(sweep.taus))
    out = []
    for t, ok, st in zip(sweep.taus, sweep.metadata["converged"], stalled):
        if not ok:
            reason = ("settled into a limit-cycle band" if st
                      else "hit the level cap")
            out.append(f"tau={_fmt(float(t))} {reason} before converging")
    return out


def _sweep_config(args, taus, method):
    return {
        "command": "sweep",
        "d": args.d,
        "method": method,
        "grid_cells": args.cells,
        "taus": list(taus),
        "tol": args.tol,
        "jobs": args.jobs,
    }


def cmd_sweep(args) -> int:
    _check_arity(args.d)
    taus = _parse_taus(args)
    method = args.method.replace("-", "_")
    if args.tol <= 0:
        raise UsageError("--tol must be positive")
    try:
        sweep = tau_sweep(
            args.d,
            taus,
            method,
            grid_cells=args.cells,
            depth_cap=args.depth_cap,
            tol=args.tol,
            jobs=args.jobs,
        )
        sweep.validate(_SANDWICH_SLACK)
    except SandwichViolation as exc:
        sys.stderr.write(f"invariant violation: {exc}\n")
        return EXIT_INVARIANT
    except ValueError as exc:
        raise UsageError(str(exc)) from exc

    warnings = _sweep_warnings(sweep)
    if args.format == "json":
        results = [
            {
                "tau": r[0],
                "lower_Pe": r[1],
                "upper_Pe": r[2],
                "lower_I": r[3],
                "upper_I": r[4],
                "converged": r[5],
            }
            for r in sweep.rows()
        ]
        _emit(_json_text(_sweep_config(args, taus, method), results,
                         warnings=warnings), args.output)
    else:
        header = ["tau", "lower_Pe", "upper_Pe", "lower_I", "upper_I", "converged"]
        _emit(_csv_text(header, sweep.rows()), args.output)
        for w in warnings:
            sys.stderr.write(w + "\n")
    return EXIT_OK


def cmd_exponent(args) -> int:
    _check_arity(args.d)
    if args.tol <= 0:
        raise UsageError("--tol must be positive")
    if args.tau_count < 3:
        raise UsageError("--tau-count must be at least 3 for a fit")
    if not 0.0 < args.tau_min < args.tau_max:
        raise UsageError("need 0 < --tau-min < --tau-max")
    try:
        report = conjecture_report(
            d=args.d,
            grid_cells=args.cells,
            tau_range=(args.tau_min, args.tau_max),
            num_taus=args.tau_count,
            tol=args.tol,
            jobs=args.jobs,
        )
        report.sweep.validate(_SANDWICH_SLACK)
    except SandwichViolation as exc:
        sys.stderr.write(f"invariant violation: {exc}\n")
        return EXIT_INVARIANT
    except ValueError as exc:
        raise UsageError(str(exc)) from exc

    sweep = report.sweep
    warnings = _sweep_warnings(sweep)

    def fit_doc(fit):
        return {
            "slope": fit.slope,
            "intercept": fit.intercept,
            "r_squared": fit.r_squared,
            "transform": fit.transform,
        }

    fits = {
        "i_slope": report.i_coeff_lower,
        "pe_exponent": report.pe_exponent_upper.slope,
        "i_coeff_lower": report.i_coeff_lower,
        "i_coeff_upper": report.i_coeff_upper,
        "i_slope_lower": fit_doc(report.i_slope_lower),
        "i_slope_upper": fit_doc(report.i_slope_upper),
        "pe_exponent_upper": fit_doc(report.pe_exponent_upper),
        "pe_exponent_lower": fit_doc(report.pe_exponent_lower),
    }
    config = {
        "command": "exponent",
        "d": args.d,
        "grid_cells": args.cells,
        "tau_min": args.tau_min,
        "tau_max": args.tau_max,
        "tau_count": args.tau_count,
        "tol": args.tol,
        "jobs": args.jobs,
    }
    results = [
        {
            "tau": r[0],
            "lower_Pe": r[1],
            "upper_Pe": r[2],
            "lower_I": r[3],
            "upper_I": r[4],
            "converged": r[5],
        }
        for r in sweep.rows()
    ]
    if args.format == "csv":
        header = ["tau", "lower_Pe", "upper_Pe", "lower_I", "upper_I", "converged"]
        _emit(_csv_text(header, sweep.rows()), args.output)
        sys.stderr.write(
            f"i_slope {_fmt(report.i_coeff_lower)} "
            f"pe_exponent {_fmt(report.pe_exponent_upper.slope)}\n"
        )
    else:
        _emit(_json_text(config, results, fits=fits, warnings=warnings), args.output)
    return EXIT_OK


def cmd_oracle_check(args) -> int:
    _check_arity(args.d)
    if not 0.0 <= args.delta <= 0.5:
        raise UsageError("--delta must lie in [0, 1/2]")
    if args.depth < 0:
        raise UsageError("--depth must be nonnegative")
    params = TreeParams(args.d, args.delta)
    exact = exact_tree(params, args.depth)
    de = functionals(exact_de(params, args.depth))
    gaps = {
        "p_e": abs(exact.p_e - de.p_e),
        "mutual_info": abs(exact.mutual_info - de.capacity),
        "chi2_info": abs(exact.chi2_info - de.chi2),
    }
    worst = max(gaps.values())
    ok = worst <= 1e-10

    bracket_ok = True
    if args.depth >= 1:
        grid = uniform_grid(args.cells)
        cfg = FixedPointConfig(tol=1e-13, max_iters=10_000)
        from .channels import bsc

        lo_pe = local_comparison(params, "BEC", "error", grid, depth=args.depth, cfg=cfg)
        hi_pe = local_comparison(params, "BSC", "error", grid, init=bsc(0.0),
                                 depth=args.depth, cfg=cfg)
        lo_i = local_comparison(params, "BSC", "info", grid, init=bsc(0.0),
                                depth=args.depth, cfg=cfg)
        hi_i = local_comparison(params, "BEC", "info", grid, depth=args.depth, cfg=cfg)
        slack = 1e-10
        bracket_ok = (
            lo_pe.functional_track[-1].p_e <= exact.p_e + slack
            and hi_pe.functional_track[-1].p_e >= exact.p_e - slack
            and lo_i.functional_track[-1].capacity <= exact.mutual_info + slack
            and hi_i.functional_track[-1].capacity >= exact.mutual_info - slack
        )

    status = "pass" if (ok and bracket_ok) else "fail"
    if args.format == "json":
        _emit(
            _json_text(
                {
                    "command": "oracle-check",
                    "d": args.d,
                    "delta": args.delta,
                    "depth": args.depth,
                    "grid_cells": args.cells,
                },
                {
                    "status": status,
                    "max_discrepancy": worst,
                    "gaps": gaps,
                    "quantized_bracket_ok": bracket_ok,
                },
            ),
            args.output,
        )
    else:
        _emit(
            f"{status} max_discrepancy {_fmt(worst)} "
            f"quantized_bracket {'ok' if bracket_ok else 'violated'}\n",
            args.output,
        )
    return EXIT_OK if status == "pass" else EXIT_INVARIANT


def build_parser() -> _Parser:
    parser = _Parser(
        prog="treebp",
        description=(
            "Bounds on reconstruction error and root-leaf information for "
            "broadcasting on d-ary trees"
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--format", choices=("csv", "json"), default=None)
        p.add_argument("--output", default=None, metavar="PATH",
                       help="output file (default: stdout)")

    p = sub.add_parser("threshold", help="bisect the reconstruction threshold")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--tol", type=float, default=1e-6)
    add_common(p)
    p.set_defaults(func=cmd_threshold, default_format="text")

    p = sub.add_parser("bounds", help="per-level bound table at one noise level")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--delta", type=float, default=None)
    p.add_argument("--tau", type=float, default=None)
    p.add_argument("--cells", type=int, default=1024)
    p.add_argument("--depth", default="auto")
    p.add_argument("--tol", type=float, default=1e-11)
    add_common(p)
    p.set_defaults(func=cmd_bounds, default_format="csv")

    p = sub.add_parser("sweep", help="bound curves over distances below threshold")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--taus", default=None,
                   help="comma-separated list of distances below threshold")
    p.add_argument("--tau-min", type=float, default=1e-4)
    p.add_argument("--tau-max", type=float, default=1e-2)
    p.add_argument("--tau-count", type=int, default=15)
    p.add_argument("--method", choices=("scalar", "local", "two-atom"),
                   default="local")
    p.add_argument("--cells", type=int, default=1024)
    p.add_argument("--depth-cap", type=int, default=None)
    p.add_argument("--tol", type=float, default=1e-11)
    p.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    add_common(p)
    p.set_defaults(func=cmd_sweep, default_format="csv")

    p = sub.add_parser("exponent", help="near-critical slope and exponent fits")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--cells", type=int, default=1024)
    p.add_argument("--tau-min", type=float, default=1e-4)
    p.add_argument("--tau-max", type=float, default=1e-2)
    p.add_argument("--tau-count", type=int, default=15)
    p.add_argument("--tol", type=float, default=1e-11)
    p.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    add_common(p)
    p.set_defaults(func=cmd_exponent, default_format="json")

    p = sub.add_parser("oracle-check",
                       help="exact enumeration vs the layer pipeline")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--depth", type=int, required=True)
    p.add_argument("--cells", type=int, default=64)
    add_common(p)
    p.set_defaults(func=cmd_oracle_check, default_format="text")

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.format is None:
            args.format = args.default_format
        return args.func(args)
    except UsageError as exc:
        sys.stderr.write(f"usage error: {exc}\n")
        return EXIT_USAGE
    except ResourceLimitError as exc:
        sys.stderr.write(f"resource limit: {exc}\n")
        return EXIT_RESOURCE
    except ValueError as exc:
        sys.stderr.write(f"usage error: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
