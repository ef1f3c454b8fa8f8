"""Command-line front end.

Commands
--------
``m-eval``       tabulate the multiplier ``m`` on an x-grid
``kernel-eval``  tabulate ``phi_t`` on an r-grid, skipping a band around ``r = t``
``verify``       run claims and write a versioned report
``transform``    apply an operator to a field file

Exit status is 0 on success, 1 when an evaluation or a claim fails, and 2
for bad arguments or malformed input.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time
from pathlib import Path
from typing import Sequence

import numpy as np

from .claims import CLAIMS, DEFAULT_TOLERANCES, ClaimContext, relative_l2, resolve_tolerances, run_claims
from .grid import GridFormatError, TGrid, lp_norm, read_field, write_field
from .kernel import phi_t
from .multiplier import m_values
from .specfun import SeriesConvergenceError
from .transforms import (
    GridResolutionError,
    maximal_apply,
    mt_apply_conv,
    mt_apply_fourier,
    riesz_fft,
    riesz_truncated_direct,
)

SCHEMA = "rieszkit-report/1"
EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    """Bad command-line input; maps to exit status 2."""


# ---------------------------------------------------------------------------
# argument helpers
# ---------------------------------------------------------------------------


def parse_int_set(text: str) -> tuple[int, ...]:
    """``"3"``, ``"1,2"`` or ``"1..8"`` (inclusive) into a sorted tuple."""
    out: set[int] = set()
    try:
        for part in text.split(","):
            part = part.strip()
            if ".." in part:
                lo, hi = part.split("..")
                out.update(range(int(lo), int(hi) + 1))
            else:
                out.add(int(part))
    except ValueError as exc:
        raise UsageError(f"cannot parse dimension list {text!r}") from exc
    if not out:
        raise UsageError("empty dimension list")
    return tuple(sorted(out))


def parse_p_set(text: str) -> tuple[float, ...]:
    """Comma-separated exponents; ``inf`` is accepted."""
    out = []
    for part in text.split(","):
        try:
            p = float(part.strip())
        except ValueError as exc:
            raise UsageError(f"cannot parse exponent {part!r}") from exc
        if not p >= 1:
            raise UsageError(f"exponent must be >= 1, got {p}")
        out.append(p)
    return tuple(out)


def split_tolerance_flags(argv: Sequence[str]) -> tuple[list[str], dict[str, float]]:
    """Pull ``--tol.NAME VALUE`` and ``--tol.NAME=VALUE`` out of ``argv``."""
    rest: list[str] = []
    tol: dict[str, float] = {}
    i = 0
    argv = list(argv)
    while i < len(argv):
        arg = argv[i]
        if arg.startswith("--tol."):
            name, eq, val = arg[len("--tol."):].partition("=")
            if not eq:
                if i + 1 >= len(argv):
                    raise UsageError(f"{arg} needs a value")
                val = argv[i + 1]
                i += 1
            if name not in DEFAULT_TOLERANCES:
                raise UsageError(f"unknown tolerance {name!r}; known: {', '.join(sorted(DEFAULT_TOLERANCES))}")
            try:
                tol[name] = float(val)
            except ValueError as exc:
                raise UsageError(f"tolerance {name} must be a number, got {val!r}") from exc
            if tol[name] < 0:
                raise UsageError(f"tolerance {name} must be nonnegative")
        else:
            rest.append(arg)
        i += 1
    return rest, tol


def _tgrid_from(args: argparse.Namespace) -> TGrid | None:
    if args.t_min is None and args.t_count is None and args.t_ratio is None:
        return None
    if args.t_min is None or args.t_count is None:
        raise UsageError("--t-min and --t-count are required together")
    try:
        return TGrid(args.t_min, args.t_ratio if args.t_ratio is not None else 2.0**0.25, args.t_count)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rieszkit", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def add_output(p: argparse.ArgumentParser) -> None:
        p.add_argument("--format", choices=("csv", "json"), default="json", help="output format")
        p.add_argument("--out", type=Path, default=None, help="output path (default: stdout)")

    def add_tgrid(p: argparse.ArgumentParser) -> None:
        p.add_argument("--t-min", type=float, default=None, help="smallest truncation radius")
        p.add_argument("--t-ratio", type=float, default=None, help="ratio between radii (default 2^(1/4))")
        p.add_argument("--t-count", type=int, default=None, help="number of radii")

    m = sub.add_parser("m-eval", help="tabulate the multiplier m(x)")
    m.add_argument("--d", type=int, required=True)
    m.add_argument("--x-min", type=float, default=0.0)
    m.add_argument("--x-max", type=float, default=10.0)
    m.add_argument("--n", type=int, default=100)
    add_output(m)

    k = sub.add_parser("kernel-eval", help="tabulate the kernel phi_t(r)")
    k.add_argument("--d", type=int, required=True)
    k.add_argument("--t", type=float, default=1.0)
    k.add_argument("--x-min", type=float, default=0.05, help="smallest |x|")
    k.add_argument("--x-max", type=float, default=10.0, help="largest |x|")
    k.add_argument("--n", type=int, default=200)
    k.add_argument("--band", type=float, default=1e-3,
                   help="relative half-width of the excluded band around |x| = t")
    add_output(k)

    v = sub.add_parser("verify", help="run verification claims",
                       epilog="Tolerances: " + ", ".join(f"--tol.{k}" for k in sorted(DEFAULT_TOLERANCES)))
    v.add_argument("--claims", default=None, help=f"comma-separated ids (default: all of {', '.join(sorted(CLAIMS))})")
    v.add_argument("--d", default=None, help="dimensions, e.g. 2, 1,2 or 1..8")
    v.add_argument("--p", default=None, help="exponents, e.g. 2,4 or inf")
    v.add_argument("--grid-n", type=int, default=None)
    v.add_argument("--box", type=float, default=None)
    v.add_argument("--seed", type=int, default=0)
    add_tgrid(v)
    add_output(v)

    t = sub.add_parser("transform", help="apply an operator to a field file")
    t.add_argument("input", type=Path)
    t.add_argument("--op", choices=("riesz", "riesz_trunc", "mt", "maximal"), required=True)
    t.add_argument("--j", type=int, default=1, help="Riesz axis (1-based)")
    t.add_argument("--t", type=float, default=None, help="truncation radius")
    t.add_argument("--route", choices=("fourier", "conv"), default="fourier",
                   help="route for mt and maximal")
    add_tgrid(t)
    t.add_argument("--out", type=Path, required=True, help="output field path; sidecar is OUT.json")
    return parser


# ---------------------------------------------------------------------------
# table output
# ---------------------------------------------------------------------------


def _emit(text: str, out: Path | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text)


def _csv_text(header: Sequence[str], rows: Sequence[Sequence], comment: str | None = None) -> str:
    buf = io.StringIO()
    if comment:
        buf.write(f"# {comment}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([repr(v) if isinstance(v, float) else v for v in row])
    return buf.getvalue()


def _json_text(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=True) + "\n"


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_m_eval(args: argparse.Namespace) -> int:
    if args.n < 1 or not args.x_max >= args.x_min or args.x_min < 0:
        raise UsageError("need n >= 1 and 0 <= x-min <= x-max")
    if args.d < 1:
        raise UsageError("d must be a positive integer")
    x = np.linspace(args.x_min, args.x_max, args.n)
    vals, errs = m_values(x, args.d, with_error=True)
    routes = np.where(x < 2.0, "series", np.where(x < 20.0, "integral", "asymptotic"))
    rows = [(float(a), float(b), str(r), float(e)) for a, b, r, e in zip(x, vals, routes, errs)]
    header = ("x", "m", "route", "err_est")
    if args.format == "csv":
        _emit(_csv_text(header, rows), args.out)
    else:
        _emit(_json_text({"schema": SCHEMA, "d": args.d, "rows": [dict(zip(header, r)) for r in rows]}), args.out)
    return EXIT_OK


def cmd_kernel_eval(args: argparse.Namespace) -> int:
    if args.n < 1 or not (0 < args.x_min <= args.x_max) or not args.t > 0 or not 0 < args.band < 1:
        raise UsageError("need n >= 1, 0 < x-min <= x-max, t > 0 and 0 < band < 1")
    if args.d < 1:
        raise UsageError("d must be a positive integer")
    r = np.linspace(args.x_min, args.x_max, args.n)
    lo, hi = args.t * (1.0 - args.band), args.t * (1.0 + args.band)
    keep = (r <= lo) | (r >= hi)
    vals = phi_t(r[keep], args.t, args.d)
    rows = [(float(a), float(b)) for a, b in zip(r[keep], np.atleast_1d(vals))]
    header = ("r", "phi_t")
    meta = {"d": args.d, "t": args.t, "exclusion_band": [lo, hi]}
    if args.format == "csv":
        _emit(_csv_text(header, rows, f"d={args.d} t={args.t!r} exclusion_band=[{lo!r}, {hi!r}]"), args.out)
    else:
        _emit(_json_text({"schema": SCHEMA, **meta, "rows": [dict(zip(header, r)) for r in rows]}), args.out)
    return EXIT_OK


def _report_csv(rows) -> str:
    header = ("claim_id", "status", "computed", "reference", "tolerance", "rule", "route", "params")
    table = []
    for r in rows:
        table.append((r.claim_id, r.status, ";".join(repr(v) for v in r.computed),
                      ";".join(repr(v) for v in r.reference), repr(r.tolerance), r.rule, r.route,
                      json.dumps(r.params, sort_keys=True)))
    return _csv_text(header, table)


def cmd_verify(args: argparse.Namespace, tol_overrides: dict[str, float]) -> int:
    ids = [c.strip() for c in args.claims.split(",")] if args.claims else None
    if ids:
        unknown = [c for c in ids if c not in CLAIMS]
        if unknown:
            raise UsageError(f"unknown claim ids {unknown}; known: {', '.join(sorted(CLAIMS))}")
    try:
        tol = resolve_tolerances(tol_overrides)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    if args.grid_n is not None and (args.grid_n < 16 or args.grid_n & (args.grid_n - 1)):
        raise UsageError("--grid-n must be a power of two >= 16")
    if args.box is not None and not args.box > 0:
        raise UsageError("--box must be positive")
    ctx = ClaimContext(
        dims=parse_int_set(args.d) if args.d else None,
        ps=parse_p_set(args.p) if args.p else None,
        grid_n=args.grid_n,
        box=args.box,
        tgrid=_tgrid_from(args),
        seed=args.seed,
        tol=tol,
    )
    try:
        rows, timings = run_claims(ids, ctx)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    ok = all(r.passed for r in rows)
    if args.format == "csv":
        text = _report_csv(rows)
    else:
        text = _json_text({
            "schema": SCHEMA,
            "status": "pass" if ok else "fail",
            "tolerances": tol,
            "rows": [r.to_dict() for r in rows],
        })
    _emit(text, args.out)
    for cid, secs in sorted(timings.items()):
        n_fail = sum(1 for r in rows if r.claim_id == cid and not r.passed)
        print(f"{cid}: {'FAIL' if n_fail else 'pass'} ({secs:.1f} s)", file=sys.stderr)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_transform(args: argparse.Namespace) -> int:
    try:
        f = read_field(args.input)
    except (OSError, GridFormatError) as exc:
        raise UsageError(f"cannot read field: {exc}") from exc
    if f.domain != "space":
        raise UsageError("transform expects a space-domain field")
    if not 1 <= args.j <= f.d:
        raise UsageError(f"--j must be in 1..{f.d}")
    meta: dict = {"op": args.op, "input": str(args.input), "d": f.d, "n_per_axis": f.n, "box_side": f.box_side}
    start = time.perf_counter()
    try:
        if args.op == "riesz":
            out = riesz_fft(f, args.j)
            meta.update(route="fourier", j=args.j)
        elif args.op == "riesz_trunc":
            if args.t is None:
                raise UsageError("riesz_trunc needs --t")
            out = riesz_truncated_direct(f, args.j, args.t)
            via = mt_apply_fourier(riesz_fft(f, args.j), args.t)
            gap = lp_norm(out.with_values(out.values - via.values), 2) / max(lp_norm(f, 2), 1e-300)
            budget = 1e-2 * 256.0 / f.n
            meta.update(route="direct", j=args.j, t=args.t,
                        check={"compare": "fourier m(t|xi|) R_j", "relative_l2_gap": gap, "budget": budget,
                               "within_budget": gap <= budget})
        elif args.op == "mt":
            if args.t is None:
                raise UsageError("mt needs --t")
            if not args.t > 0:
                raise UsageError("--t must be positive")
            out = mt_apply_conv(f, args.t) if args.route == "conv" else mt_apply_fourier(f, args.t)
            meta.update(route=args.route, t=args.t)
            if args.route == "conv":
                meta["fourier_gap"] = relative_l2(out, mt_apply_fourier(f, args.t))
        else:
            tg = _tgrid_from(args)
            if tg is None:
                tg = TGrid.single(args.t) if args.t is not None else TGrid.default(f.n, f.box_side)
            out = maximal_apply(f, tg, route=args.route)
            meta.update(route=args.route, t_grid={"t_min": tg.t_min, "ratio": tg.ratio, "count": tg.count},
                        bound="lower estimate of the supremum over t > 0")
    except GridResolutionError as exc:
        raise UsageError(str(exc)) from exc
    meta["seconds"] = time.perf_counter() - start
    write_field(args.out, out)
    sidecar = args.out.with_name(args.out.name + ".json")
    sidecar.write_text(_json_text({"schema": SCHEMA, **meta}))
    return EXIT_OK


def main(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        rest, tol = split_tolerance_flags(argv)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"rieszkit: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        args = parser.parse_args(rest)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    if tol and args.command != "verify":
        print("rieszkit: error: --tol.* flags apply to verify only", file=sys.stderr)
        return EXIT_USAGE
    try:
        if args.command == "m-eval":
            return cmd_m_eval(args)
        if args.command == "kernel-eval":
            return cmd_kernel_eval(args)
        if args.command == "verify":
            return cmd_verify(args, tol)
        return cmd_transform(args)
    except UsageError as exc:
        print(f"rieszkit: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, ArithmeticError, SeriesConvergenceError) as exc:
        print(f"rieszkit: evaluation failed: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
