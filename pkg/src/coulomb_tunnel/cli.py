"""``coulomb-tunnel`` command line.

Exit codes: 0 success, 1 computation failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import asdict
from typing import Sequence

import numpy as np

from .errors import CoulombTunnelError, DomainError, IntegrationError
from .oracle import BarrierParams, CutoffSpec, integrate_cutoff
from .scatter import COLUMNS, EnergyGrid, eps_floor, oscillation_census, scan, transmission
from .selftest import run_selftest
from .wavefield import PhysParams

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def fmt(x) -> str:
    """17 significant digits, lowercase exponent, ``nan``/``inf`` spelled out."""
    if isinstance(x, str):
        return x
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return "%.17g" % x


def _json_value(x):
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else None
    return x


def write_table(rows: Sequence[dict], columns: Sequence[str], fmt_name: str, out) -> None:
    if fmt_name == "json":
        json.dump([{c: _json_value(r[c]) for c in columns} for r in rows], out, indent=1)
        out.write("\n")
        return
    w = csv.writer(out, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([fmt(r[c]) for c in columns])


def write_svg(path: str, xs, series: dict, log_x: bool, title: str) -> None:
    """Minimal static line chart (no dependencies)."""
    width, height, pad = 720, 420, 50
    xs = np.asarray(xs, dtype=float)
    xv = np.log10(xs) if log_x else xs
    x0, x1 = float(xv.min()), float(xv.max())
    if x1 == x0:
        x1 = x0 + 1.0

    def px(v):
        return pad + (v - x0) / (x1 - x0) * (width - 2 * pad)

    def py(v):
        return height - pad - v * (height - 2 * pad)

    colors = ("#1f5fa8", "#b8322a", "#2c8a3a")
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width / 2}" y="20" text-anchor="middle" font-size="14">{title}</text>',
        f'<line x1="{pad}" y1="{py(0)}" x2="{width - pad}" y2="{py(0)}" stroke="black"/>',
        f'<line x1="{pad}" y1="{py(0)}" x2="{pad}" y2="{py(1)}" stroke="black"/>',
        f'<text x="{pad - 8}" y="{py(1) + 4}" text-anchor="end" font-size="11">1</text>',
        f'<text x="{pad - 8}" y="{py(0) + 4}" text-anchor="end" font-size="11">0</text>',
    ]
    left = f"1e{x0:.2g}" if log_x else f"{x0:.3g}"
    right = f"1e{x1:.2g}" if log_x else f"{x1:.3g}"
    parts.append(f'<text x="{pad}" y="{height - pad + 18}" font-size="11">{left}</text>')
    parts.append(
        f'<text x="{width - pad}" y="{height - pad + 18}" text-anchor="end" font-size="11">{right}</text>'
    )
    for (name, ys), color in zip(series.items(), colors):
        ys = np.asarray(ys, dtype=float)
        good = np.isfinite(ys)
        pts = " ".join(f"{px(a):.2f},{py(b):.2f}" for a, b in zip(xv[good], ys[good]))
        parts.append(f'<polyline fill="none" stroke="{color}" stroke-width="1" points="{pts}"/>')
        parts.append(
            f'<text x="{width - pad}" y="{pad + 14 * list(series).index(name)}" text-anchor="end" '
            f'font-size="12" fill="{color}">{name}</text>'
        )
    parts.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(parts) + "\n")


def _open_out(path: str | None):
    return open(path, "w", newline="") if path else None


def _emit(args, producer) -> None:
    fh = _open_out(args.out)
    try:
        producer(fh or sys.stdout)
    finally:
        if fh:
            fh.close()


def _positive(name: str, value: float) -> float:
    if not (math.isfinite(value) and value > 0):
        raise UsageError(f"--{name} must be positive, got {value!r}")
    return value


# ---------------------------------------------------------------------------
# commands


def cmd_scan(args) -> int:
    _positive("u0", args.u0)
    if args.points <= 0:
        raise UsageError("--points must be at least 1")
    _positive("emin", args.emin)
    if args.emax < args.emin:
        raise UsageError("--emax must not be below --emin")
    if args.emin < eps_floor():
        raise UsageError(f"--emin is below the energy floor {eps_floor():g}")
    try:
        grid = EnergyGrid(args.emin, args.emax, args.points, args.grid)
    except DomainError as exc:
        raise UsageError(str(exc)) from exc
    rows = scan(args.u0, grid, jobs=args.jobs)
    _emit(args, lambda out: write_table([asdict(r) for r in rows], COLUMNS, args.format, out))
    if args.svg:
        write_svg(
            args.svg,
            [r.epsilon for r in rows],
            {"T": [r.T for r in rows], "R": [r.R for r in rows]},
            log_x=args.grid == "log",
            title=f"u0 = {args.u0:g}",
        )
    return EXIT_OK if all(r.status == "ok" for r in rows) else EXIT_FAIL


def point_record(eps: float, u0: float) -> dict:
    """Flat record of every quantity in a single-energy evaluation."""
    res = transmission(PhysParams(eps, u0))
    rec: dict = {"epsilon": res.epsilon, "u0": res.u0, "T": res.T, "R": res.R}
    for name in ("c_inc", "c_tr", "c_refl"):
        val = getattr(res, name)
        rec[f"{name}_re"], rec[f"{name}_im"] = val.real, val.imag
    if res.amps is not None:
        for name in ("a_l1", "a_l2", "a_r1", "a_r2"):
            val = getattr(res.amps, name)
            rec[f"{name}_re"], rec[f"{name}_im"] = val.real, val.imag
    for key in sorted(res.diagnostics):
        rec[key] = res.diagnostics[key]
    rec["flux_imbalance"] = res.flux_imbalance
    rec["status"] = res.status
    return rec


def cmd_point(args) -> int:
    _positive("u0", args.u0)
    _positive("epsilon", args.epsilon)
    rec = point_record(args.epsilon, args.u0)

    def produce(out):
        if args.format == "json":
            json.dump({k: _json_value(v) for k, v in rec.items()}, out, indent=1)
            out.write("\n")
        else:
            w = csv.writer(out, lineterminator="\n")
            w.writerow(("field", "value"))
            for k, v in rec.items():
                w.writerow((k, fmt(v)))

    _emit(args, produce)
    return EXIT_OK if rec["status"] == "ok" else EXIT_FAIL


def decade_windows(lo: float, hi: float) -> list[tuple[float, float]]:
    """Split [lo, hi] at the powers of ten strictly inside it."""
    k0 = math.floor(math.log10(lo)) + 1
    k1 = math.ceil(math.log10(hi)) - 1
    inner = [10.0**k for k in range(k0, k1 + 1) if lo < 10.0**k < hi]
    edges = [lo, *inner, hi]
    return list(zip(edges, edges[1:]))


OSC_COLUMNS = ("window_lo", "window_hi", "samples", "count", "min_separation", "under_resolved")


def oscillation_report(u0: float, lo: float, hi: float, points: int, jobs: int = 1):
    rows = scan(u0, EnergyGrid(lo, hi, points, "log"), jobs=jobs)
    report = []
    for a, b in decade_windows(lo, hi):
        c = oscillation_census(rows, (a, b))
        report.append(
            {
                "window_lo": a,
                "window_hi": b,
                "samples": c.samples,
                "count": c.count,
                "min_separation": -1 if c.min_separation is None else c.min_separation,
                "under_resolved": c.under_resolved,
            }
        )
    return rows, report


def cmd_oscillations(args) -> int:
    _positive("u0", args.u0)
    _positive("window-lo", args.window_lo)
    if args.window_hi <= args.window_lo:
        raise UsageError("--window-hi must exceed --window-lo")
    if args.points < 3:
        raise UsageError("--points must be at least 3")
    if args.window_lo < eps_floor():
        raise UsageError(f"--window-lo is below the energy floor {eps_floor():g}")
    rows, report = oscillation_report(args.u0, args.window_lo, args.window_hi, args.points, args.jobs)
    _emit(args, lambda out: write_table(report, OSC_COLUMNS, args.format, out))
    if any(r["under_resolved"] for r in report):
        print("warning: neighbouring maxima closer than 4 samples; raise --points", file=sys.stderr)
    return EXIT_OK if all(r.status == "ok" for r in rows) else EXIT_FAIL


CUT_COLUMNS = ("delta", "T", "R", "flux_imbalance", "steps", "status")


def _parse_deltas(text: str) -> list[float]:
    try:
        vals = [float(t) for t in text.replace(",", " ").split()]
    except ValueError as exc:
        raise UsageError(f"--deltas: {exc}") from exc
    if not vals or any(not v > 0 for v in vals):
        raise UsageError("--deltas needs one or more positive numbers")
    return vals


def cmd_cutoff(args) -> int:
    deltas = _parse_deltas(args.deltas)
    _positive("epsilon", args.epsilon)
    if args.u0 < 0:
        raise UsageError("--u0 must be non-negative")
    try:
        p = BarrierParams(args.epsilon, args.u0)
    except DomainError as exc:
        raise UsageError(str(exc)) from exc
    out_rows = []
    ok = True
    for d in deltas:
        row = {"delta": d, "T": math.nan, "R": math.nan, "flux_imbalance": math.nan, "steps": 0}
        try:
            spec = CutoffSpec(d, z_span=args.z_span, step=args.step, shape=args.shape)
            res = integrate_cutoff(p, spec)
            row.update(T=res.T, R=res.R, flux_imbalance=res.flux_imbalance, steps=res.steps)
            row["status"] = "ok" if res.adequate else "error:step too coarse"
        except (IntegrationError, DomainError) as exc:
            row["status"] = f"error:{exc}"
        ok = ok and row["status"] == "ok"
        out_rows.append(row)
    _emit(args, lambda out: write_table(out_rows, CUT_COLUMNS, args.format, out))
    return EXIT_OK if ok else EXIT_FAIL


def cmd_selftest(args) -> int:
    if args.tolerance is not None and not args.tolerance > 0:
        raise UsageError("--tolerance must be positive")
    results = run_selftest(args.tolerance)
    rows = [
        {"check": r.name, "worst": r.worst, "limit": r.limit, "status": "pass" if r.passed else "FAIL"}
        for r in results
    ]
    _emit(args, lambda out: write_table(rows, ("check", "worst", "limit", "status"), args.format, out))
    return EXIT_OK if all(r.passed for r in results) else EXIT_FAIL


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="output file (default stdout)")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--jobs", type=int, default=1, help="worker processes")

    parser = argparse.ArgumentParser(
        prog="coulomb-tunnel", description="Tunnelling through the 1D Coulomb barrier u0/|z|."
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("scan", parents=[common], help="T and R over an energy grid")
    p.add_argument("--u0", type=float, default=1.0)
    p.add_argument("--emin", type=float, default=1e-3)
    p.add_argument("--emax", type=float, default=1e2)
    p.add_argument("--points", type=int, default=500)
    p.add_argument("--grid", choices=("log", "linear"), default="log")
    p.add_argument("--svg", help="also write a line chart to this path")
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("point", parents=[common], help="full record at one energy")
    p.add_argument("--u0", type=float, default=1.0)
    p.add_argument("--epsilon", type=float, required=True)
    p.set_defaults(func=cmd_point)

    p = sub.add_parser("oscillations", parents=[common], help="maxima of T per decade")
    p.add_argument("--u0", type=float, default=1.0)
    p.add_argument("--window-lo", type=float, default=1e-3)
    p.add_argument("--window-hi", type=float, default=1e-1)
    p.add_argument("--points", type=int, default=4000)
    p.set_defaults(func=cmd_oscillations)

    p = sub.add_parser("cutoff", parents=[common], help="T with the core cut off at delta")
    p.add_argument("--u0", type=float, default=1.0)
    p.add_argument("--epsilon", type=float, default=1.0)
    p.add_argument("--deltas", required=True, help="comma or space separated list")
    p.add_argument("--shape", choices=("flat", "ramp"), default="flat")
    p.add_argument("--z-span", type=float, default=400.0)
    p.add_argument("--step", type=float, default=0.005)
    p.set_defaults(func=cmd_cutoff)

    p = sub.add_parser("selftest", parents=[common], help="run the invariant suite")
    p.add_argument("--tolerance", type=float, help="replace every limit by this value")
    p.set_defaults(func=cmd_selftest)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    if getattr(args, "jobs", 1) < 1:
        print("coulomb-tunnel: error: --jobs must be at least 1", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"coulomb-tunnel {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (CoulombTunnelError, OSError) as exc:
        print(f"coulomb-tunnel {args.command}: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
