"""Command-line front end: ``wwbkit bound | mse | validate``.

Exit codes: 0 on success, 1 when a check fails, 2 on usage, parse or I/O
errors. ``WWBKIT_WORKERS`` is the fallback for ``--workers``.
"""

from __future__ import annotations

import argparse
import copy
import csv
import dataclasses
import io
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .bench import mse_sweep
from .optimizer import LogGrid, OptimizerConfig
from .parallel import resolve_workers
from .scenario import U64_MAX, Scenario, ScenarioError, load_scenario_dict, scenario_from_dict
from .sweep import bound_sweep_timed
from .validation import SUITES, run_suite

EXIT_OK = 0
EXIT_CHECK = 1
EXIT_USAGE = 2


class UsageError(Exception):
    """Bad flag value or unusable input; reported with exit code 2."""


# ---------------------------------------------------------------------------
# Flag parsing
# ---------------------------------------------------------------------------

def _floats(text: str, flag: str) -> list[float]:
    try:
        vals = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"{flag}: expected comma-separated numbers, got {text!r}") from None
    if not vals:
        raise UsageError(f"{flag}: empty list")
    return vals


def parse_h_grid_flag(text: str):
    """``min:max:count`` for a log grid, or a comma-separated list of values."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise UsageError(f"--h-grid: expected min:max:count, got {text!r}")
        try:
            return LogGrid(float(parts[0]), float(parts[1]), int(parts[2]))
        except ValueError as exc:
            raise UsageError(f"--h-grid: {exc}") from None
    return tuple(_floats(text, "--h-grid"))


def parse_delta_sweep(text: str) -> list[float]:
    """``a:b:step`` inclusive of ``b`` when it lies on the step lattice."""
    parts = text.split(":")
    if len(parts) != 3:
        raise UsageError(f"--sweep-delta: expected a:b:step, got {text!r}")
    try:
        a, b, step = (float(p) for p in parts)
    except ValueError:
        raise UsageError(f"--sweep-delta: expected numbers, got {text!r}") from None
    if step <= 0 or b < a:
        raise UsageError("--sweep-delta: need step > 0 and b >= a")
    n = int(np.floor((b - a) / step + 1e-9)) + 1
    return [a + i * step for i in range(n)]


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    if isinstance(x, str):
        return x
    x = float(x)
    return format(0.0 if x == 0.0 else x, ".17g")


# ---------------------------------------------------------------------------
# Scenario loading with flag overrides
# ---------------------------------------------------------------------------

def _load_doc(path: str) -> dict:
    try:
        return load_scenario_dict(path)
    except FileNotFoundError:
        raise UsageError(f"{path}: no such file") from None
    except OSError as exc:
        raise UsageError(f"{path}: {exc.strerror or exc}") from None
    except ScenarioError as exc:
        raise UsageError(str(exc)) from None


def _build(doc: dict, path: str) -> Scenario:
    try:
        return scenario_from_dict(doc)
    except ScenarioError as exc:
        raise UsageError(f"{path}: {exc}") from None


def _apply_flags(sc: Scenario, args) -> Scenario:
    opt = sc.optimizer
    changes = {}
    if args.refine is not None:
        changes["refine"] = bool(args.refine)
    if args.s_grid is not None:
        changes["s_grid"] = tuple(_floats(args.s_grid, "--s-grid"))
    if args.h_grid is not None:
        changes["h_grid"] = parse_h_grid_flag(args.h_grid)
    try:
        opt = dataclasses.replace(opt, **changes)
        opt.h_grids(sc.prior)
    except ValueError as exc:
        raise UsageError(f"optimizer flags: {exc}") from None
    updates = {"optimizer": opt}
    if args.seed is not None:
        updates["seed"] = args.seed
    if getattr(args, "trials", None) is not None:
        updates["trials"] = args.trials
    try:
        return dataclasses.replace(sc, **updates)
    except ScenarioError as exc:
        raise UsageError(str(exc)) from None


def _scenarios(args) -> list[tuple[Optional[float], Scenario]]:
    """Scenario per opening angle (or a single one without ``--sweep-delta``)."""
    doc = _load_doc(args.scenario)
    if args.sweep_delta is None:
        return [(None, _apply_flags(_build(doc, args.scenario), args))]
    geo = doc.get("geometry") if isinstance(doc, dict) else None
    if not isinstance(geo, dict) or geo.get("type") != "v_shaped":
        raise UsageError(f"{args.scenario}: --sweep-delta needs a v_shaped geometry")
    out = []
    for delta in parse_delta_sweep(args.sweep_delta):
        d = copy.deepcopy(doc)
        d["geometry"]["delta_deg"] = delta
        d["geometry"].pop("name", None)
        out.append((delta, _apply_flags(_build(d, args.scenario), args)))
    return out


# ---------------------------------------------------------------------------
# Tables
# ---------------------------------------------------------------------------

def bound_header(sc: Scenario, delta: bool, timing: bool) -> list[str]:
    names = sc.param_names
    cols = ["delta_deg"] if delta else []
    cols += ["snr_db", "model"]
    cols += [f"wwb_{n}" for n in names]
    if sc.q == 2:
        cols.append(f"wwb_{names[0]}{names[1]}")
    cols += [f"h_{n}" for n in names] + [f"s_{n}" for n in names] + ["objective"]
    if timing:
        cols.append("wall_time_s")
    return cols


def bound_rows(sc: Scenario, workers: int, delta: Optional[float], timing: bool) -> list[list[str]]:
    rows = []
    for snr, (res, secs) in zip(sc.snr_db, bound_sweep_timed(sc, workers)):
        row = [] if delta is None else [delta]
        row += [snr, sc.model.kind]
        row += list(res.diag)
        if sc.q == 2:
            row.append(res.bound[0, 1])
        row += list(res.best_h) + list(res.best_s) + [res.objective]
        if timing:
            row.append(secs)
        rows.append([_fmt(x) for x in row])
    return rows


def mse_header(sc: Scenario, delta: bool, timing: bool) -> list[str]:
    names = sc.param_names
    cols = ["delta_deg"] if delta else []
    cols += ["snr_db", "model"]
    cols += [f"mse_{n}" for n in names] + [f"stderr_{n}" for n in names] + [f"wwb_{n}" for n in names]
    cols += ["trials", "seed"]
    if timing:
        cols.append("wall_time_s")
    return cols


def mse_rows(sc: Scenario, workers: int, delta: Optional[float], timing: bool):
    rows, violations = [], []
    for r in mse_sweep(sc, workers=workers):
        row = [] if delta is None else [delta]
        row += [r.snr_db, sc.model.kind]
        row += list(r.mse) + list(r.stderr) + list(r.wwb)
        row += [int(r.trials), int(r.seed)]
        if timing:
            row.append(r.elapsed)
        rows.append([_fmt(x) for x in row])
        slack = np.nan_to_num(r.stderr, nan=0.0)
        if np.any(r.mse < r.wwb - 2.0 * slack):
            violations.append(r.snr_db)
    return rows, violations


def _write_csv(header: list[str], rows: list[list[str]], out: Optional[str]) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    text = buf.getvalue()
    if out is None or out == "-":
        sys.stdout.write(text)
        return
    try:
        Path(out).write_text(text)
    except OSError as exc:
        raise UsageError(f"{out}: {exc.strerror or exc}") from None


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def _workers(args) -> int:
    try:
        return resolve_workers(args.workers)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def cmd_bound(args) -> int:
    """Optimized bound per SNR point (one block per opening angle with ``--sweep-delta``)."""
    workers = _workers(args)
    items = _scenarios(args)
    sweep = args.sweep_delta is not None
    header = bound_header(items[0][1], sweep, args.timing)
    rows = []
    for delta, sc in items:
        rows += bound_rows(sc, workers, delta, args.timing)
    _write_csv(header, rows, args.out)
    return EXIT_OK


def cmd_mse(args) -> int:
    """MAP Monte Carlo MSE paired with the bound per SNR point."""
    if args.trials is not None and args.trials < 1:
        raise UsageError("--trials must be >= 1")
    workers = _workers(args)
    items = _scenarios(args)
    sweep = args.sweep_delta is not None
    header = mse_header(items[0][1], sweep, args.timing)
    rows, bad = [], []
    for delta, sc in items:
        r, v = mse_rows(sc, workers, delta, args.timing)
        rows += r
        bad += v
    _write_csv(header, rows, args.out)
    if args.check and bad:
        print(f"MSE below WWB - 2 stderr at snr_db={bad}", file=sys.stderr)
        return EXIT_CHECK
    return EXIT_OK


def cmd_validate(args) -> int:
    """Run oracle suites; exit 0 only if every check passes."""
    names = list(SUITES) if args.suite == "all" else [args.suite]
    ok = True
    for name in names:
        report = run_suite(name, seed=args.seed if args.seed is not None else 0)
        print("\n".join(report.lines(verbose=args.verbose)))
        ok &= report.passed
    return EXIT_OK if ok else EXIT_CHECK


# ---------------------------------------------------------------------------
# Argument parser
# ---------------------------------------------------------------------------

def _u64(text: str) -> int:
    try:
        val = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if not 0 <= val <= U64_MAX:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return val


def _common(p: argparse.ArgumentParser, trials: bool) -> None:
    p.add_argument("--scenario", required=True, metavar="PATH", help="scenario JSON file")
    p.add_argument("--out", metavar="PATH", help="output CSV (stdout when omitted or '-')")
    p.add_argument("--seed", type=_u64, help="override the scenario seed")
    if trials:
        p.add_argument("--trials", type=int, help="Monte Carlo trials per SNR point")
    p.add_argument("--workers", type=int, help="worker processes (default: $WWBKIT_WORKERS, then CPU count)")
    p.add_argument("--refine", type=int, choices=(0, 1), help="one grid refinement pass around the optimum")
    p.add_argument("--s-grid", metavar="LIST", help="comma-separated exponents in (0, 1)")
    p.add_argument("--h-grid", metavar="SPEC", help="min:max:count log grid or a comma-separated list")
    p.add_argument("--sweep-delta", metavar="A:B:STEP", help="vary the V-shaped opening angle (degrees)")
    p.add_argument("--timing", action="store_true", help="append a wall_time_s column (not reproducible)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wwbkit", description="Weiss-Weinstein bounds for DOA estimation.")
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("bound", help="optimized bound per SNR point")
    _common(p, trials=False)
    p.set_defaults(func=cmd_bound)
    p = sub.add_parser("mse", help="MAP Monte Carlo MSE against the bound")
    _common(p, trials=True)
    p.add_argument("--check", action="store_true", help="exit 1 if any MSE < WWB - 2 stderr")
    p.set_defaults(func=cmd_mse)
    p = sub.add_parser("validate", help="oracle validation suites")
    p.add_argument("suite", choices=sorted(SUITES) + ["all"])
    p.add_argument("--seed", type=_u64, help="seed for the random instances (default 0)")
    p.add_argument("--verbose", action="store_true", help="list every check")
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    raise SystemExit(main())
