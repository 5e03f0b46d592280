"""Command line front end.

    nlelast simulate --config scenario.json --out outdir
    nlelast check --suite {identities,conservation,residuals,all}
    nlelast report --dir outdir
    nlelast --list-checks
    nlelast --version

Exit codes: 0 success, 1 configuration or usage error, 2 solver divergence.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from . import __version__
from .checks import RUN_CHECKS, SUITES, run_suite, run_verdicts
from .config import ConfigError, config_to_dict, load_config
from .conservation import DiagnosticsSeries
from .dynamics import SolverDivergence
from .simulate import run


def write_csv(series: DiagnosticsSeries, path: Path):
    cols = series.column_names(series.dim)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(cols) + "\n")
        for row in series.rows():
            fh.write(",".join(f"{v:.17g}" for v in row) + "\n")


def read_csv(path: Path):
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.rstrip("\n") for ln in fh if ln.strip()]
    if not lines:
        raise ValueError("diagnostics.csv is empty")
    header = lines[0].split(",")
    rows = []
    for i, ln in enumerate(lines[1:], start=2):
        parts = ln.split(",")
        if len(parts) != len(header):
            raise ValueError(f"row {i}: expected {len(header)} fields, got {len(parts)}")
        try:
            rows.append([float(p) for p in parts])
        except ValueError as exc:
            raise ValueError(f"row {i}: {exc}") from exc
    return header, rows


def cmd_simulate(config_path: str, out_dir: str) -> int:
    try:
        cfg = load_config(config_path)
    except (ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    try:
        state, series = run(cfg)
    except SolverDivergence as exc:
        series = getattr(exc, "partial_series", None)
        if series is not None:
            write_csv(series, out / "diagnostics.csv")
        report = {
            "config": config_to_dict(cfg),
            "diverged": True,
            "diverged_at_step": exc.step_index,
            "verdicts": {},
        }
        with open(out / "report.json", "w", encoding="utf-8") as fh:
            json.dump(report, fh, indent=2, sort_keys=True)
        print(f"solver divergence: {exc}", file=sys.stderr)
        return 2
    wall = time.perf_counter() - t0
    write_csv(series, out / "diagnostics.csv")

    from .operators import NonlocalContext
    ctx = NonlocalContext(state.u.grid, cfg.kernel, state.u)
    verdicts = run_verdicts(state, ctx, series)
    report = {
        "config": config_to_dict(cfg),
        "diverged": False,
        "samples": len(series.times),
        "wallclock_s": wall,
        "steps_per_s": (cfg.steps / wall) if wall > 0 else None,
        "verdicts": verdicts,
    }
    with open(out / "report.json", "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
    n_fail = sum(0 if v["pass"] else 1 for v in verdicts.values())
    print(f"wrote {out/'diagnostics.csv'} ({len(series.times)} samples) and report.json; "
          f"{len(verdicts) - n_fail}/{len(verdicts)} checks pass")
    return 0


def cmd_check(suite: str) -> int:
    if suite not in SUITES:
        print(f"unknown suite {suite!r}; choose from {', '.join(SUITES)}", file=sys.stderr)
        return 1
    results = run_suite(suite)
    header = f"{'check':<34} {'law':<30} {'measured':>12}  {'bound':<18} verdict"
    print(header)
    print("-" * len(header))
    for r in results:
        print(r.row())
    n_fail = sum(0 if r.passed else 1 for r in results)
    print(f"\n{len(results) - n_fail}/{len(results)} checks pass")
    return 0 if n_fail == 0 else 1


def cmd_report(out_dir: str) -> int:
    path = Path(out_dir) / "diagnostics.csv"
    if not path.exists():
        print(f"missing {path}", file=sys.stderr)
        return 1
    try:
        header, rows = read_csv(path)
    except ValueError as exc:
        print(f"bad diagnostics file: {exc}", file=sys.stderr)
        return 1
    import math
    cols = list(zip(*rows)) if rows else [[] for _ in header]
    print(f"{'column':<14} {'min':>14} {'max':>14}")
    for name, vals in zip(header, cols):
        finite = [v for v in vals if not math.isnan(v)]
        if not finite:
            print(f"{name:<14} {'nan':>14} {'nan':>14}")
            continue
        print(f"{name:<14} {min(finite):>14.6e} {max(finite):>14.6e}")
    bal_cols = [i for i, n in enumerate(header) if n.startswith("bal_")]
    if bal_cols and rows:
        worst = max(
            (abs(v) for i in bal_cols for v in cols[i] if not math.isnan(v)),
            default=float("nan"),
        )
        print(f"\nmax |balance residual| over all laws: {worst:.6e}")
    gap_cols = [i for i, n in enumerate(header) if n.startswith("gap_")]
    if gap_cols and rows:
        for i in gap_cols:
            print(f"max {header[i]}: {max(cols[i]):.6e}")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="nlelast", description="nonlocal elastodynamics runner and verifier")
    parser.add_argument("--version", action="version", version=f"nlelast {__version__}")
    parser.add_argument("--list-checks", action="store_true", help="list the per-run report checks and exit")
    sub = parser.add_subparsers(dest="command")

    p_sim = sub.add_parser("simulate", help="run a scenario and write diagnostics")
    p_sim.add_argument("--config", required=True)
    p_sim.add_argument("--out", required=True)

    p_chk = sub.add_parser("check", help="run a built-in verification suite")
    p_chk.add_argument("--suite", required=True)

    p_rep = sub.add_parser("report", help="summarize a diagnostics directory")
    p_rep.add_argument("--dir", required=True)

    args = parser.parse_args(argv)
    if args.list_checks:
        for name, desc in RUN_CHECKS.items():
            print(f"{name:<34} {desc}")
        return 0
    if args.command == "simulate":
        return cmd_simulate(args.config, args.out)
    if args.command == "check":
        return cmd_check(args.suite)
    if args.command == "report":
        return cmd_report(args.dir)
    parser.print_usage(sys.stderr)
    return 1


if __name__ == "__main__":
    sys.exit(main())
