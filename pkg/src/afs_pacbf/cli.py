"""Command-line entry point: ``afs-pacbf {run,locus,validate,qp-selftest}``."""

from __future__ import annotations

import argparse
import logging
import math
import sys
from pathlib import Path

from .errors import ConfigError

EXIT_OK = 0
EXIT_SELFTEST_FAILED = 1
EXIT_SAFETY = 2
EXIT_INFEASIBLE = 3
EXIT_CONFIG = 4


def _formats(text: str):
    items = [s.strip() for s in text.split(",") if s.strip()]
    bad = set(items) - {"csv", "json", "svg"}
    if bad:
        raise argparse.ArgumentTypeError(f"unknown formats: {', '.join(sorted(bad))}")
    return items


def cmd_run(args) -> int:
    from .config import load_config
    from .outputs import emit_outputs
    from .scenario import run_scenario

    cfg = load_config(args.config)
    if args.no_filter:
        cfg = cfg.replace(filter_enabled=False)
    records, summary = run_scenario(cfg)
    nominal = None
    if cfg.filter_enabled and "svg" in args.formats:
        nominal, _ = run_scenario(cfg.replace(filter_enabled=False))
    files = emit_outputs(records, summary, args.out, args.formats, obstacles=cfg.obstacles,
                         bp=cfg.barrier, goal=cfg.goal, nominal_records=nominal)
    print(f"backend={summary.backend} steps={summary.steps} wall_clock={summary.wall_clock_s:.2f}s")
    print(f"goal_reached={summary.goal_reached} goal_time={summary.goal_time}")
    for j, v in enumerate(summary.min_h2, start=1):
        print(f"obs{j}: min h2={v:.6g} min psi1={summary.min_psi1[j - 1]:.6g} "
              f"min psi2={summary.min_psi2[j - 1]:.6g}")
    print(f"infeasible_steps={summary.infeasible_steps} safety_violation={summary.safety_violation}")
    for f in files:
        print(f"wrote {f}")
    if summary.safety_violation:
        return EXIT_SAFETY
    if summary.infeasible_steps:
        return EXIT_INFEASIBLE
    return EXIT_OK


def cmd_locus(args) -> int:
    from .config import load_config
    from .outputs import LOCUS_COLUMNS, locus, write_locus_csv

    cfg = load_config(args.config)
    if not cfg.obstacles:
        raise ConfigError("locus needs at least one obstacle in the config")
    if not 0 <= args.obstacle < len(cfg.obstacles):
        raise ConfigError(f"obstacle index {args.obstacle} out of range")
    table = locus(cfg.barrier, cfg.obstacles[args.obstacle], math.radians(args.heading), args.samples)
    if args.out:
        out = Path(args.out)
        if out.suffix != ".csv":
            out.mkdir(parents=True, exist_ok=True)
            out = out / "locus.csv"
        write_locus_csv(table, out)
        print(f"wrote {out}")
    else:
        print(",".join(LOCUS_COLUMNS))
        for row in table:
            print(",".join(format(v, ".17g") for v in row))
    return EXIT_OK


def cmd_validate(args) -> int:
    from .validation import derivative_suite

    rep = derivative_suite(seed=args.seed, trials=args.trials)
    print(f"backend={rep.backend} trials={rep.trials} runtime={rep.runtime_s:.2f}s")
    for name, err in (("h2_dot", rep.max_err_hdot), ("h2_ddot drift", rep.max_err_drift),
                      ("h2_ddot drift+cmd", rep.max_err_cmd)):
        print(f"{name:<20} max scaled error {err:.3e}  {'PASS' if err <= 1 else 'FAIL'}")
    print(f"failures={rep.failures} -> {'PASS' if rep.passed else 'FAIL'}")
    return EXIT_OK if rep.passed else EXIT_SELFTEST_FAILED


def cmd_qp_selftest(args) -> int:
    from .validation import qp_selftest

    rep = qp_selftest(seed=args.seed, trials=args.trials)
    print(f"{'id':>4} {'n':>2} {'m':>2} {'status':<10} {'gap':>10} {'kkt':>10} det")
    for r in rep.rows:
        ok = r["gap"] <= 1e-6 and r["kkt"] <= 1e-6 and r["deterministic"] and r["status"] == "solved"
        print(f"{r['id']:>4} {r['n']:>2} {r['m']:>2} {r['status']:<10} {r['gap']:10.2e} "
              f"{r['kkt']:10.2e} {'yes' if r['deterministic'] else 'NO'}  {'PASS' if ok else 'FAIL'}")
    print(f"max_gap={rep.max_gap:.2e} max_kkt={rep.max_kkt:.2e} runtime={rep.runtime_s:.2f}s "
          f"-> {'PASS' if rep.passed else 'FAIL'}")
    return EXIT_OK if rep.passed else EXIT_SELFTEST_FAILED


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="afs-pacbf", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="simulate a scenario and write outputs")
    r.add_argument("--config", type=Path, default=None, help="scenario TOML (default: packaged)")
    r.add_argument("--out", type=Path, default=Path("out"))
    r.add_argument("--no-filter", action="store_true", help="apply the nominal input directly")
    r.add_argument("--formats", type=_formats, default=["csv", "json", "svg"])
    r.set_defaults(func=cmd_run)

    lo = sub.add_parser("locus", help="tabulate the h2 = 0 and h1 = 0 boundaries")
    lo.add_argument("--config", type=Path, default=None)
    lo.add_argument("--heading", type=float, default=0.0, help="vehicle heading (deg)")
    lo.add_argument("--samples", type=int, default=181)
    lo.add_argument("--obstacle", type=int, default=0, help="obstacle index in the config")
    lo.add_argument("--out", type=Path, default=None, help="CSV file or directory")
    lo.set_defaults(func=cmd_locus)

    v = sub.add_parser("validate", help="finite-difference check of barrier derivatives")
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--trials", type=int, default=1000)
    v.set_defaults(func=cmd_validate)

    q = sub.add_parser("qp-selftest", help="random QPs against a projected-gradient oracle")
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("--trials", type=int, default=100)
    q.set_defaults(func=cmd_qp_selftest)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        if args.command == "locus":
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        raise


if __name__ == "__main__":
    sys.exit(main())
