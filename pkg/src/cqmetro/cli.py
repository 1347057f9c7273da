"""Command-line entry point: ``cqmetro {fig1,fig2,fig3,fig4,fig6,custom}``.

Exit codes: 0 success, 2 configuration error, 3 numerical failure (including
any sweep row that failed; its CSV is still written).
"""
from __future__ import annotations

import argparse
import logging
import sys

import numpy as np

from .experiments import EXPERIMENTS, ConfigError, RunConfig, run_experiment
from .num_core import CQMError

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 2, 3

log = logging.getLogger("cqmetro")


def build_parser() -> argparse.ArgumentParser:
    # argparse exits with 2 on usage errors, which doubles as the config code
    ap = argparse.ArgumentParser(prog="cqmetro", description="Run the metrology sweeps and write CSV datasets.")
    ap.add_argument("experiment", choices=EXPERIMENTS)
    ap.add_argument("--config", metavar="PATH", help="flat key=value configuration file")
    ap.add_argument("--out", metavar="DIR", help="output directory (default: config 'out')")
    ap.add_argument("--set", metavar="KEY=VALUE", action="append", default=[], dest="overrides",
                    help="override one configuration value (repeatable)")
    ap.add_argument("--jobs", type=int, metavar="N", help="worker processes for sweep rows")
    ap.add_argument("--plots", action="store_true", help="also render PNG figures (needs matplotlib)")
    ap.add_argument("-q", "--quiet", action="store_true")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO, format="%(message)s")
    overrides = list(args.overrides)
    if args.out is not None:
        overrides.append(f"out={args.out}")
    if args.jobs is not None:
        overrides.append(f"jobs={args.jobs}")
    if args.plots:
        overrides.append("plots=true")
    try:
        cfg = RunConfig.load(args.experiment, args.config, overrides)
    except ConfigError as exc:
        log.error("config error: %s", exc)
        return EXIT_CONFIG
    try:
        result = run_experiment(cfg)
    except ConfigError as exc:
        log.error("config error: %s", exc)
        return EXIT_CONFIG
    except (CQMError, ArithmeticError, np.linalg.LinAlgError) as exc:
        log.error("numerical failure: %s", exc)
        return EXIT_NUMERICAL
    paths = result.write(cfg.out)
    for p in paths:
        log.info("wrote %s", p)
    if cfg.plots:
        try:
            from .plotting import plot_result

            for p in plot_result(result, cfg.out):
                log.info("wrote %s", p)
        except ImportError as exc:
            log.warning("plots skipped: %s", exc)
    if result.failed_rows:
        for r in result.failed_rows:
            log.error("row %s failed: %s", r.get(result.sweep_variable), r["status"])
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
