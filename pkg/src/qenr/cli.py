"""Command line entry point: ``qenr run|describe|fit``."""

from __future__ import annotations

import argparse
import csv
import sys

import numpy as np

from .analysis import EnhancementPoint, FitError, fit_gain
from .harness import ConfigError, describe, load_config, run_experiment


def _read_fig4(path) -> list[EnhancementPoint]:
    with open(path) as fh:
        rows = list(csv.DictReader(line for line in fh if not line.startswith("#")))
    points = []
    for row in rows:
        P_d, E = float(row["P_d"]), float(row["E_Q"])
        if P_d > 0 and np.isfinite(E):
            points.append(EnhancementPoint(P_d, E, float(row.get("E_Q_err", "nan"))))
    return points


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="qenr", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run the configured sweeps and write CSV files")
    p_run.add_argument("config")
    p_run.add_argument("--seed", type=int, help="override [receiver] seed")
    p_run.add_argument("--out-dir", help="output directory (overrides $QENR_OUT_DIR and config)")
    p_run.add_argument("--threads", type=int, default=1, help="worker threads for sweep points")

    p_desc = sub.add_parser("describe", help="print analytic predictions for a config")
    p_desc.add_argument("config")
    p_desc.add_argument("--seed", type=int)

    p_fit = sub.add_parser("fit", help="fit the enhancement model to a fig4 CSV")
    p_fit.add_argument("csv")

    args = parser.parse_args(argv)
    try:
        if args.command == "fit":
            print(fit_gain(_read_fig4(args.csv)))
            return 0
        config = load_config(args.config)
        if args.seed is not None:
            config = config.with_seed(args.seed)
        if args.command == "describe":
            print(describe(config), end="")
            return 0
        manifest = run_experiment(config, args.out_dir, max(1, args.threads))
        print(manifest.text(), end="")
        return 0
    except (ConfigError, FitError, ValueError, OSError) as exc:
        print(f"qenr: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
