"""Command-line experiment runner: `ssblink run --config cfg.json --out dir`."""
from __future__ import annotations

import argparse
import os
import sys

from .bench import ConfigError, load_config, plot_rows, run_scenario, write_csv

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SIMULATION = 3


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="ssblink",
        description="Run direct-detection link scenarios described by a JSON config.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    run_p = sub.add_parser("run", help="evaluate one scenario config")
    run_p.add_argument("--config", required=True, help="path to a scenario JSON file")
    run_p.add_argument("--out", required=True, help="output directory for CSV (and plots)")
    run_p.add_argument("--parallel", type=int, default=1, metavar="N",
                       help="evaluate sweep points across N processes")
    run_p.add_argument("--plots", action="store_true", help="also emit PNG plots")
    args = parser.parse_args(argv)

    try:
        cfg = load_config(args.config)
    except (ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        rows = run_scenario(cfg, parallel=max(1, args.parallel))
        os.makedirs(args.out, exist_ok=True)
        csv_path = os.path.join(args.out, f"{cfg.name}.csv")
        write_csv(rows, csv_path)
        if args.plots:
            plot_rows(rows, args.out)
    except Exception as exc:  # noqa: BLE001 - report any simulation failure
        print(f"simulation error: {exc}", file=sys.stderr)
        return EXIT_SIMULATION

    print(csv_path)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
