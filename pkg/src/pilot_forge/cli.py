"""Command line entry point ``pilot-forge``."""

from __future__ import annotations

import argparse
import logging
import sys

from .allocation import BudgetExceeded
from .experiment import SCENARIOS, ConfigError, make_spec, parse_list, parse_overrides, run_experiment

EXIT_OK, EXIT_CONFIG, EXIT_BUDGET, EXIT_IO = 0, 2, 3, 4


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="pilot-forge", description="Pilot allocation Monte-Carlo experiments.")
    p.add_argument("scenario", choices=SCENARIOS)
    p.add_argument("--config", metavar="PATH", help="key = value settings file")
    p.add_argument("--seed", type=int)
    p.add_argument("--trials", type=int, help="outer Monte-Carlo drops")
    p.add_argument("--cells", type=int, dest="L")
    p.add_argument("--users", type=int, dest="K", help="users per cell (= pilots)")
    p.add_argument("--antennas", type=int, dest="M")
    p.add_argument("--m-grid", help="comma-separated antenna counts for sweeps")
    p.add_argument("--inner", type=int, dest="inner_realizations",
                   help="small-scale realizations per drop (finite mode)")
    p.add_argument("--schemes", help="comma-separated subset of random,gca,gcpa,optimal")
    p.add_argument("--mode", choices=("asymptotic", "finite"))
    p.add_argument("--out", help="output directory")
    p.add_argument("--workers", type=int)
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    config_text = None
    try:
        overrides = {}
        if args.config:
            try:
                with open(args.config) as fh:
                    config_text = fh.read()
            except OSError as exc:
                print(f"pilot-forge: cannot read config {args.config}: {exc}", file=sys.stderr)
                return EXIT_IO
            overrides.update(parse_overrides(config_text))
        for key in ("seed", "trials", "L", "K", "M", "inner_realizations", "mode", "out", "workers"):
            value = getattr(args, key)
            if value is not None:
                overrides[key] = value
        if args.schemes is not None:
            overrides["schemes"] = parse_list(args.schemes)
        if args.m_grid is not None:
            try:
                overrides["m_grid"] = tuple(int(x) for x in parse_list(args.m_grid))
            except ValueError as exc:
                raise ConfigError(f"--m-grid: {exc}") from None
        spec = make_spec(args.scenario, overrides)
        result = run_experiment(spec, config_text)
    except ConfigError as exc:
        print(f"pilot-forge: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except BudgetExceeded as exc:
        print(f"pilot-forge: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except OSError as exc:
        print(f"pilot-forge: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO

    for path in result.files:
        print(path)
    if result.summaries:
        for scheme, per_m in result.summaries.items():
            for M, s in per_m.items():
                print(f"{scheme:8s} M={M:<6d} mean={s.mean:.4f} bps/Hz", file=sys.stderr)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
