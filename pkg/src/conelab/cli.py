"""Batch experiment runner.

    conelab run <config.json> [--out DIR] [--suite NAME ...] [--jobs K]
    conelab describe <name> [--config PATH]
    conelab list [--config PATH]

Exit codes: 0 all assertions pass, 1 at least one failure, 2 inconclusive
cells but no failures, 64 configuration error.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from importlib import resources

from . import __version__
from .config import SUITE_NAMES, describe_symbol, load_config, parse_config
from .errors import ConfigError, ConelabError, UnknownName
from .report import ExperimentReport, run_id_for
from .suites import run_suites

EXIT_CONFIG = 64


def _default_config_dict() -> dict:
    with resources.files("conelab.data").joinpath("default_config.json").open() as fh:
        return json.load(fh)


def _load(path: str | None):
    if path is None:
        raw = _default_config_dict()
        return raw, parse_config(raw)
    cfg = load_config(path)
    return cfg.raw, cfg


def cmd_run(args) -> int:
    try:
        raw, cfg = _load(args.config)
        if args.suite:
            for s in args.suite:
                if s not in SUITE_NAMES:
                    raise ConfigError(f"--suite: unknown suite {s!r}")
            cfg.suites = list(args.suite)
            raw = dict(raw, suites=cfg.suites)
        if args.out:
            cfg.output_dir = args.out
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    report = ExperimentReport(run_id_for(raw, __version__), raw)
    report.notes["build"] = __version__
    started = time.time()
    try:
        run_suites(cfg, report, jobs=args.jobs)
    except ConelabError as exc:
        print(f"experiment error: {exc}", file=sys.stderr)
        return 1
    report.timing["wall_seconds"] = round(time.time() - started, 3)
    run_dir = report.write(cfg.output_dir)
    counts = report.verdict_counts()
    print(f"run {report.run_id}: {counts['pass']} pass, {counts['fail']} fail, "
          f"{counts['inconclusive']} inconclusive -> {run_dir}")
    return report.exit_status()


def cmd_describe(args) -> int:
    try:
        _, cfg = _load(args.config)
        print(describe_symbol(args.name, cfg, cfg.geometry.t_min))
    except UnknownName as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return 0


def cmd_list(args) -> int:
    try:
        _, cfg = _load(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    for name in cfg.battery_order:
        sym = cfg.battery[name]
        print(f"{name}: elliptic={sym.is_elliptic()}, "
              f"matching={sym.matching_residual():.1e}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="conelab", description=__doc__,
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = ap.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="execute verification suites from a config")
    run_p.add_argument("config", nargs="?", default=None, help="path to config.json")
    run_p.add_argument("--out", default=None, help="output directory")
    run_p.add_argument("--suite", action="append", default=None,
                       help="restrict to named suites (repeatable)")
    run_p.add_argument("--jobs", type=int, default=1, help="concurrent experiment cells")
    run_p.set_defaults(func=cmd_run)

    desc_p = sub.add_parser("describe", help="print a battery symbol's certificates")
    desc_p.add_argument("name")
    desc_p.add_argument("--config", default=None)
    desc_p.set_defaults(func=cmd_describe)

    list_p = sub.add_parser("list", help="list validated battery entries")
    list_p.add_argument("--config", default=None)
    list_p.set_defaults(func=cmd_list)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
