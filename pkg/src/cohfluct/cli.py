"""``cohfluct`` command line: run, sweep, validate, oracle.

Exit codes: 0 all requested checks hold, 1 a check failed, 2 configuration
error, 3 internal or numerical error.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys

from .config import ConfigError, KNOWN_CHECKS, parse_config
from .errors import CohFluctError, SizeCapError
from .report import dumps
from .runner import (EXIT_CONFIG, EXIT_FAIL, EXIT_INTERNAL, EXIT_OK, run_experiment,
                     run_oracle, run_sweep)


def _parser():
    ap = argparse.ArgumentParser(prog="cohfluct",
                                 description="Coherence fluctuation experiments.")
    sub = ap.add_subparsers(dest="command", required=True)
    for name, help_ in (("run", "run one experiment and write report.json plus CSVs"),
                        ("sweep", "sweep n or sigma and write sweep.csv"),
                        ("validate", "check a config file without running it"),
                        ("oracle", "dense full-label comparison on a small instance")):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("--config", required=True, help="path to a JSON config")
        sp.add_argument("--out", help="output directory (overrides out_dir)")
        sp.add_argument("--checks", help="comma separated subset of: " + ", ".join(KNOWN_CHECKS))
        sp.add_argument("--quiet", action="store_true", help="print nothing on success")
    return ap


def _load(args):
    cfg = parse_config(args.config)
    changes = {}
    if args.out:
        changes["out_dir"] = args.out
    if args.checks is not None:
        names = [c.strip() for c in args.checks.split(",") if c.strip()]
        bad = [c for c in names if c not in KNOWN_CHECKS]
        if not names or bad:
            raise ConfigError("checks", f"unknown check {bad[0]!r}" if bad else "empty list")
        changes["checks"] = tuple(dict.fromkeys(names))
        changes["checks_explicit"] = True
    return dataclasses.replace(cfg, **changes) if changes else cfg


def _say(args, text, force=False):
    if force or not args.quiet:
        print(text)


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        cfg = _load(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    if args.command == "validate":
        _say(args, dumps(cfg.as_dict()).rstrip())
        return EXIT_OK

    try:
        if args.command == "run":
            report, code = run_experiment(cfg)
            if code == EXIT_INTERNAL:
                print(f"error: {report['error']['type']}: {report['error']['message']}",
                      file=sys.stderr)
            for name, res in report.get("checks", {}).items():
                _say(args, f"{'PASS' if res['holds'] else 'FAIL'} {name}", force=not res["holds"])
            _say(args, f"report: {cfg.out_dir}/report.json")
            return code
        if args.command == "sweep":
            rows, code, path = run_sweep(cfg)
            for row in rows:
                _say(args, f"n={row['n']} status={row['status']}",
                     force=row["status"] != "ok")
            _say(args, f"sweep: {path}")
            return code
        rep, code = run_oracle(cfg)
        _say(args, f"{'PASS' if rep.passed else 'FAIL'} oracle dim={rep.dim}",
             force=not rep.passed)
        return code
    except SizeCapError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CohFluctError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    except (ArithmeticError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())


__all__ = ["main", "EXIT_OK", "EXIT_FAIL", "EXIT_CONFIG", "EXIT_INTERNAL"]
