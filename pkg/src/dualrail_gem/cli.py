"""``dualgem`` command-line front end.

Every subcommand prints its metrics record as JSON on stdout and writes
artifacts (tables, ``metrics.json``, ``config.json``) into ``--out``.
Exit codes: 0 success, 1 output I/O error, 2 configuration error,
3 numerical failure.  Files written before a failure are removed.
"""
import argparse
import copy
import os
import sys

from . import scenario
from .config import load_config, parse_config
from .exceptions import ConfigError, GemError
from .io import dumps, table_text

COMMANDS = ("spectrum", "store", "dual", "sweep", "mc-phase", "polarisation")
EXIT_OK, EXIT_IO, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3


def build_parser():
    p = argparse.ArgumentParser(prog="dualgem", description="Dual-rail gradient echo memory simulator.")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--config", default=None, help="YAML scenario file or the name 'paper-replica'")
        s.add_argument("--out", default="out", help="output directory (created if missing)")
        s.add_argument("--seed", type=int, default=None)
        s.add_argument("--trials", type=int, default=None)
        s.add_argument("--format", choices=("csv", "json"), default="csv", help="table format")
    return p


def effective_config(args):
    cfg = load_config(args.config) if args.config else parse_config({})
    cfg = copy.deepcopy(cfg)
    if args.seed is not None:
        cfg["run"]["seed"] = args.seed
    if args.trials is not None:
        cfg["run"]["trials"] = args.trials
    # re-validate so command-line overrides obey the same constraints
    return parse_config(cfg)


def execute(command, cfg):
    """Run one command on a merged config; returns ``(record, artifacts)``."""
    seed = cfg["run"]["seed"]
    if command == "spectrum":
        m, arts, led = scenario.run_spectrum(cfg)
    elif command == "store":
        m, arts, led = scenario.run_store(cfg)
    elif command == "dual":
        m, arts, led = scenario.run_dual(cfg, seed)
    elif command == "sweep":
        m, arts, led = scenario.run_sweep(cfg)
    elif command == "mc-phase":
        m, arts, led = scenario.run_mc_phase(cfg, seed, cfg["run"]["trials"])
    elif command == "polarisation":
        m, arts, led = scenario.run_polarisation(cfg)
    else:
        raise ConfigError(f"unknown command {command!r}")
    conv = {}
    if isinstance(led, dict):
        conv = {k: bool(v["closed"]) for k, v in led.items() if isinstance(v, dict) and "closed" in v}
        if "closed" in led:
            conv["ledger"] = bool(led["closed"])
    return scenario.record(command, cfg, m, ledger=led, convergence=conv, seed=seed), arts


def _write_outputs(out_dir, record, arts, fmt):
    os.makedirs(out_dir, exist_ok=True)
    written = []
    try:
        files = {f"{stem}.{fmt}": table_text(cols, rows, fmt) for stem, (cols, rows) in arts.items()}
        files["metrics.json"] = dumps(record)
        files["config.json"] = dumps(record["config"])
        for name, text in files.items():
            path = os.path.join(out_dir, name)
            with open(path, "w", encoding="utf-8", newline="") as fh:
                written.append(path)
                fh.write(text)
    except BaseException:
        _cleanup(written)
        raise
    return written


def _cleanup(paths):
    for path in paths:
        try:
            os.remove(path)
        except OSError:
            pass


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = effective_config(args)
        record, arts = execute(args.command, cfg)
        _write_outputs(args.out, record, arts, args.format)
    except ConfigError as exc:
        print(f"dualgem: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (GemError, ArithmeticError, ValueError, RuntimeError) as exc:
        print(f"dualgem: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"dualgem: cannot write outputs: {exc}", file=sys.stderr)
        return EXIT_IO
    sys.stdout.write(dumps(record))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
