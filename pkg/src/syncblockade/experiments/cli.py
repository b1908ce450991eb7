"""
Command-line front end.

    syncblockade sweep --config FILE [--out PATH] [--seed N] [--threads N]
    syncblockade reproduce FIGURE [--out PATH] [--seed N] [--threads N]
    syncblockade reproduce --list
    syncblockade validate

Exit codes: 0 on success, 1 if any sweep point or self-check failed,
2 for configuration errors.
"""

from __future__ import annotations

import argparse
import logging
import sys
from importlib import resources
from pathlib import Path

from .config import ConfigError, SweepConfig, load_config, parse_config
from .output import emit_outputs
from .sweep import THREADS_ENV, run_sweep
from .validate import run_checks

__all__ = ["main", "figure_ids", "figure_config"]

EXIT_OK, EXIT_FAILED, EXIT_CONFIG = 0, 1, 2


def _config_dir():
    return resources.files("syncblockade.experiments") / "configs"


def figure_ids() -> list[str]:
    return sorted(p.name[:-4] for p in _config_dir().iterdir() if p.name.endswith(".ini"))


def figure_config(fig: str) -> SweepConfig:
    ids = figure_ids()
    if fig not in ids:
        raise ConfigError(f"unknown figure {fig!r}; available: {', '.join(ids)}")
    return parse_config((_config_dir() / f"{fig}.ini").read_text(), f"{fig}.ini")


def _run(cfg: SweepConfig, args) -> int:
    if args.seed is not None:
        cfg = cfg.with_seed(args.seed)
    out = Path(args.out) if args.out else Path(cfg.name)
    if out.is_dir():
        out = out / cfg.name
    table = run_sweep(cfg, args.threads)
    csv_path, _ = emit_outputs(table, out, cfg.to_dict())
    print(f"wrote {csv_path} ({len(table.rows)} points, {table.n_failed} failed)")
    return EXIT_FAILED if table.n_failed else EXIT_OK


def _add_run_flags(p):
    p.add_argument("--out", help="output path stem or existing directory")
    p.add_argument("--seed", type=int, help="override the config seed")
    p.add_argument("--threads", type=int, help=f"worker processes (default from {THREADS_ENV}, else 1)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="syncblockade", description=__doc__.split("\n\n")[0].strip())
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep", help="run a sweep from a config file")
    p.add_argument("--config", required=True)
    _add_run_flags(p)

    p = sub.add_parser("reproduce", help="run a shipped figure config")
    p.add_argument("figure", nargs="?")
    p.add_argument("--list", action="store_true", help="list figure ids")
    _add_run_flags(p)

    sub.add_parser("validate", help="fast self-checks of the solver and measures")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "validate":
            return EXIT_OK if run_checks() else EXIT_FAILED
        if args.command == "reproduce":
            if args.list or not args.figure:
                print("\n".join(figure_ids()))
                return EXIT_OK if args.list else EXIT_CONFIG
            return _run(figure_config(args.figure), args)
        return _run(load_config(args.config), args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
