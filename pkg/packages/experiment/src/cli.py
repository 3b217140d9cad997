"""
Command line entry point.

    vlc-shaper channel-dump --config demo/res/two_user_8pam_sweep.json
    vlc-shaper optimize     --config demo/res/two_user_16pam_70db.json --method fa --point 70 --out results/16pam_70db
    vlc-shaper sweep        --config demo/res/two_user_8pam_sweep.json --method zf_ao,uniform_baseline_zf
    vlc-shaper pmf-report   --config demo/res/two_user_8pam_sweep.json --point 60 --out results/8pam_sweep

Exit status is 0 when every point succeeded, 1 when any point failed and 2 for an unusable configuration.
"""

import argparse
import logging
import os
import sys
from pprint import pformat

import numpy as np
from colorama import Fore, Style, init as colorama_init

from packages.channel.src.channel import channel_summary
from packages.config.src import config as Config
from packages.utils.src.errors import Errors
from .experiment import load_sweep, run_point, run_sweep, write_point, write_result_json
from .experiment_config import DB_CONVENTIONS, METHODS, load_config
from .reports import pmf_report, reference_gap

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_POINT_FAILED = 1
EXIT_BAD_CONFIG = 2


def _methods(value: str):
    methods = tuple(m.strip() for m in value.split(",") if m.strip())
    unknown = [m for m in methods if m not in METHODS]
    if not methods or unknown:
        raise argparse.ArgumentTypeError(f"unknown method(s) {unknown}; choose from {', '.join(METHODS)}")
    return methods


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vlc-shaper",
        description="Probabilistic shaping and precoding for multi-user visible light broadcast",
    )
    parser.add_argument("--verbose", action="store_true", help="log per-iteration solver progress")
    verbs = parser.add_subparsers(dest="verb", required=True)

    for name, help_text in (
        ("channel-dump", "print the channel matrix of the configured room"),
        ("optimize", "optimise a single A/σ point"),
        ("sweep", "run every configured method over the A/σ sweep"),
        ("pmf-report", "print the symbol distributions of a written sweep point"),
    ):
        verb = verbs.add_parser(name, help=help_text)
        verb.add_argument("--config", required=True, help="experiment configuration (JSON)")
        verb.add_argument("--method", type=_methods, help="method or comma separated methods")
        verb.add_argument("--seed", type=int, help="override the base seed")
        verb.add_argument("--out", help="output directory")
        verb.add_argument("--db-convention", choices=DB_CONVENTIONS, help="A/σ dB convention")
        if name in ("optimize", "pmf-report"):
            verb.add_argument("--point", type=float, help="A/σ point in dB (default: first configured point)")
    return parser


def _status(ok: bool, message: str):
    colour = Fore.GREEN if ok else Fore.RED
    logger.info(colour + message + Style.RESET_ALL)


def _load(args):
    cfg = load_config(args.config)
    cfg = cfg.with_overrides(
        methods=args.method,
        seed=args.seed,
        output_dir=args.out,
        db_convention=args.db_convention,
    )
    Config.init(cfg.runtime_overrides())
    return cfg


def _point_index(cfg, value):
    if value is None:
        return 0
    for index, db in enumerate(cfg.a_over_sigma_db):
        if np.isclose(db, value):
            return index
    raise Errors.ReportError(
        f"{value:g} dB is not a configured A/σ point ({', '.join(f'{d:g}' for d in cfg.a_over_sigma_db)})"
    )


def channel_dump(cfg) -> int:
    H = cfg.channel()
    with np.printoptions(precision=4, suppress=False):
        logger.info("Channel matrix H (%d users × %d LEDs):\n%s", H.shape[0], H.shape[1], H)
    logger.info(Fore.GREEN + pformat(channel_summary(H, cfg.led_positions, cfg.user_positions)) + Style.RESET_ALL)
    return EXIT_OK


def optimize(cfg, point) -> int:
    method = cfg.methods[0]
    index = _point_index(cfg, point)
    result = run_point(cfg, method, index)
    os.makedirs(cfg.output_dir, exist_ok=True)
    write_point(result, cfg.output_dir, cfg.users)
    write_result_json(result, os.path.join(cfg.output_dir, "result.json"))
    if result.warning:
        _status(False, f"{method}: a CCP subproblem stopped at its iteration cap")
    _status(True, f"{method} at {result.a_over_sigma_db:g} dB: sum rate {result.sum_rate:.4f} bits "
                  f"({', '.join(f'{r:.4f}' for r in result.user_rates)})")
    return EXIT_OK


def sweep(cfg) -> int:
    result = run_sweep(cfg)
    for point in result.points:
        if point.ok:
            _status(True, f"{point.method:22s} {point.a_over_sigma_db:7g} dB  {point.sum_rate:.4f} bits")
        else:
            _status(False, f"{point.method:22s} {point.a_over_sigma_db:7g} dB  FAILED: {point.error}")
    if cfg.order in (8, 16):
        bits, percent = reference_gap(cfg.order)
        logger.info("Published %d-PAM shaping gain at 60 dB: %.2f bits (%.1f%%)", cfg.order, bits, percent)
    return EXIT_POINT_FAILED if result.failed else EXIT_OK


def report(cfg, point) -> int:
    result = load_sweep(cfg.output_dir, cfg)
    db = cfg.a_over_sigma_db[_point_index(cfg, point)]
    logger.info("\n%s", pmf_report(result, db, cfg.methods[0]))
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO)
    colorama_init()

    try:
        cfg = _load(args)
    except (Errors.ConfigValidationError, Errors.InvalidInputError, OSError) as e:
        _status(False, f"Cannot use {args.config}: {e}")
        return EXIT_BAD_CONFIG

    try:
        if args.verb == "channel-dump":
            return channel_dump(cfg)
        if args.verb == "optimize":
            return optimize(cfg, args.point)
        if args.verb == "sweep":
            return sweep(cfg)
        return report(cfg, args.point)
    except Errors.ShaperError as e:
        _status(False, f"{args.verb} failed: {e}")
        return EXIT_POINT_FAILED


if __name__ == "__main__":
    sys.exit(main())
