#!/usr/bin/env python3
"""
Hjortic - Main Entry Point
==========================

Batch CLI for focused model selection, likelihood monitoring and
confidence-distribution analysis of annual series:
`python main.py <subcommand> [flags]`

License: MIT
"""

import sys
import os
import argparse
import logging
from typing import List, Optional

# Tambahkan root proyek ke path
project_root = os.path.dirname(os.path.abspath(__file__))
sys.path.insert(0, project_root)

from hjortic_lib import apply_runtime, load_config, setup_logging, write_json  # noqa: E402
from tsmodel.errors import HjorticError  # noqa: E402

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2


def build_parser() -> argparse.ArgumentParser:
    """
    Build the argument parser with every subcommand registered
    """
    from cli.commands import register

    parser = argparse.ArgumentParser(
        prog='hjortic',
        description='Hjortic - focused model selection and monitoring for annual series',
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Contoh:
  python main.py synth --model ar2 --n 154 --seed 7 --out out
  python main.py select --input out/synth_ar2.csv --max-ar-order 4
  python main.py fic --input data.csv --covariate kola:1 --ar-order 2 --focus thresh:1,2,3 --threshold mean
  python main.py combine --interval 3.1,4.4 --interval 3.3,4.5 --label kola-winter
        """
    )
    parser.add_argument('--config', default=None, help='Config file (default config/config.json)')
    parser.add_argument('--verbose', action='store_true', help='Debug logging')
    parser.add_argument('--no-log-file', action='store_true', help='Log to stderr only')
    parser.add_argument('--threads', type=int, default=None, help='Worker threads (overrides HJORTIC_THREADS)')

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--seed', type=int, default=None, help='Random seed (default from config)')
    common.add_argument('--out', default=None, help='Output directory (default from config)')

    subparsers = parser.add_subparsers(dest='subcommand', metavar='SUBCOMMAND')
    subparsers.required = True
    register(subparsers, parents=[common])
    return parser


def config_echo(args: argparse.Namespace, config) -> dict:
    """Arguments and effective configuration of a run"""
    echoed = {k: v for k, v in sorted(vars(args).items()) if k != 'handler'}
    return {'args': echoed, 'config': config.to_dict()}


def run(argv: Optional[List[str]] = None) -> int:
    """
    Run one subcommand.

    Args:
        argv: Command-line arguments without the program name

    Returns:
        Exit code: 0 success, 1 computation error, 2 usage error
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code in (0, None) else EXIT_USAGE

    try:
        config = load_config(args.config)
    except ValueError as e:
        print(f"[ERROR] {e}", file=sys.stderr)
        return EXIT_USAGE
    if args.threads is not None:
        if args.threads < 1:
            print(f"[ERROR] --threads must be >= 1, got {args.threads}", file=sys.stderr)
            return EXIT_USAGE
        config.threads = args.threads
    if getattr(args, 'seed', None) is not None:
        config.seed = args.seed

    setup_logging(config, verbose=args.verbose, log_to_file=not args.no_log_file)
    apply_runtime(config)
    logger = logging.getLogger(__name__)

    try:
        result = args.handler(args, config)
        path = os.path.join(args.out or config.output_dir, f"{_artifact_name(args)}.json")
        write_json(path, {
            'subcommand': args.subcommand,
            'config_echo': config_echo(args, config),
            'result': result,
        }, digits=config.significant_digits)
    except (HjorticError, ValueError, OSError, KeyError) as e:
        logger.error(f"{args.subcommand} failed: {type(e).__name__}: {e}")
        return EXIT_FAILURE
    except KeyboardInterrupt:
        logger.info("Dihentikan oleh pengguna")
        return EXIT_FAILURE

    logger.info(f"{args.subcommand} finished")
    return EXIT_OK


def _artifact_name(args: argparse.Namespace) -> str:
    if args.subcommand == 'copula':
        return f"copula_{args.action}"
    return args.subcommand.replace('-', '_')


def main():
    """
    Fungsi utama untuk menjalankan aplikasi
    """
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
