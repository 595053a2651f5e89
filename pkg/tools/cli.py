#!/usr/bin/env python3
"""
Unified command-line interface for the mmWave impairment toolkit.
Runs and validates experiment configs and lists the packaged presets.
"""

import argparse
import logging
import sys

from .errors import EXIT_VALIDATION, exit_code_for


def setup_logging(verbose=False, log_file=None):
    """Configure logging based on command line options"""
    log_format = "%(levelname)s: %(message)s"
    level = logging.DEBUG if verbose else logging.ERROR
    if log_file:
        logging.basicConfig(level=level, format=log_format, filename=log_file, filemode='w')
    else:
        logging.basicConfig(level=level, format=log_format)


def build_parser():
    parser = argparse.ArgumentParser(
        prog='mmwkit',
        description='mmWave transceiver impairment experiments'
    )

    subparsers = parser.add_subparsers(dest='command', help='Experiment commands')

    # Run
    run_parser = subparsers.add_parser('run', help='Run an experiment config')
    run_parser.add_argument('config_file', help='Path to the YAML experiment config')
    run_parser.add_argument('--seed', type=int, help='Override the master seed')
    run_parser.add_argument('-o', '--out', default='.',
                            help='Output directory for artifacts')
    run_parser.add_argument('--threads', type=int,
                            help='Worker threads for Monte-Carlo experiments')
    run_parser.add_argument('--json', action='store_true',
                            help='Also write a JSON mirror of every CSV')
    run_parser.add_argument('--verbose', action='store_true',
                            help='Enable detailed output')
    run_parser.add_argument('--log', help='Save logs to specified file')

    # Validate
    validate_parser = subparsers.add_parser('validate', help='Validate an experiment config')
    validate_parser.add_argument('config_file', help='Path to the YAML experiment config')
    validate_parser.add_argument('--verbose', action='store_true',
                                 help='Enable detailed output')
    validate_parser.add_argument('--log', help='Save logs to specified file')

    # Presets
    presets_parser = subparsers.add_parser('presets', help='Inspect packaged presets')
    presets_parser.add_argument('action', choices=['list'], help='Preset action')
    presets_parser.add_argument('--verbose', action='store_true',
                                help='Enable detailed output')
    presets_parser.add_argument('--log', help='Save logs to specified file')
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 0 if e.code in (0, None) else EXIT_VALIDATION

    try:
        if args.command == 'run':
            setup_logging(verbose=args.verbose, log_file=args.log)
            from .experiment.commands import run_main
            return run_main(
                config_file=args.config_file,
                seed=args.seed,
                out_dir=args.out,
                threads=args.threads,
                json_format=args.json,
                verbose=args.verbose
            )
        elif args.command == 'validate':
            setup_logging(verbose=args.verbose, log_file=args.log)
            from .experiment.commands import validate_main
            return validate_main(config_file=args.config_file, verbose=args.verbose)
        elif args.command == 'presets':
            setup_logging(verbose=args.verbose, log_file=args.log)
            from .experiment.commands import presets_main
            return presets_main(verbose=args.verbose)
        else:
            parser.print_help()
            return EXIT_VALIDATION

    except Exception as e:
        logging.error(f"Unexpected error: {str(e)}")
        return exit_code_for(e)


if __name__ == '__main__':
    sys.exit(main())
