"""
main.py:

This file is the entry point for the carpet-lab program.

It sets up command line arguments and logging, loads the IFS document (from --input, stdin
or a preset), validates the carpet, runs the requested command and writes its report files
into the output directory.

Lastly, it outputs a summary of the run in JSON format to stdout.

Commands:
- check: conditions table, failure witnesses and derived constants
- render: SVG drawings of the construction rectangles
- slice: porosity and uniform perfectness of vertical slices
- tangent: slice-product approximations of the carpet in small balls
- dim: Minkowski and Assouad dimension estimates, best microsets
- scales: scale index samples against their bounds

Command-line arguments:
- --input FILE: the IFS document, '-' reads it from stdin
- --preset NAME: a preset shipped in carpet_lab/presets
- --out DIR: output directory of the report files (default: the working directory)
- --depth N: construction depth (default: the preset depth)
- --tol X: bounding rectangle tolerance in (0, 1)
- --verbose: Use this switch to increase output verbosity (enables debug level logging)

Exit codes: 0 when every asserted bound holds, 1 when one fails, 2 for input errors and
3 when a depth, resolution or sample budget is exceeded.

Example command-line usage:
$ echo '{"maps": [...]}' | carpet-lab check --input - --out reports [--verbose]
$ carpet-lab scales --preset staggered_columns --out reports
"""

import argparse
import json
import logging
import sys
from carpet_lab.__version__ import __version__
from carpet_lab.config import RunConfiguration
from carpet_lab.errors import CarpetLabError
from carpet_lab.ifs_core import validate_carpet
from carpet_lab.report import ReportGenerator

COMMANDS = ['check', 'render', 'slice', 'tangent', 'dim', 'scales']


def parse_arguments(argv: list[str] | None = None) -> argparse.Namespace:
    """Parse the command line."""

    parser = argparse.ArgumentParser(prog='carpet-lab',
                                     description='Horizontal self-affine carpet toolkit')
    parser.add_argument('command', choices=COMMANDS, help='command to run')
    parser.add_argument('--input', help="IFS document, '-' for stdin")
    parser.add_argument('--preset', help='name of a shipped preset')
    parser.add_argument('--out', default='.', help='output directory')
    parser.add_argument('--depth', type=int, help='construction depth')
    parser.add_argument('--tol', type=float, default=1e-12, help='bounding rectangle tolerance')
    parser.add_argument('--verbose', help='increase output verbosity', action='store_true')
    parser.add_argument('--version', action='version', version=f'%(prog)s {__version__}')
    return parser.parse_args(argv)


def setup_logging(verbose: bool) -> logging.Logger:
    """Log to stderr with the program's format."""

    log_format_string = '%(asctime)s - %(levelname)s '
    log_format_string += '[%(module)s - %(funcName)s - '
    log_format_string += '%(filename)s:%(lineno)s] - %(message)s'
    formatter = logging.Formatter(fmt=log_format_string)

    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(formatter)

    logger = logging.getLogger('root')
    if verbose:
        logger.setLevel(logging.DEBUG)
    else:
        logger.setLevel(logging.INFO)
    logger.handlers = [handler]
    return logger


def main(argv: list[str] | None = None) -> int:
    """Entry point for the carpet-lab program."""

    args = parse_arguments(argv)
    logger = setup_logging(args.verbose)

    try:
        logger.info('loading configuration')
        config = RunConfiguration(args.command,
                                  input_path=args.input,
                                  preset=args.preset,
                                  out=args.out,
                                  depth=args.depth,
                                  tolerance=args.tol)
        document = config.load_document(sys.stdin)
        logger.info('configuration loaded')

        logger.info('validating carpet ...')
        spec = validate_carpet(document.maps,
                               certification_depth=document.certification_depth,
                               tolerance=config.tolerance)
        logger.info('carpet validated: %s maps, ssc certified: %s', spec.n_maps, spec.ssc_certified)

        logger.info('generating report ...')
        report_generator = ReportGenerator(config, spec)
        report = report_generator.generate_report()
        logger.info('report generated')
    except CarpetLabError as error:
        logger.error('%s: %s', type(error).__name__, error)
        return error.exit_code

    logger.info('outputting summary to stdout')
    print(json.dumps(report, indent=4, sort_keys=True))
    return 0 if report['passed'] else 1


def run() -> None:
    """Console script entry point."""

    sys.exit(main())


if __name__ == "__main__":
    run()
