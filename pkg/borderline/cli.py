"""Command-line driver: python -m borderline <subcommand> [options]."""

import argparse
import logging
import sys
import time
from concurrent.futures import ProcessPoolExecutor, as_completed

from tqdm import tqdm

from . import report
from .config import build_run_config, load_settings
from .errors import BorderlineError, ConfigError
from .suites import run_suite, suites_for

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_CONFIG = 2

SUBCOMMANDS = {
    'verify-singular': 'Generating coefficients, recursion identities and Gram data',
    'verify-coefficients': 'e-action tables, principal coefficients and leading coefficients',
    'verify-decomposition': 'Direct sum of the M_i, minimal polynomial and equivariance of Q',
    'verify-traces': 'q-traces of Q against theta and their classical limit',
    'verify-re': 'Braid relation, kappa and the reflection equation',
    'emit-ideal': 'Write the presentation of the quantized class and re-verify it',
    'all': 'Every suite above, in order',
}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--series', help='Root system series: B (so(2n+1)) or D (so(2n))')
    common.add_argument('--n', type=int, help='Rank n; checked against --blocks and --p')
    common.add_argument('--blocks', default='', help='GL block sizes n_1..n_l, e.g. "2,1" (empty for none)')
    common.add_argument('--p', type=int, help='Rank of the so(P) block: P = 2p+1 (B) or 2p (D)')
    common.add_argument('--height', type=int, help='Truncation height H (default: BORDERLINE_HEIGHT or 6)')
    common.add_argument('--mode', choices=['symbolic', 'numeric'], help='Scalar arithmetic')
    common.add_argument('--seed', type=int, help='Seed of the numeric specialization point')

    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument('--workers', type=int, help='Worker processes (default: BORDERLINE_WORKERS)')
    shared.add_argument('--output', help='Report directory (default: BORDERLINE_OUTPUT or reports)')
    shared.add_argument('--log-level', dest='log_level', help='DEBUG, INFO, WARNING, ERROR')
    shared.add_argument('--timing', action='store_true', help='Record timings in the report')

    parser = argparse.ArgumentParser(
        prog='python -m borderline',
        description='Verify quantized borderline Levi conjugacy classes of SO(N)',
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog='''
Examples:
  python -m borderline all --series B --n 2 --blocks "" --p 1 --height 4
  python -m borderline verify-decomposition --series B --blocks 1 --p 1 --mode symbolic
  python -m borderline emit-ideal --series B --n 3 --blocks 1 --p 1
  python -m borderline verify-presentation reports/ideal-B7-1-p1.json

Settings are read from .env (see .env.example); flags override them.
        '''
    )
    commands = parser.add_subparsers(dest='command', metavar='command')
    commands.required = True
    for name, help_text in SUBCOMMANDS.items():
        commands.add_parser(name, parents=[common, shared], help=help_text, description=help_text)
    presentation = commands.add_parser('verify-presentation', parents=[shared],
                                       help='Re-verify emitted presentation files')
    presentation.add_argument('files', nargs='+', help='Presentation JSON files')
    for name in ('series', 'n', 'blocks', 'p', 'height', 'mode', 'seed'):
        presentation.set_defaults(**{name: None})
    return parser


def run_suites(config):
    """Run the suites of a subcommand; results come back in suite order."""
    names = suites_for(config.subcommand)
    if config.workers == 1 or len(names) == 1:
        results = []
        for name in tqdm(names, desc='Suites', unit='suite', leave=False):
            report.step(f"Running {name}...")
            results.append(run_suite(name, config))
        return results

    results = {}
    with ProcessPoolExecutor(max_workers=min(config.workers, len(names))) as executor:
        futures = {executor.submit(run_suite, name, config): name for name in names}
        for future in tqdm(as_completed(futures), total=len(futures), desc='Suites', unit='suite'):
            results[futures[future]] = future.result()
    return [results[name] for name in names]


def print_header(config):
    report.heading("Borderline Levi Verification")
    if config.levi is not None:
        levi = config.levi
        print(f"Group: so({levi.N}), series {levi.series}")
        print(f"Levi blocks: {list(levi.blocks)} + so(2) + so({levi.P})")
        print(f"Height: {config.height}")
    print(f"Mode: {config.mode} (seed {config.seed})")
    report.rule()


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)

    try:
        config = build_run_config(args, load_settings())
    except ConfigError as e:
        report.print_error(e)
        parser.print_usage()
        return EXIT_CONFIG

    logging.basicConfig(level=config.log_level, format='%(levelname)s %(name)s: %(message)s')

    try:
        print_header(config)
        started = time.monotonic()
        results = run_suites(config)
        elapsed = time.monotonic() - started

        print()
        report.print_summary(results)
        payload = report.build_report(config, results, config.timing, elapsed)
        path = report.write_report(payload, report.report_path(config))
        print(f"\nReport: {path}")
        if config.timing:
            print(f"Time: {report.format_time(elapsed)}")

        if payload['ok']:
            report.success("All checks passed")
            return EXIT_OK
        report.failure("Some checks failed")
        return EXIT_FAILED

    except BorderlineError as e:
        report.print_error(e)
        return EXIT_FAILED
    except KeyboardInterrupt:
        print("\n\n✗ Operation cancelled by user")
        return EXIT_FAILED


if __name__ == '__main__':
    sys.exit(main())
