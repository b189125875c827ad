"""
Command-line interface.

    tstat dist list
    tstat functionals --dist rademacher --n 100 1000
    tstat leading-term --dist centered_exponential --n 1000 --term ln --out ln.csv
    tstat simulate --dist three_point --n 10 --replicates 100000 --seed 7
    tstat oracle --dist rademacher --n 8
    tstat rates --dist uniform --n-list 100 1000 --replicates 100000 --seed 7
    tstat run manifests/default_suite.json

Exit codes: 0 success, 1 invalid input, 2 numerical failure. Failures
print a JSON error record on stdout.
"""

import argparse
import json
import logging
import sys

import pandas as pd

from . import __version__
from .config import Config
from .distributions import CATALOG, make_distribution
from .exceptions import TstatError, ValidationError
from .functionals import compute_functionals
from .leading_terms import (default_grid, edgeworth_plain, edgeworth_student, eval_Ln, eval_Ln1, eval_Ln2,
                            eval_Mn_split, eval_Qn1)
from .rates import build_rate_report, nonstudentized_report
from .runner import run_manifest
from .simulation import NORMALIZATIONS, VARIANTS, exact_T_distribution, simulate_T
from .utils import (manifest_hash, metadata_line, save_error_record, save_json, setup_logging,
                    write_json_lines, write_table)

logger = logging.getLogger(__name__)

TERMS = ('ln', 'mn1', 'mn2', 'qn1', 'ln1', 'ln2', 'edgeworth', 'edgeworth-plain')


class ArgumentParser(argparse.ArgumentParser):
    """argparse that reports bad flags as validation errors instead of exiting with 2."""

    def error(self, message):
        raise ValidationError('argv', message)


def _flags_digest(args):
    flags = {k: v for k, v in sorted(vars(args).items()) if k != 'handler'}
    return manifest_hash(flags)


def _dist(args):
    params = {'scale': args.scale} if args.scale is not None else None
    return make_distribution(args.dist, params)


def _emit(args, frame, kind, seed=None, **extra):
    header = metadata_line(kind, _flags_digest(args), seed, **extra)
    write_table(args.out if args.out else sys.stdout, frame, header)
    if args.out:
        logger.info(f"Wrote {args.out}")


def _grid(args):
    return default_grid(args.grid_min, args.grid_max, args.grid_step)


# -- handlers ----------------------------------------------------------------

def handle_dist(args):
    """List the distribution catalog"""
    print(CATALOG.to_json())
    return 0


def handle_functionals(args):
    """Truncation scalars for each n"""
    dist = _dist(args)
    rows = [compute_functionals(dist, n, args.alpha).as_dict() for n in args.n]
    if args.format == 'csv':
        _emit(args, pd.DataFrame(rows), 'functionals', dist=dist.name)
    elif args.out:
        header = metadata_line('functionals', _flags_digest(args), dist=dist.name)
        write_json_lines(args.out, rows, header)
        logger.info(f"Wrote {args.out}")
    else:
        for row in rows:
            print(json.dumps(row, sort_keys=True))
    return 0


def handle_leading_term(args):
    """One approximation curve on the grid"""
    dist = _dist(args)
    grid = _grid(args)
    term = args.term
    if term == 'ln':
        curve = eval_Ln(dist, args.n, grid, args.tol)
    elif term in ('mn1', 'mn2'):
        m1, m2 = eval_Mn_split(dist, args.n, args.alpha, grid, args.tol)
        curve = m1 if term == 'mn1' else m2
    elif term == 'qn1':
        curve = eval_Qn1(compute_functionals(dist, args.n, args.alpha), grid)
    elif term == 'ln1':
        curve = eval_Ln1(dist, args.n, grid, args.tol)
    elif term == 'ln2':
        curve = eval_Ln2(dist, args.n, grid, args.tol)
    elif term == 'edgeworth':
        curve = edgeworth_student(dist.gamma, args.n, grid)
    else:
        curve = edgeworth_plain(dist.gamma, args.n, grid)
    _emit(args, curve.to_frame(), 'curve', dist=dist.name, term=curve.term_kind, n=args.n)
    return 0


def handle_simulate(args):
    """Monte Carlo law of T"""
    dist = _dist(args)
    emp = simulate_T(dist, args.n, args.replicates, args.seed, args.variant, threads=args.threads)
    _emit(args, emp.to_frame(), 'simulation', seed=args.seed, dist=dist.name, n=args.n,
          replicates=args.replicates, variant=args.variant)
    return 0


def handle_oracle(args):
    """Exact law of T by enumeration"""
    dist = _dist(args)
    emp = exact_T_distribution(dist, args.n, args.variant)
    _emit(args, emp.to_frame(), 'oracle', dist=dist.name, n=args.n, variant=args.variant)
    return 0


def handle_rates(args):
    """Rate report, one row per n, plus a JSON summary"""
    dist = _dist(args)
    grid = _grid(args)
    if args.statistic == 'T':
        report = build_rate_report(dist, args.n_list, args.replicates, args.seed, args.x0, args.x1,
                                   args.alpha, args.variant, grid, args.tol, threads=args.threads)
    else:
        report = nonstudentized_report(dist, args.n_list, args.replicates, args.seed, args.statistic,
                                       args.x0, args.x1, grid, args.tol, threads=args.threads)
    _emit(args, report.to_frame(), 'rates', seed=args.seed, dist=dist.name, variant=report.variant)
    summary = report.summary()
    if args.summary:
        save_json(args.summary, summary)
    else:
        print(json.dumps(summary, sort_keys=True), file=sys.stderr)
    return 0


def handle_run(args):
    """Run an experiment manifest"""
    code, paths = run_manifest(args.manifest, args.output_dir, args.threads)
    if code == 0:
        print(json.dumps({'status': 'success', 'outputs': paths}, sort_keys=True))
    return code


# -- parser ------------------------------------------------------------------

def _add_dist(parser):
    parser.add_argument('--dist', required=True, help=f"catalog distribution: {', '.join(CATALOG.names())}")
    parser.add_argument('--scale', type=float, default=None, help="scale factor c: use the law of cX")


def _add_grid(parser):
    config = Config()
    parser.add_argument('--grid-min', type=float, default=config.GRID_MIN, help="left end of the x-grid")
    parser.add_argument('--grid-max', type=float, default=config.GRID_MAX, help="right end of the x-grid")
    parser.add_argument('--grid-step', type=float, default=config.GRID_STEP, help="x-grid spacing")
    parser.add_argument('--tol', type=float, default=None,
                        help="curve error target as a multiple of delta_n (default TSTAT_CURVE_TOL)")


def _add_out(parser):
    parser.add_argument('--out', default=None, help="output CSV path (default: stdout)")


def build_parser():
    config = Config()
    parser = ArgumentParser(prog='tstat', description="Leading term and rate functional for Student's t statistic")
    parser.add_argument('--version', action='version', version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('dist', help="distribution catalog")
    p.add_argument('action', choices=['list'], help="list the catalog")
    p.set_defaults(handler=handle_dist)

    p = sub.add_parser('functionals', help="b_n, delta_n and the truncation scalars")
    _add_dist(p)
    p.add_argument('--n', type=int, nargs='+', required=True, help="sample sizes")
    p.add_argument('--alpha', type=float, default=config.DEFAULT_ALPHA, help="truncation fraction in (0, 1]")
    p.add_argument('--format', choices=['json', 'csv'], default='json', help="one JSON object or one CSV row per n")
    _add_out(p)
    p.set_defaults(handler=handle_functionals)

    p = sub.add_parser('leading-term', help="evaluate an approximation curve")
    _add_dist(p)
    p.add_argument('--n', type=int, required=True, help="sample size")
    p.add_argument('--alpha', type=float, default=config.DEFAULT_ALPHA, help="truncation fraction for mn1, mn2, qn1")
    p.add_argument('--term', choices=TERMS, default='ln', help="curve to evaluate")
    _add_grid(p)
    _add_out(p)
    p.set_defaults(handler=handle_leading_term)

    p = sub.add_parser('simulate', help="Monte Carlo law of T")
    _add_dist(p)
    p.add_argument('--n', type=int, required=True, help="sample size")
    p.add_argument('--replicates', type=int, required=True, help="number of simulated statistics")
    p.add_argument('--seed', type=int, required=True, help="64-bit seed")
    p.add_argument('--variant', choices=VARIANTS, default='divisor_n', help="statistic variant")
    p.add_argument('--threads', type=int, default=None, help="worker threads (default TSTAT_THREADS)")
    _add_out(p)
    p.set_defaults(handler=handle_simulate)

    p = sub.add_parser('oracle', help="exact law of T for small discrete cases")
    _add_dist(p)
    p.add_argument('--n', type=int, required=True, help="sample size (at most 14)")
    p.add_argument('--variant', choices=VARIANTS, default='divisor_n', help="statistic variant")
    _add_out(p)
    p.set_defaults(handler=handle_oracle)

    p = sub.add_parser('rates', help="rate report over several n")
    _add_dist(p)
    p.add_argument('--n-list', type=int, nargs='+', required=True, help="sample sizes")
    p.add_argument('--replicates', type=int, default=100000, help="Monte Carlo replicates per n")
    p.add_argument('--seed', type=int, required=True, help="64-bit seed")
    p.add_argument('--x0', type=float, default=config.DEFAULT_X0, help="three-point location, > sqrt(3)")
    p.add_argument('--x1', type=float, default=config.DEFAULT_X1, help="third point, not +/-x0")
    p.add_argument('--alpha', type=float, default=config.DEFAULT_ALPHA, help="truncation fraction")
    p.add_argument('--variant', choices=VARIANTS, default='divisor_n', help="statistic variant")
    p.add_argument('--statistic', choices=('T',) + NORMALIZATIONS, default='T',
                   help="T, or the plain sum normalised by b_n or sqrt(n) sigma_n")
    p.add_argument('--threads', type=int, default=None, help="worker threads (default TSTAT_THREADS)")
    p.add_argument('--summary', default=None, help="path for the JSON summary (default: stderr)")
    _add_grid(p)
    _add_out(p)
    p.set_defaults(handler=handle_rates)

    p = sub.add_parser('run', help="run an experiment manifest")
    p.add_argument('manifest', help="manifest JSON file")
    p.add_argument('--output-dir', default=None, help="override outputs.directory")
    p.add_argument('--threads', type=int, default=None, help="worker threads (default TSTAT_THREADS)")
    p.set_defaults(handler=handle_run)

    return parser


def main(argv=None):
    config = Config()
    setup_logging('tstat', log_to_file=config.LOG_TO_FILE)

    try:
        errors = config.validate()
        if errors:
            for error in errors:
                logger.error(f"  - {error}")
            raise ValidationError('config', '; '.join(errors))
        args = build_parser().parse_args(argv)
        return args.handler(args)
    except TstatError as e:
        logger.error(f"{type(e).__name__}: {e}")
        save_error_record(e.to_record())
        return e.exit_code
    except Exception as e:
        logger.error(f"Unexpected error: {e}", exc_info=True)
        save_error_record({'status': 'error', 'exit_code': 1, 'error': type(e).__name__,
                           'field': None, 'message': str(e)})
        return 1
