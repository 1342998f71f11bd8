"""
CSD-SVM: Command Line Front End v1.0.0
October 2026

Current status survival regression with a closed-form kernel solver.
Fits, predicts and cross-validates on CSV data, runs the seeded
simulation study and renders its risks as SVG boxplots.

COMMANDS:
  fit        fit one model from z1..zd,c,delta and save it as JSON
  predict    apply a saved model to z1..zd rows
  cv         k-fold grid search over (sigma, lambda); optional refit + save
  simulate   Monte Carlo study over one setting           (simgen)
  summarize  median / quartiles per group of a results CSV (simgen)
  curve      true vs. estimated expectation, 1-D settings (simgen)
  plot       SVG boxplots of a results CSV                 (risk_boxplot)

EXIT CODES:
  0 success, 2 usage or data error, 3 numerical failure

CENSORING FLAG:
  uniform:<tau>[,floor=<f>]                 known g = 1/tau on [0, tau]
  kde[:beta=<b>][,floor=<f>][,h=<h>]        normal-kernel KDE of the monitoring times

Run:  python app.py <command> --help
"""

import argparse
import sys

import numpy as np

from censoring import (DEFAULT_DENSITY_FLOOR, DEFAULT_KDE_BETA, BandwidthRule, fit_kde,
                       uniform_censoring)
from csd_errors import EXIT_DATA_ERROR, EXIT_OK, CsdError, DataError
from csv_io import (predictions_frame, read_query_csv, read_training_csv,
                    write_frame_atomic)
from kernel_core import KERNEL_KINDS, KIND_LINEAR, KIND_RBF, KernelSpec
from model_select import DEFAULT_FOLDS, HyperGrid, default_grid, grid_search_cv
from model_store import load_model, save_model
from solver import Dataset, censored_empirical_risk, fit, predict
from simgen import register_simulation_commands

LOG_PREFIX = '[CSD CLI]'

# SVG rendering needs matplotlib; everything else works without it
try:
    from risk_boxplot import register_plot_commands
    PLOT_AVAILABLE = True
except ImportError as e:
    PLOT_AVAILABLE = False
    print(f"{LOG_PREFIX} ⚠️ plot command not available: {e}", file=sys.stderr, flush=True)


# ========================================
# FLAG PARSING
# ========================================
def parse_censoring_flag(text):
    """'uniform:1' -> ('uniform', {'tau': 1.0}); 'kde:beta=2,floor=0.001' -> ('kde', {...})."""
    text = (text or '').strip()
    head, _, tail = text.partition(':')
    head = head.strip().lower()
    params = {}
    parts = [p.strip() for p in tail.split(',') if p.strip()] if tail else []

    if head == 'uniform':
        if not parts or '=' in parts[0]:
            raise DataError("--censoring uniform needs a horizon, e.g. uniform:1")
        params['tau'] = _positive_float(parts.pop(0), 'uniform tau')
    elif head != 'kde':
        raise DataError(f"--censoring must be uniform:<tau> or kde[:...], got {text!r}")

    allowed = {'floor'} | ({'beta', 'h'} if head == 'kde' else set())
    for part in parts:
        key, eq, value = part.partition('=')
        key = key.strip().lower()
        if not eq or key not in allowed:
            raise DataError(f"unexpected --censoring option {part!r} for {head}")
        params[key] = _positive_float(value, key)
    return head, params


def _positive_float(text, name):
    try:
        value = float(text)
    except ValueError:
        raise DataError(f"{name} must be a number, got {text!r}") from None
    if not np.isfinite(value) or value <= 0:
        raise DataError(f"{name} must be positive, got {text!r}")
    return value


def _float_list(text, name):
    try:
        values = [float(x) for x in str(text).split(',') if x.strip()]
    except ValueError:
        raise DataError(f"{name} must be a comma-separated list of numbers, got {text!r}") from None
    if not values:
        raise DataError(f"{name} is empty")
    return values


def build_censoring(kind, params, times):
    floor = params.get('floor', DEFAULT_DENSITY_FLOOR)
    if kind == 'uniform':
        return uniform_censoring(params['tau'], floor)
    if 'h' in params:
        if 'beta' in params:
            raise DataError("--censoring kde takes either beta= or h=, not both")
        rule = BandwidthRule.fixed(params['h'])
    else:
        rule = BandwidthRule.silverman(params.get('beta', DEFAULT_KDE_BETA))
    return fit_kde(times, rule, floor)


def load_training(path, censoring_text, tau=None):
    """Dataset + censoring model from a training CSV and the --censoring flag."""
    kind, params = parse_censoring_flag(censoring_text)
    Z, c, delta, _ = read_training_csv(path)
    if tau is None:
        tau = params['tau'] if kind == 'uniform' else float(np.max(c))
    data = Dataset(Z, c, delta, tau)
    return data, build_censoring(kind, params, data.times)


def _kernel_from_flags(args):
    if args.kernel == KIND_LINEAR and args.sigma is not None:
        raise DataError("--sigma is only valid with --kernel rbf")
    if args.kernel == KIND_RBF and args.sigma is None:
        raise DataError("--kernel rbf needs --sigma")
    return KernelSpec(args.kernel, args.sigma)


# ========================================
# COMMANDS
# ========================================
def cmd_fit(args):
    kernel = _kernel_from_flags(args)
    data, cens = load_training(args.data, args.censoring, args.tau)
    model = fit(data, kernel, args.lam, cens, with_intercept=(args.intercept == 'on'))
    risk = censored_empirical_risk(predict(model, data.covariates), data, cens)
    save_model(args.out, model, cens, data)
    print(f"n={data.n} d={data.d} training_censored_risk={risk!r}")
    if cens.clamp_count:
        print(f"{LOG_PREFIX} ⚠️ density floor applied {cens.clamp_count} time(s)", file=sys.stderr, flush=True)
    return EXIT_OK


def cmd_predict(args):
    model, _, _ = load_model(args.model)
    Z, zcols = read_query_csv(args.data)
    if Z.shape[1] != model.d:
        raise DataError(f"{args.data} has {Z.shape[1]} covariates, model expects {model.d}")
    write_frame_atomic(predictions_frame(Z, predict(model, Z), zcols), args.out)
    print(f"predicted {Z.shape[0]} row(s) -> {args.out}")
    return EXIT_OK


def cmd_cv(args):
    data, cens = load_training(args.data, args.censoring, args.tau)
    if args.kernel == KIND_LINEAR and args.sigmas:
        raise DataError("--sigmas is only valid with --kernel rbf")
    grid = default_grid(args.kernel, data.d)
    if args.sigmas or args.lambdas:
        grid = HyperGrid(
            args.kernel,
            tuple(_float_list(args.sigmas, '--sigmas')) if args.sigmas else grid.sigmas,
            tuple(_float_list(args.lambdas, '--lambdas')) if args.lambdas else grid.lambdas,
        )
    with_intercept = args.intercept == 'on'
    kernel, lam, report = grid_search_cv(data, grid, args.folds, cens, args.seed,
                                         with_intercept=with_intercept)
    if args.report:
        report.to_csv(args.report)
    print(f"chosen {kernel.label()} lambda={lam!r} mean_val_risk={report.chosen['mean_val_risk']!r} "
          f"failed_cells={len(report.failed_cells)}")
    if args.out:
        model = fit(data, kernel, lam, cens, with_intercept=with_intercept)
        save_model(args.out, model, cens, data)
    return EXIT_OK


# ========================================
# PARSER
# ========================================
def _add_training_flags(p):
    p.add_argument('--data', required=True, help='training CSV with header z1..zd,c,delta')
    p.add_argument('--censoring', required=True, help='uniform:<tau> or kde[:beta=<b>,floor=<f>,h=<h>]')
    p.add_argument('--tau', type=float, default=None, help='horizon (default: uniform tau or max c)')
    p.add_argument('--intercept', choices=('on', 'off'), default='on')


def build_parser():
    parser = argparse.ArgumentParser(prog='csd-svm', description='CSD-SVM for current status data')
    subparsers = parser.add_subparsers(dest='command', required=True)

    p = subparsers.add_parser('fit', help='fit one model and save it')
    _add_training_flags(p)
    p.add_argument('--kernel', choices=KERNEL_KINDS, required=True)
    p.add_argument('--sigma', type=float, default=None)
    p.add_argument('--lambda', dest='lam', type=float, required=True)
    p.add_argument('--out', required=True, help='model JSON path')
    p.set_defaults(handler=cmd_fit)

    p = subparsers.add_parser('predict', help='apply a saved model')
    p.add_argument('--model', required=True)
    p.add_argument('--data', required=True, help='CSV with z1..zd')
    p.add_argument('--out', required=True)
    p.set_defaults(handler=cmd_predict)

    p = subparsers.add_parser('cv', help='cross-validated grid search')
    _add_training_flags(p)
    p.add_argument('--kernel', choices=KERNEL_KINDS, required=True)
    p.add_argument('--sigmas', default=None, help='comma list (default scaled by sqrt(d))')
    p.add_argument('--lambdas', default=None, help='comma list')
    p.add_argument('--folds', type=int, default=DEFAULT_FOLDS)
    p.add_argument('--seed', type=int, default=0)
    p.add_argument('--report', default=None, help='CvReport CSV path')
    p.add_argument('--out', default=None, help='refit the chosen cell and save it here')
    p.set_defaults(handler=cmd_cv)

    register_simulation_commands(subparsers)
    if PLOT_AVAILABLE:
        register_plot_commands(subparsers)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except CsdError as e:
        print(f"{LOG_PREFIX} ✗ {args.command} failed: {e}", file=sys.stderr, flush=True)
        return e.exit_code
    except OSError as e:
        print(f"{LOG_PREFIX} ✗ {args.command} failed: {e}", file=sys.stderr, flush=True)
        return EXIT_DATA_ERROR


if __name__ == '__main__':
    sys.exit(main())
