"""
═══════════════════════════════════════════════════════════════════════
  CSD-SVM: MODEL SELECTION
  v1.0.0 (Oct 2026)
═══════════════════════════════════════════════════════════════════════

k-fold cross-validated grid search over (sigma, lambda).

The failure times are never observed, so plain validation MSE is not
available. Each cell is scored by the censored empirical risk on the
held-out fold, using ONE censoring model fitted on the full data (never
refitted per fold). The unshifted risk can be negative; nothing here
assumes otherwise.

SELECTION:
  minimal mean validation risk among cells that succeeded on every fold;
  ties go to the smallest lambda, then the smallest sigma.

A cell whose fit fails on any fold is recorded in the report and left out
of the selection, in the same fail-open way a single bad source never
takes down a whole scan.

Cells x folds run on a thread pool. The report is assembled in grid order
afterwards, so it does not depend on completion order.

DEFAULT GRIDS (no grid is prescribed by the method itself):
  sigma  in {0.05, 0.1, 0.5, 1, 2, 5} * sqrt(d)
  lambda in {1e-4, 1e-3, 1e-2, 1e-1, 1}
"""

import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import product
from typing import Optional

import numpy as np
import pandas as pd

from csd_errors import CsdError, DataError, NumericalError
from kernel_core import KERNEL_KINDS, KIND_LINEAR, KIND_RBF, KernelSpec
from solver import censored_empirical_risk, fit, predict

# ============================================================
# CONFIG
# ============================================================
DEFAULT_FOLDS = int(os.environ.get('CSD_CV_FOLDS', '5'))
CV_WORKERS    = int(os.environ.get('CSD_CV_WORKERS', '4'))
QUIET         = os.environ.get('CSD_SVM_QUIET', '').lower() in ('1', 'true', 'yes')

DEFAULT_SIGMA_FACTORS = (0.05, 0.1, 0.5, 1.0, 2.0, 5.0)
DEFAULT_LAMBDAS       = (1e-4, 1e-3, 1e-2, 1e-1, 1.0)

FOLD_COLUMNS    = ['kernel_kind', 'sigma', 'lambda', 'fold', 'val_risk']
SUMMARY_COLUMNS = ['kernel_kind', 'sigma', 'lambda', 'mean_val_risk', 'std_val_risk',
                   'folds_ok', 'failed', 'chosen', 'error']

LOG_PREFIX = '[CSD Model Select]'


def _log(message):
    if not QUIET:
        print(f"{LOG_PREFIX} {message}", file=sys.stderr, flush=True)


# ============================================================
# GRID
# ============================================================
@dataclass(frozen=True)
class HyperGrid:
    kernel_kind: str
    sigmas: tuple = ()
    lambdas: tuple = DEFAULT_LAMBDAS

    def __post_init__(self):
        if self.kernel_kind not in KERNEL_KINDS:
            raise DataError(f"unknown kernel kind {self.kernel_kind!r}")
        sigmas = tuple(float(s) for s in self.sigmas)
        lambdas = tuple(float(l) for l in self.lambdas)
        if self.kernel_kind == KIND_LINEAR and sigmas:
            raise DataError("a linear grid takes no sigmas")
        if self.kernel_kind == KIND_RBF and not sigmas:
            raise DataError("an rbf grid needs at least one sigma")
        if not lambdas:
            raise DataError("the grid needs at least one lambda")
        if any(not math.isfinite(x) or x <= 0 for x in sigmas + lambdas):
            raise DataError("grid values must be positive and finite")
        object.__setattr__(self, 'sigmas', sigmas)
        object.__setattr__(self, 'lambdas', lambdas)

    def cells(self):
        """(sigma, lambda) pairs in grid order; sigma is None for linear."""
        sigmas = self.sigmas if self.kernel_kind == KIND_RBF else (None,)
        return list(product(sigmas, self.lambdas))

    def kernel_for(self, sigma):
        return KernelSpec(self.kernel_kind, sigma)


def default_grid(kernel_kind, d):
    if kernel_kind == KIND_LINEAR:
        return HyperGrid(KIND_LINEAR, (), DEFAULT_LAMBDAS)
    root_d = math.sqrt(d)
    return HyperGrid(KIND_RBF, tuple(f * root_d for f in DEFAULT_SIGMA_FACTORS), DEFAULT_LAMBDAS)


# ============================================================
# FOLDS
# ============================================================
def kfold_split(n, k, seed):
    """k disjoint 0-based index arrays covering range(n); sizes differ by at most 1."""
    if k < 2 or k > n:
        raise DataError(f"need 2 <= k <= n for k-fold splitting, got k={k}, n={n}")
    order = np.random.default_rng(seed).permutation(n)
    return [np.sort(part) for part in np.array_split(order, k)]


# ============================================================
# REPORT
# ============================================================
@dataclass
class CvReport:
    kernel_kind: str
    seed: int
    folds: int
    fold_rows: list = field(default_factory=list)
    cells: list = field(default_factory=list)
    chosen: Optional[dict] = None

    @property
    def failed_cells(self):
        return [c for c in self.cells if c['failed']]

    def fold_table(self):
        return pd.DataFrame(self.fold_rows, columns=FOLD_COLUMNS)

    def summary_table(self):
        rows = []
        for cell in self.cells:
            rows.append({**cell, 'chosen': cell is self.chosen})
        return pd.DataFrame(rows, columns=SUMMARY_COLUMNS)

    def to_csv(self, path):
        """Fold rows, a blank line, then the per-cell summary block."""
        with open(path, 'w', newline='', encoding='utf-8') as fh:
            self.fold_table().to_csv(fh, index=False, lineterminator='\n')
            fh.write('\n')
            self.summary_table().to_csv(fh, index=False, lineterminator='\n')


def _rank_key(cell):
    sigma = cell['sigma'] if cell['sigma'] is not None else 0.0
    return (cell['mean_val_risk'], cell['lambda'], sigma)


def choose_cell(cells):
    """Minimal mean validation risk among non-failed cells; ties -> smaller lambda, then sigma."""
    usable = [c for c in cells if not c['failed']]
    if not usable:
        return None
    return min(usable, key=_rank_key)


# ============================================================
# GRID SEARCH
# ============================================================
def _score_fold(data, kernel, lam, cens, train_idx, val_idx, with_intercept, shift):
    model = fit(data.subset(train_idx), kernel, lam, cens, with_intercept=with_intercept)
    held_out = data.subset(val_idx)
    return censored_empirical_risk(predict(model, held_out.covariates), held_out, cens, shift=shift)


def grid_search_cv(data, grid, k, cens, seed, with_intercept=True, shift=False, workers=None):
    """
    Score every grid cell by k-fold censored validation risk.

    Returns (best KernelSpec, best lambda, CvReport). Refitting on the full
    data is left to the caller (see select_and_refit).
    """
    folds = kfold_split(data.n, k, seed)
    cells = grid.cells()
    if with_intercept and min(data.n - len(f) for f in folds) < 2:
        raise DataError("each training fold needs at least 2 records for an intercept fit")

    tasks = {}
    with ThreadPoolExecutor(max_workers=workers or CV_WORKERS) as pool:
        for ci, (sigma, lam) in enumerate(cells):
            kernel = grid.kernel_for(sigma)
            for fi, val_idx in enumerate(folds):
                train_idx = np.setdiff1d(np.arange(data.n), val_idx, assume_unique=True)
                tasks[(ci, fi)] = pool.submit(_score_fold, data, kernel, lam, cens,
                                              train_idx, val_idx, with_intercept, shift)

        report = CvReport(kernel_kind=grid.kernel_kind, seed=seed, folds=k)
        for ci, (sigma, lam) in enumerate(cells):
            scores, error = [], None
            for fi in range(k):
                try:
                    risk = tasks[(ci, fi)].result()
                except (CsdError, np.linalg.LinAlgError) as e:
                    risk, error = float('nan'), error or f"fold {fi}: {type(e).__name__}: {e}"
                scores.append(risk)
                report.fold_rows.append({
                    'kernel_kind': grid.kernel_kind, 'sigma': sigma, 'lambda': lam,
                    'fold': fi, 'val_risk': risk,
                })
            failed = error is not None
            ok = np.array([s for s in scores if np.isfinite(s)])
            report.cells.append({
                'kernel_kind':   grid.kernel_kind,
                'sigma':         sigma,
                'lambda':        lam,
                'mean_val_risk': float(ok.mean()) if not failed else float('nan'),
                'std_val_risk':  float(ok.std(ddof=1)) if not failed and ok.size > 1 else (0.0 if not failed else float('nan')),
                'folds_ok':      int(ok.size),
                'failed':        failed,
                'error':         error,
            })
            if failed:
                _log(f"⚠️ cell sigma={sigma} lambda={lam:g} excluded: {error}")

    report.chosen = choose_cell(report.cells)
    if report.chosen is None:
        raise NumericalError(f"every one of the {len(cells)} grid cells failed cross-validation")

    best_sigma, best_lam = report.chosen['sigma'], report.chosen['lambda']
    _log(f"{k}-fold CV over {len(cells)} cells (n={data.n}): chosen sigma={best_sigma} "
         f"lambda={best_lam:g} mean risk={report.chosen['mean_val_risk']:.6g}, "
         f"{len(report.failed_cells)} failed")
    return grid.kernel_for(best_sigma), best_lam, report


def select_and_refit(data, grid, k, cens, seed, with_intercept=True, workers=None):
    """grid_search_cv followed by a full-data refit of the chosen cell."""
    kernel, lam, report = grid_search_cv(data, grid, k, cens, seed,
                                         with_intercept=with_intercept, workers=workers)
    return fit(data, kernel, lam, cens, with_intercept=with_intercept), report
