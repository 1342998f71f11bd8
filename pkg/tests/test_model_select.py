import numpy as np
import pandas as pd
import pytest

import model_select
from censoring import uniform_censoring
from csd_errors import DataError, NumericalError
from kernel_core import KernelSpec
from model_select import (HyperGrid, choose_cell, default_grid, grid_search_cv, kfold_split,
                          select_and_refit)
from simgen import SIM_SETTINGS, evaluate_risk, generate
from solver import fit


# ---------------------------------------------------------------
# folds
# ---------------------------------------------------------------
def test_even_folds_partition_the_indices():
    folds = kfold_split(10, 5, seed=1)
    assert [len(f) for f in folds] == [2] * 5
    assert sorted(np.concatenate(folds).tolist()) == list(range(10))


def test_uneven_fold_sizes():
    folds = kfold_split(7, 3, seed=2)
    assert sorted(len(f) for f in folds) == [2, 2, 3]


@pytest.mark.parametrize('n,k', [(5, 2), (11, 4), (50, 5), (13, 13)])
def test_folds_are_disjoint_and_cover(n, k):
    folds = kfold_split(n, k, seed=n * k)
    flat = np.concatenate(folds)
    assert len(flat) == n and len(set(flat.tolist())) == n
    sizes = [len(f) for f in folds]
    assert max(sizes) - min(sizes) <= 1


def test_folds_are_deterministic():
    a, b = kfold_split(20, 4, seed=9), kfold_split(20, 4, seed=9)
    assert all(np.array_equal(x, y) for x, y in zip(a, b))


@pytest.mark.parametrize('n,k', [(5, 1), (5, 6)])
def test_invalid_fold_counts(n, k):
    with pytest.raises(DataError):
        kfold_split(n, k, seed=0)


# ---------------------------------------------------------------
# grid
# ---------------------------------------------------------------
def test_grid_validation():
    with pytest.raises(DataError):
        HyperGrid('linear', (0.5,), (0.1,))
    with pytest.raises(DataError):
        HyperGrid('rbf', (), (0.1,))
    with pytest.raises(DataError):
        HyperGrid('rbf', (0.5,), ())
    with pytest.raises(DataError):
        HyperGrid('rbf', (0.5,), (-0.1,))


def test_default_grid_scales_with_dimension():
    grid = default_grid('rbf', 4)
    assert grid.sigmas == tuple(2.0 * f for f in model_select.DEFAULT_SIGMA_FACTORS)
    assert default_grid('linear', 4).cells() == [(None, lam) for lam in model_select.DEFAULT_LAMBDAS]


def test_tie_break_prefers_small_lambda_then_small_sigma():
    cells = [
        {'sigma': 2.0, 'lambda': 0.1, 'mean_val_risk': -0.3, 'failed': False},
        {'sigma': 1.0, 'lambda': 0.1, 'mean_val_risk': -0.3, 'failed': False},
        {'sigma': 0.5, 'lambda': 1.0, 'mean_val_risk': -0.3, 'failed': False},
        {'sigma': 0.1, 'lambda': 0.01, 'mean_val_risk': -0.9, 'failed': True},
    ]
    chosen = choose_cell(cells)
    assert (chosen['sigma'], chosen['lambda']) == (1.0, 0.1)


# ---------------------------------------------------------------
# grid search
# ---------------------------------------------------------------
@pytest.fixture
def weibull_data():
    return generate(SIM_SETTINGS['weibull'], 60, seed=31).data


def test_single_cell_grid_is_chosen(weibull_data):
    grid = HyperGrid('rbf', (0.5,), (0.01,))
    kernel, lam, report = grid_search_cv(weibull_data, grid, 5, uniform_censoring(1.0), seed=0)
    assert kernel == KernelSpec.rbf(0.5) and lam == 0.01
    assert len(report.cells) == 1 and len(report.fold_rows) == 5


def test_duplicated_lambda_ties_resolve_to_smaller_sigma(weibull_data):
    grid = HyperGrid('rbf', (1.0, 0.5), (0.1, 0.1))
    kernel, lam, report = grid_search_cv(weibull_data, grid, 3, uniform_censoring(1.0), seed=4)
    assert report.cells[0]['mean_val_risk'] == report.cells[1]['mean_val_risk']
    best = min(c['mean_val_risk'] for c in report.cells)
    assert lam == 0.1
    assert kernel.sigma == min(c['sigma'] for c in report.cells if c['mean_val_risk'] == best)


def test_chosen_cell_is_the_table_minimum(weibull_data):
    grid = HyperGrid('rbf', (0.1, 0.5, 2.0), (1e-3, 1e-2, 1e-1))
    kernel, lam, report = grid_search_cv(weibull_data, grid, 5, uniform_censoring(1.0), seed=7)
    table = report.summary_table()
    ok = table[~table['failed']]
    best = ok.sort_values(['mean_val_risk', 'lambda', 'sigma']).iloc[0]
    assert (kernel.sigma, lam) == (best['sigma'], best['lambda'])
    assert table['chosen'].sum() == 1


def test_report_is_deterministic(weibull_data):
    grid = HyperGrid('rbf', (0.2, 1.0), (1e-2, 1e-1))
    cens = uniform_censoring(1.0)
    first = grid_search_cv(weibull_data, grid, 4, cens, seed=3)[2]
    second = grid_search_cv(weibull_data, grid, 4, cens, seed=3, workers=1)[2]
    pd.testing.assert_frame_equal(first.fold_table(), second.fold_table())
    pd.testing.assert_frame_equal(first.summary_table(), second.summary_table())


def test_shift_changes_no_selection(weibull_data):
    grid = HyperGrid('rbf', (0.2, 1.0), (1e-3, 1e-1))
    cens = uniform_censoring(1.0)
    plain = grid_search_cv(weibull_data, grid, 5, cens, seed=5)
    shifted = grid_search_cv(weibull_data, grid, 5, cens, seed=5, shift=True)
    assert plain[:2] == shifted[:2]


def test_failed_cells_are_excluded(weibull_data, monkeypatch):
    real_fit = model_select.fit

    def flaky_fit(data, kernel, lam, cens, **kwargs):
        if lam == 1e-3:
            raise NumericalError('forced failure')
        return real_fit(data, kernel, lam, cens, **kwargs)

    monkeypatch.setattr(model_select, 'fit', flaky_fit)
    grid = HyperGrid('linear', (), (1e-3, 1e-1))
    kernel, lam, report = grid_search_cv(weibull_data, grid, 3, uniform_censoring(1.0), seed=1)
    assert lam == 1e-1
    assert [c['lambda'] for c in report.failed_cells] == [1e-3]
    assert 'forced failure' in report.failed_cells[0]['error']


def test_all_cells_failing_is_numerical_error(weibull_data, monkeypatch):
    def broken(*args, **kwargs):
        raise NumericalError('forced failure')

    monkeypatch.setattr(model_select, 'fit', broken)
    with pytest.raises(NumericalError):
        grid_search_cv(weibull_data, HyperGrid('linear', (), (0.1,)), 3, uniform_censoring(1.0), seed=1)


def test_report_csv_has_fold_and_summary_blocks(weibull_data, tmp_path):
    grid = HyperGrid('rbf', (0.5,), (0.01, 0.1))
    report = grid_search_cv(weibull_data, grid, 3, uniform_censoring(1.0), seed=2)[2]
    path = tmp_path / 'cv.csv'
    report.to_csv(path)
    fold_block, summary_block = path.read_text().split('\n\n')
    assert fold_block.splitlines()[0] == ','.join(model_select.FOLD_COLUMNS)
    assert len(fold_block.splitlines()) == 1 + 2 * 3
    assert summary_block.splitlines()[0] == ','.join(model_select.SUMMARY_COLUMNS)


def test_select_and_refit_uses_full_data(weibull_data):
    grid = HyperGrid('rbf', (0.5,), (0.01,))
    model, report = select_and_refit(weibull_data, grid, 5, uniform_censoring(1.0), seed=0)
    assert model.n_train == weibull_data.n
    assert report.chosen['lambda'] == model.lam


@pytest.mark.slow
def test_cv_choice_is_close_to_test_set_oracle():
    setting = SIM_SETTINGS['weibull']
    train = generate(setting, 200, seed=101)
    test = generate(setting, 10_000, seed=202)
    cens = uniform_censoring(1.0)
    grid = HyperGrid('rbf', (0.1, 0.5, 1.0, 2.0), (1e-3, 1e-2, 1e-1))
    chosen, _ = select_and_refit(train.data, grid, 5, cens, seed=303)
    oracle = min(evaluate_risk(fit(train.data, KernelSpec.rbf(s), lam, cens), test)
                 for s, lam in grid.cells())
    assert evaluate_risk(chosen, test) <= 1.05 * oracle
