from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest
from scipy import integrate

from censoring import (BandwidthRule, bandwidth_from_scale, density_eval, fit_kde,
                       kde_mean_abs_error, known_censoring, known_from_formula,
                       model_from_descriptor, robust_scale, select_bandwidth,
                       uniform_censoring)
from csd_errors import DataError


def test_silverman_rate_arithmetic():
    assert bandwidth_from_scale(1.0, 32, beta=2) == pytest.approx(0.53, abs=1e-12)


def test_silverman_bandwidth_on_uniform_sample():
    samples = np.random.default_rng(11).random(10_000)
    h = select_bandwidth(samples, BandwidthRule.silverman(2))
    assert 0.02 <= h <= 0.12


@pytest.mark.parametrize('n', [500, 2000])
def test_bandwidth_halves_for_32_times_the_samples(n):
    def evenly_spaced(m):
        return (np.arange(m) + 0.5) / m

    rule = BandwidthRule.silverman(2)
    ratio = select_bandwidth(evenly_spaced(n), rule) / select_bandwidth(evenly_spaced(32 * n), rule)
    assert ratio == pytest.approx(2.0, rel=0.01)


def test_bandwidth_rate_on_random_samples():
    rng = np.random.default_rng(17)
    rule = BandwidthRule.silverman(2)
    ratio = select_bandwidth(rng.random(20_000), rule) / select_bandwidth(rng.random(640_000), rule)
    assert ratio == pytest.approx(2.0, rel=0.03)


@pytest.mark.parametrize('seed,n', [(0, 1), (1, 50), (2, 400)])
def test_kde_integrates_to_one(seed, n):
    model = fit_kde(np.random.default_rng(seed).random(n))
    h = model.bandwidth
    grid = np.linspace(model.samples.min() - 12 * h, model.samples.max() + 12 * h, 40_001)
    assert integrate.trapezoid(model.raw_density(grid), grid) == pytest.approx(1.0, abs=1e-6)


def test_robust_scale_degenerate_samples():
    assert robust_scale([0.4, 0.4, 0.4]) == 1e-3
    assert robust_scale([0.4]) == 1e-3


def test_single_sample_bandwidth_uses_degenerate_scale():
    assert select_bandwidth([0.5], BandwidthRule.silverman(2)) == pytest.approx(1.06e-3)


def test_fixed_rule_returns_its_bandwidth():
    assert select_bandwidth([0.1, 0.9], BandwidthRule.fixed(0.3)) == 0.3


@pytest.mark.parametrize('make', [
    lambda: BandwidthRule.silverman(0.5),
    lambda: BandwidthRule.fixed(0.0),
    lambda: BandwidthRule('nearest'),
])
def test_invalid_bandwidth_rules(make):
    with pytest.raises(DataError):
        make()


def test_single_point_kde_is_standard_normal():
    model = fit_kde([0.5], BandwidthRule.fixed(1.0))
    np.testing.assert_allclose(model.raw_density([0.5, 1.5]), [0.398942, 0.241971], atol=1e-6)


def test_density_eval_kde_single_sample():
    model = fit_kde([0.5], BandwidthRule.fixed(1.0), floor=1e-3)
    assert density_eval(model, 0.5) == pytest.approx(0.398942, abs=1e-6)


def test_floor_applies_and_is_counted():
    model = fit_kde([0.5], BandwidthRule.fixed(0.01), floor=1e-3)
    assert density_eval(model, 10.0) == 1e-3
    assert density_eval(model, 0.5) > 1e-3
    assert model.clamp_count == 1
    model.reset_clamp_count()
    assert model.clamp_count == 0


def test_floor_bounds_every_value():
    model = fit_kde(np.random.default_rng(2).random(200))
    values = model.density_values(np.linspace(-5, 5, 101))
    assert np.all(values >= model.floor)


def test_clamp_counter_under_threads():
    model = fit_kde([0.5], BandwidthRule.fixed(0.01))
    far = np.full(100, 50.0)
    with ThreadPoolExecutor(max_workers=8) as pool:
        list(pool.map(lambda _: model.density_values(far), range(40)))
    assert model.clamp_count == 4000


def test_uniform_known_density():
    model = uniform_censoring(4.0)
    assert density_eval(model, 1.3) == 0.25
    assert model.descriptor() == {'kind': 'known', 'formula': 'uniform',
                                  'params': {'tau': 4.0}, 'floor': 1e-3}


def test_known_density_may_depend_on_covariates():
    model = known_censoring(lambda c, z: 0.5 + 0.5 * z[0])
    assert density_eval(model, 0.3, [1.0]) == 1.0
    assert density_eval(model, 0.3, [0.0]) == 0.5


def test_known_density_below_floor_is_clamped():
    model = known_from_formula('constant', {'value': 0.0}, floor=0.01)
    assert density_eval(model, 0.2) == 0.01


def test_custom_known_density_is_not_serializable():
    with pytest.raises(DataError):
        known_censoring(lambda c, z: 1.0).descriptor()


def test_unknown_formula():
    with pytest.raises(DataError):
        known_from_formula('exponential', {'rate': 1.0})


def test_kde_descriptor_round_trip_is_exact():
    model = fit_kde(np.random.default_rng(9).random(300))
    restored = model_from_descriptor(model.descriptor())
    grid = np.linspace(0, 1, 57)
    assert np.array_equal(model.raw_density(grid), restored.raw_density(grid))
    assert restored.bandwidth == model.bandwidth


def test_kde_ignores_covariates():
    model = fit_kde(np.random.default_rng(10).random(100))
    assert density_eval(model, 0.4, [0.1, 0.2]) == density_eval(model, 0.4, [0.9, 0.8])


def test_empty_sample_is_rejected():
    with pytest.raises(DataError):
        fit_kde([])


@pytest.mark.slow
def test_kde_error_decreases_with_sample_size():
    def median_error(n):
        errors = [kde_mean_abs_error(fit_kde(np.random.default_rng(seed).random(n)))
                  for seed in range(20)]
        return float(np.median(errors))

    errors = [median_error(n) for n in (100, 400, 1600)]
    assert errors[0] > errors[1] > errors[2]
    assert median_error(10_000) <= 0.10
