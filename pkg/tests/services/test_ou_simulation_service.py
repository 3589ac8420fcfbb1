import math

import numpy as np
import pytest
from pydantic import ValidationError
from scipy.integrate import quad

from yule_ou.common.exceptions import InvalidParameterError, UnstableSchemeError
from yule_ou.common.seeding import path_stream
from yule_ou.models.ou_params import OuParams
from yule_ou.models.sample_grid import SampleGrid
from yule_ou.models.scheme import Scheme
from yule_ou.services.ou_simulation_service import (
    covariance,
    euler_marginal_variance,
    lq_norm_stationary_cov,
    simulate_euler,
    simulate_exact,
    simulate_refined_exact,
    stationary_cov,
)


def test_exact_paths_start_at_zero():
    pair = simulate_exact(OuParams(theta=1.0), SampleGrid(n=2, delta=0.5), seed=123)
    assert pair.x1[0] == 0.0
    assert pair.x2[0] == 0.0
    assert pair.x1.shape == (3,)
    assert pair.scheme is Scheme.EXACT


def test_pair_is_immutable():
    pair = simulate_exact(OuParams(theta=1.0), SampleGrid(n=4, delta=0.5), seed=1)
    with pytest.raises(ValueError):
        pair.x1[1] = 3.0


@pytest.mark.parametrize("simulator", [simulate_exact, simulate_euler])
def test_same_seed_gives_identical_paths(simulator):
    params = OuParams(theta=2.0)
    grid = SampleGrid.from_exponent(5000, 0.6)
    first = simulator(params, grid, seed=99)
    second = simulator(params, grid, seed=99)
    assert np.array_equal(first.x1, second.x1)
    assert np.array_equal(first.x2, second.x2)
    assert not np.array_equal(first.x1, simulator(params, grid, seed=100).x1)


@pytest.mark.slow
def test_exact_marginal_variance_and_independence():
    params = OuParams(theta=1.0)
    grid = SampleGrid(n=10, delta=0.5)
    count = 100_000
    terminal = np.empty((count, 2))
    for seed in range(count):
        pair = simulate_exact(params, grid, seed)
        terminal[seed] = pair.x1[-1], pair.x2[-1]

    expected = covariance(params, 5.0, 5.0)
    assert expected == pytest.approx((1 - math.exp(-10)) / 2)
    variance = terminal[:, 0].var(ddof=1)
    assert abs(variance - expected) <= 4 * expected * math.sqrt(2 / (count - 1))

    cross = np.mean(terminal[:, 0] * terminal[:, 1])
    assert abs(cross) <= 4 * expected / math.sqrt(count)


def test_exact_lag_one_autocorrelation_for_fast_reversion():
    pair = simulate_exact(OuParams(theta=100.0), SampleGrid(n=100_000, delta=0.01), 5)
    x = pair.x1[1000:]
    estimate = np.dot(x[:-1], x[1:]) / np.dot(x[:-1], x[:-1])
    target = math.exp(-1.0)
    assert abs(estimate - target) <= 4 * math.sqrt((1 - target**2) / x.size)


def test_euler_with_zero_drift_is_a_brownian_skeleton():
    grid = SampleGrid(n=500, delta=0.02)
    pair = simulate_euler(OuParams.degenerate_brownian(), grid, seed=17)
    increments = path_stream(17, 0).standard_normal(grid.n) * math.sqrt(grid.delta)
    expected = np.concatenate([[0.0], np.cumsum(increments)])
    np.testing.assert_allclose(pair.x1, expected, rtol=1e-12, atol=1e-12)


def test_euler_stationary_variance():
    params = OuParams(theta=1.0)
    grid = SampleGrid.from_exponent(10_000, 0.6)
    burn_in = int(5.0 / grid.delta)
    second_moments = []
    for seed in range(400):
        pair = simulate_euler(params, grid, seed)
        second_moments.append(np.mean(pair.x1[burn_in:] ** 2))
        second_moments.append(np.mean(pair.x2[burn_in:] ** 2))
    assert np.mean(second_moments) == pytest.approx(0.5, rel=0.05)


def test_euler_rejects_explosive_steps_and_flags_unstable_ones():
    with pytest.raises(UnstableSchemeError):
        simulate_euler(OuParams(theta=4.0), SampleGrid(n=10, delta=0.5), seed=1)

    pair = simulate_euler(OuParams(theta=3.0), SampleGrid(n=10, delta=0.5), seed=1)
    assert len(pair.warnings) == 1
    assert "unstable" in pair.warnings[0]


def test_exact_rejects_degenerate_drift():
    with pytest.raises(InvalidParameterError):
        simulate_exact(OuParams.degenerate_brownian(), SampleGrid(n=10, delta=0.1), 1)


@pytest.mark.parametrize("theta", [0.0, -1.0, float("nan"), float("inf")])
def test_params_reject_invalid_theta(theta):
    with pytest.raises(ValidationError):
        OuParams(theta=theta)


@pytest.mark.parametrize("theta", [0.5, 1.0, 2.0])
@pytest.mark.parametrize("k", [1, 10, 100, 1000, 5000])
def test_euler_variance_bias_is_first_order(theta, k):
    params = OuParams(theta=theta)
    grid = SampleGrid(n=5000, delta=0.01 / theta)
    exact = covariance(params, k * grid.delta, k * grid.delta)
    euler = euler_marginal_variance(params, grid, k)
    assert abs(euler - exact) <= 2 * theta * grid.delta * exact


def test_refined_grid_keeps_the_horizon():
    grid = SampleGrid(n=100, delta=0.1)
    fine = simulate_refined_exact(OuParams(theta=1.0), grid, 16, seed=3)
    assert fine.grid.n == 1600
    assert fine.grid.horizon == pytest.approx(grid.horizon, rel=1e-14)


def test_covariance_values():
    params = OuParams(theta=1.0)
    assert covariance(params, 0.0, 5.0) == 0.0
    assert covariance(params, 1.0, 1.0) == pytest.approx(0.43233235838169365, rel=1e-14)
    with pytest.raises(InvalidParameterError):
        covariance(params, -1.0, 1.0)


@pytest.mark.parametrize("theta", [0.3, 1.0, 4.0])
def test_covariance_is_dominated_by_stationary_covariance(theta):
    params = OuParams(theta=theta)
    times = np.linspace(0.0, 10.0, 41)
    r, s = np.meshgrid(times, times)
    assert np.all(covariance(params, r, s) <= stationary_cov(params, r - s) + 1e-15)


def test_stationary_covariance():
    params = OuParams(theta=1.0)
    assert stationary_cov(params, 0.0) == 0.5
    lags = np.linspace(-5, 5, 21)
    np.testing.assert_array_equal(stationary_cov(params, lags), stationary_cov(params, -lags))


@pytest.mark.parametrize("theta", [0.5, 1.0, 3.0])
def test_lq_norm_of_stationary_covariance(theta):
    params = OuParams(theta=theta)
    horizon = 7.0
    q = 4.0 / 3.0
    numeric, _ = quad(
        lambda t: stationary_cov(params, t) ** q, -horizon, horizon, points=[0.0]
    )
    closed = lq_norm_stationary_cov(params, horizon, q)
    assert closed == pytest.approx(numeric, rel=1e-10)
    assert closed**3 == pytest.approx(
        27 / (128 * theta**7) * (1 - math.exp(-4 * theta * horizon / 3)) ** 3, rel=1e-12
    )
