import math

import numpy as np
import pytest
from scipy.integrate import quad
from scipy.optimize import minimize_scalar

from yule_ou.common.exceptions import BelowThresholdError, BetaTooSmallError, DomainError
from yule_ou.models.ou_params import OuParams
from yule_ou.models.rate_bound import DiscreteBranch, RateRegime
from yule_ou.services import analytic_service as analytic
from yule_ou.services.ou_simulation_service import covariance

THETAS = [0.25, 0.5, 1.0, 2.0, 5.0]
HORIZONS = [0.01, 0.1, 1.0, 5.0, 10.0, 100.0, 1000.0]


def _var_ft_oracle(theta: float, T: float) -> float:
    integral, _ = quad(
        lambda y: -math.expm1(-2 * theta * y) * math.expm1(-2 * theta * (T - y)) ** 2,
        0.0,
        T,
        epsabs=0.0,
        epsrel=1e-13,
        limit=200,
    )
    return integral / (4 * theta**3 * T)


@pytest.mark.parametrize("theta", [0.5, 1.0, 3.0])
@pytest.mark.parametrize("T", [1e-3, 0.2, 0.49, 0.51, 2.0, 10.0, 50.0])
def test_var_ft_matches_integral_form(theta, T):
    assert analytic.var_FT(theta, T) == pytest.approx(_var_ft_oracle(theta, T), rel=1e-9)


def test_var_ft_limit():
    assert analytic.var_FT(1.0, 1e12) == pytest.approx(0.25, rel=1e-9)
    assert analytic.var_FT(2.0, 1e12) == pytest.approx(1 / 32, rel=1e-9)


def test_var_ft_small_horizon_limit():
    T = 1e-4
    assert analytic.var_FT(1.0, T) == pytest.approx(T**3 / 6, rel=1e-3)


@pytest.mark.parametrize("theta", THETAS)
@pytest.mark.parametrize("T", HORIZONS)
def test_var_ft_distance_to_limit(theta, T):
    gap = abs(analytic.var_FT(theta, T) - 1 / (4 * theta**3))
    assert gap <= analytic.variance_error_constant(theta) / T


def test_mu_theta_values():
    assert analytic.mu_theta(1.0, 1.0) == pytest.approx(0.5676676416183064, rel=1e-13)
    assert analytic.mu_theta(1.0, 1e9) == pytest.approx(1.0, abs=1e-9)


@pytest.mark.parametrize("theta", THETAS)
@pytest.mark.parametrize("T", HORIZONS)
def test_mu_theta_concentration(theta, T):
    mu = analytic.mu_theta(theta, T)
    assert abs(mu - 1) <= 1 / (2 * theta * T) * (1 + 1e-12)
    oracle, _ = quad(lambda u: -math.expm1(-2 * theta * u), 0.0, T, epsrel=1e-13)
    assert mu == pytest.approx(oracle / T, rel=1e-10)


def test_mean_sq_xbar_matches_quadrature():
    theta, T = 1.0, 10.0
    integral, _ = quad(
        lambda u: math.expm1(-theta * (T - u)) ** 2, 0.0, T, epsabs=0.0, epsrel=1e-13
    )
    assert analytic.mean_sq_xbar(theta, T) == pytest.approx(
        integral / (T**2 * theta**2), rel=1e-10
    )


@pytest.mark.parametrize("theta", THETAS)
@pytest.mark.parametrize("T", HORIZONS)
def test_mean_sq_xbar_bound(theta, T):
    value = analytic.mean_sq_xbar(theta, T)
    assert 0 <= value
    assert value * theta**2 * T <= 1.0


def test_mean_sq_xbar_vanishes_for_short_horizons():
    assert analytic.mean_sq_xbar(1.0, 1e-8) == pytest.approx(1e-8 / 3, rel=1e-6)


def test_series_and_closed_forms_join_continuously():
    for function, theta, switch in [
        (analytic.var_FT, 1.0, 0.5),
        (analytic.mean_sq_xbar, 1.0, 1.0),
        (analytic.mu_theta, 1.0, 0.25),
    ]:
        below = function(theta, switch * (1 - 1e-9))
        above = function(theta, switch * (1 + 1e-9))
        assert below == pytest.approx(above, rel=1e-7)


def test_constants():
    assert analytic.denominator_variance_constant(1.0) == 83.0
    assert analytic.CHAOS_TAIL_K == pytest.approx(1.14206, abs=1e-4)
    assert analytic.delta_constant(1.0) == pytest.approx(32 / 9)
    assert analytic.variance_error_constant(1.0) == pytest.approx(15 / 16)
    assert analytic.ft_kolmogorov_constant(1.0) == pytest.approx(
        math.sqrt(3.75**2 + 6.75)
    )
    assert analytic.continuous_threshold(1.0) == math.e


def test_continuous_bound_requires_threshold():
    with pytest.raises(BelowThresholdError):
        analytic.rate_bound_continuous(1.0, 2.0)


@pytest.mark.parametrize("theta", [1.0, 2.0, 5.0])
def test_continuous_bound_decreases_in_horizon(theta):
    horizons = np.geomspace(math.e**2, 1e6, 40)
    values = [analytic.rate_bound_continuous(theta, T).value for T in horizons]
    assert all(later < earlier for earlier, later in zip(values, values[1:]))

    bound = analytic.rate_bound_continuous(theta, 100.0)
    assert bound.regime is RateRegime.CONTINUOUS
    assert bound.valid_from == analytic.continuous_threshold(theta)
    assert bound.constant > 0
    assert all(value > 0 for value in bound.constituents.values())


def test_discrete_bound_branches():
    n = 100_000
    assert analytic.rate_bound_discrete(1.0, n, n**-0.6).branch is DiscreteBranch.MESH
    assert analytic.rate_bound_discrete(1.0, n, n**-0.9).branch is DiscreteBranch.HORIZON

    balanced = analytic.rate_bound_discrete(1.0, n, n ** (-5 / 7))
    assert balanced.branch is DiscreteBranch.BALANCED
    assert balanced.constituents["horizon_branch"] == pytest.approx(
        balanced.constituents["mesh_branch"], rel=1e-9
    )
    assert balanced.relative
    assert balanced.constant == 1.0


def test_discrete_bound_needs_long_horizon():
    with pytest.raises(DomainError):
        analytic.rate_bound_discrete(1.0, 10, 0.1)


def test_optimal_mesh_examples():
    plan = analytic.optimal_mesh(10_000_000)
    assert plan.delta == pytest.approx(1e-5, rel=1e-12)
    assert plan.horizon == pytest.approx(100.0, rel=1e-12)
    assert analytic.optimal_mesh(128).horizon == pytest.approx(4.0, rel=1e-12)


@pytest.mark.parametrize("n", [128, 10_000, 10_000_000])
def test_optimal_rate_in_horizon_units(n):
    plan = analytic.optimal_mesh(n)
    T = plan.horizon
    assert plan.predicted_rate == pytest.approx(math.log(T) / math.sqrt(T), rel=1e-12)


def test_mesh_plan_validation():
    with pytest.raises(DomainError):
        analytic.mesh_plan(1000, 0.5)
    assert analytic.samples_for_horizon(100.0, 5 / 7) == 10_000_000


def test_implied_rate_constant():
    assert 0.0092 < analytic.implied_rate_constant(0.01974, 100_000, 0.6) < 0.0094


def test_product_normal_mgf():
    assert analytic.product_normal_mgf(1.0, 1.0, 1e12) == pytest.approx(1.0)
    assert analytic.product_normal_mgf(1.0, 1.0, 2.0) == pytest.approx(
        1.1547005383792515, rel=1e-14
    )
    with pytest.raises(DomainError):
        analytic.product_normal_mgf(1.0, 2.0, 2.0)


def test_product_normal_mgf_matches_conditional_integral():
    # E[exp(N N' / beta)] = E[exp(N^2 / (2 beta^2))]
    beta = 2.0
    integral, _ = quad(
        lambda x: math.exp(-x * x / 2 + x * x / (2 * beta**2)) / math.sqrt(2 * math.pi),
        -math.inf,
        math.inf,
    )
    assert analytic.product_normal_mgf(1.0, 1.0, beta) == pytest.approx(integral, rel=1e-10)


def test_product_normal_mgf_threshold_two():
    floor = analytic.product_normal_beta_floor(1.5, 0.5)
    assert analytic.product_normal_mgf(1.5, 0.5, floor) == pytest.approx(2.0)
    assert analytic.product_normal_mgf(1.5, 0.5, floor * 1.001) < 2.0
    assert analytic.product_normal_mgf(1.5, 0.5, floor * 0.999) > 2.0
    assert analytic.product_normal_abs_mean(1.0, 1.0) == pytest.approx(2 / math.pi)


def test_mp_optimal_epsilon_examples():
    epsilon, value = analytic.mp_optimal_epsilon(4 * math.exp(-1))
    assert epsilon == pytest.approx(1.4715177646857693, rel=1e-14)
    assert value == pytest.approx(2 * 4 * math.exp(-1))
    assert analytic.mp_optimal_epsilon(0.1)[0] == pytest.approx(0.36888794541139363)

    grid = np.linspace(0.0, 3.0 * epsilon, 301)
    assert all(value <= analytic.mp_g(4 * math.exp(-1), eps) + 1e-15 for eps in grid)


def test_mp_optimal_epsilon_matches_numeric_minimum():
    rng = np.random.default_rng(3)
    for beta in rng.uniform(0.01, 3.99, size=50):
        _, value = analytic.mp_optimal_epsilon(beta)
        numeric = minimize_scalar(
            lambda eps: analytic.mp_g(beta, eps),
            bounds=(0.0, 20.0),
            method="bounded",
            options={"xatol": 1e-12},
        )
        assert value == pytest.approx(numeric.fun, abs=1e-10)


@pytest.mark.parametrize("beta", [0.0, 4.0, -1.0, 5.0])
def test_mp_optimal_epsilon_domain(beta):
    with pytest.raises(DomainError):
        analytic.mp_optimal_epsilon(beta)


def test_chaos_tail_bound():
    assert analytic.chaos_tail_bound(0.0, 1.0, 0.0, 0.0) == 1.0
    values = [analytic.chaos_tail_bound(y, 2.0, 0.1, 0.05) for y in np.linspace(0, 5, 20)]
    assert all(later < earlier for earlier, later in zip(values, values[1:]))
    with pytest.raises(BetaTooSmallError):
        analytic.chaos_tail_bound(0.1, 1.0, 0.25, 0.0)


def test_discretization_error_bound():
    n = 10_000
    assert analytic.discretization_error_bound(1.0, n, 0.01) == pytest.approx(32 / 9)
    mesh_values = [analytic.discretization_error_bound(1.0, n, d) for d in (1e-4, 1e-3, 1e-2)]
    assert mesh_values[0] < mesh_values[1] < mesh_values[2]

    n = 1_000_000
    fine = analytic.discretization_error_bound(1.0, n, n**-0.99)
    coarse = analytic.discretization_error_bound(1.0, n, n**-0.6)
    assert fine < 1e-3 * coarse
    assert analytic.an_optimal_epsilon(1.0, n, n**-0.6) == pytest.approx(
        (4 * coarse) ** (1 / 3)
    )


@pytest.mark.parametrize("theta", [0.5, 1.0, 2.0])
@pytest.mark.parametrize("T", [3.0, 10.0, 50.0])
def test_denominator_moments(theta, T):
    y11 = analytic.y11_deterministic(theta, T)
    assert abs(1 - y11) <= analytic.y11_deterministic_bound(theta, T)
    assert analytic.var_A_theta(theta, T) <= analytic.var_A_theta_bound(theta, T)
    assert 0 < analytic.var_y11_tilde(theta, T) <= analytic.denominator_variance_constant(theta) / T
    assert analytic.norm_sq_k_T(theta, T) == pytest.approx(analytic.var_FT(theta, T) / T)


def _discrete_covariances(theta: float, n: int, delta: float) -> np.ndarray:
    t = delta * np.arange(n)
    return covariance(OuParams(theta=theta), t[:, None], t[None, :])


@pytest.mark.parametrize("theta", [0.5, 1.0, 4.0])
@pytest.mark.parametrize("n, delta", [(50, 0.1), (300, 0.05)])
def test_discrete_moments_match_brute_force(theta, n, delta):
    cov = _discrete_covariances(theta, n, delta)
    assert analytic.mean_sq_xtilde(theta, n, delta) == pytest.approx(
        cov.sum() / n**2, rel=1e-10
    )
    assert analytic.d1n_second_moment(theta, n, delta) == pytest.approx(
        8 * theta**2 * np.sum(cov**2) / n**2, rel=1e-10
    )
    assert analytic.d2n_deviation(theta, n, delta) == pytest.approx(
        abs(2 * theta * np.trace(cov) / n - 1), rel=1e-10
    )


@pytest.mark.parametrize("theta", [1.0, 2.0, 5.0])
@pytest.mark.parametrize("n", [1_000, 100_000])
def test_discrete_moment_bounds(theta, n):
    delta = n**-0.6
    assert analytic.mean_sq_xtilde(theta, n, delta) <= analytic.mean_sq_xtilde_bound(theta, n, delta)
    assert analytic.d1n_second_moment(theta, n, delta) <= analytic.d1n_second_moment_bound(
        theta, n, delta
    )
    assert analytic.d2n_deviation(theta, n, delta) <= analytic.d2n_deviation_bound(theta, n, delta)


def test_bounds_are_nonnegative():
    for theta in THETAS:
        for T in (5.0, 50.0):
            assert analytic.var_FT(theta, T) >= 0
            assert analytic.discretization_error_bound(theta, 100, 0.1) >= 0
            assert analytic.rate_bound_discrete(theta, 1000, 0.01).value >= 0
