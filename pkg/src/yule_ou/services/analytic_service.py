import logging
import math

import numpy as np
from scipy.integrate import quad

from yule_ou.common.exceptions import BelowThresholdError, BetaTooSmallError, DomainError
from yule_ou.models.rate_bound import DiscreteBranch, MeshPlan, RateBound, RateRegime

logger = logging.getLogger(__name__)

CHAOS_TAIL_K = math.exp(17.0 / 128.0)
OPTIMAL_LAMBDA = 5.0 / 7.0

_SERIES_SWITCH = 1.0
_SERIES_TERMS = 40


def _positive(**values: float) -> None:
    for name, value in values.items():
        if not (math.isfinite(value) and value > 0):
            raise DomainError(f"{name} must be positive and finite, got {value}")


def _var_ft_series(x: float) -> float:
    # g(x) = 2x - 5 + e^{-2x} + 4(1 + x)e^{-x} = sum_{k>=4} c_k x^k
    total = 0.0
    for k in range(_SERIES_TERMS, 3, -1):
        coefficient = (
            (-2.0) ** k / math.factorial(k)
            + 4.0 * (-1.0) ** k / math.factorial(k)
            + 4.0 * (-1.0) ** (k - 1) / math.factorial(k - 1)
        )
        total = total * x + coefficient
    return total * x**4


def var_FT(theta: float, T: float) -> float:
    """E[F_T^2] with F_T = T^{-1/2} * integral of X_1 X_2 over [0, T]."""
    _positive(theta=theta, T=T)
    x = 2.0 * theta * T
    if x < _SERIES_SWITCH:
        g = _var_ft_series(x)
    else:
        g = 2.0 * x - 5.0 + math.exp(-2.0 * x) + 4.0 * (1.0 + x) * math.exp(-x)
    return g / (16.0 * theta**4 * T)


def variance_error_constant(theta: float) -> float:
    """C(theta) with |var_FT - 1/(4 theta^3)| <= C(theta) / T."""
    _positive(theta=theta)
    return (7.0 + 8.0 * theta) / (16.0 * theta**4)


def ft_kolmogorov_constant(theta: float) -> float:
    """Prefactor of the 1/sqrt(T) Kolmogorov rate of 2 theta^{3/2} F_T."""
    _positive(theta=theta)
    return math.sqrt((2.0 + 7.0 / (4.0 * theta)) ** 2 + 27.0 / (4.0 * theta))


def denominator_variance_constant(theta: float) -> float:
    """cst(theta) = 4(3 + 7/(4 theta))/theta + 64/theta^2."""
    _positive(theta=theta)
    return 4.0 * (3.0 + 7.0 / (4.0 * theta)) / theta + 64.0 / theta**2


def continuous_threshold(theta: float) -> float:
    return max(math.e, 25.0 / (16.0 * theta**2 * denominator_variance_constant(theta)))


def delta_constant(theta: float) -> float:
    """C_theta of the discretization-error bound."""
    _positive(theta=theta)
    return 4.0 * max(
        8.0 / (9.0 * theta), math.sqrt(2.0) / (3.0 * math.sqrt(theta)), 0.25
    )


def mu_theta(theta: float, T: float) -> float:
    """1 - (1 - e^{-2 theta T}) / (2 theta T)."""
    _positive(theta=theta, T=T)
    x = 2.0 * theta * T
    if x < 0.5:
        # sum_{k>=1} (-1)^{k+1} x^k / (k+1)!
        return sum(
            (-1.0) ** (k + 1) * x**k / math.factorial(k + 1)
            for k in range(1, _SERIES_TERMS)
        )
    return 1.0 + math.expm1(-x) / x


def mean_sq_xbar(theta: float, T: float) -> float:
    """E[Xbar(T)^2] for the time average of one path over [0, T]."""
    _positive(theta=theta, T=T)
    y = theta * T
    if y < _SERIES_SWITCH:
        q = sum(
            (-1.0) ** (k + 1) * (2.0 ** (k - 1) - 2.0) * y**k / math.factorial(k)
            for k in range(3, _SERIES_TERMS)
        )
    else:
        q = y + 2.0 * math.expm1(-y) - 0.5 * math.expm1(-2.0 * y)
    return q / (theta**3 * T**2)


def norm_sq_k_T(theta: float, T: float) -> float:
    """Squared L2 norm of k_T; equals var_FT / T."""
    return var_FT(theta, T) / T


def var_A_theta(theta: float, T: float) -> float:
    """Variance of A_theta(T) = 2 theta I_2(k_T)."""
    return 8.0 * theta**2 * norm_sq_k_T(theta, T)


def var_A_theta_bound(theta: float, T: float) -> float:
    _positive(theta=theta, T=T)
    return (2.0 / theta) * (3.0 + 7.0 / (4.0 * theta)) / T


def y11_deterministic(theta: float, T: float) -> float:
    """Deterministic part mu_theta - 2 theta E[Xbar^2] of the normalized Y_11."""
    return mu_theta(theta, T) - 2.0 * theta * mean_sq_xbar(theta, T)


def y11_deterministic_bound(theta: float, T: float) -> float:
    _positive(theta=theta, T=T)
    return 5.0 / (2.0 * theta * T)


def _covariance_with_mean(theta: float, T: float, u):
    # E[X(u) Xbar(T)]
    return (
        2.0 - 2.0 * np.exp(-theta * u) - np.exp(-theta * (T - u)) + np.exp(-theta * (T + u))
    ) / (2.0 * theta**2 * T)


def var_y11_tilde(theta: float, T: float) -> float:
    """Exact variance of (2 theta / T) Y_11(T).

    The fluctuating part is 2 theta I_2(k_T - g_T (x) g_T), so the variance is
    8 theta^2 (|k_T|^2 - 2 <k_T, g_T (x) g_T> + |g_T|^4).
    """
    _positive(theta=theta, T=T)
    cross, _ = quad(
        lambda u: _covariance_with_mean(theta, T, u) ** 2,
        0.0,
        T,
        epsabs=0.0,
        epsrel=1e-13,
        limit=200,
    )
    cross /= T
    g_sq = mean_sq_xbar(theta, T)
    return 8.0 * theta**2 * (norm_sq_k_T(theta, T) - 2.0 * cross + g_sq**2)


def rate_bound_continuous(theta: float, T: float) -> RateBound:
    """Assembled Kolmogorov bound for sqrt(theta T) rho(T).

    Reports the structure of the bound: the overall constant of the limit
    theorem is not sharp, only its ln T / sqrt(T) shape is.
    """
    _positive(theta=theta, T=T)
    threshold = continuous_threshold(theta)
    if T <= threshold:
        raise BelowThresholdError(
            f"continuous rate bound needs T > T*({theta}) = {threshold:.6g}, got {T}"
        )

    root_T = math.sqrt(T)
    c_f = ft_kolmogorov_constant(theta)
    cst = denominator_variance_constant(theta)
    c_den = 4.0 * math.sqrt(cst)

    sigma_product = 2.0 * theta**1.5 * root_T * mean_sq_xbar(theta, T)
    beta = product_normal_beta_floor(sigma_product, 1.0)
    mean_term = mp_optimal_epsilon(beta)[1] if beta < 4.0 else 4.0

    numerator_term = c_f / root_T
    denominator_term = 4.0 * CHAOS_TAIL_K / root_T + 12.0 * c_den * math.log(T) / root_T
    value = numerator_term + mean_term + denominator_term

    return RateBound(
        value=value,
        constant=value * root_T / math.log(T),
        regime=RateRegime.CONTINUOUS,
        valid_from=threshold,
        constituents={
            "ft_constant": c_f,
            "cst": cst,
            "denominator_constant": c_den,
            "K": CHAOS_TAIL_K,
            "beta": beta,
            "numerator_term": numerator_term,
            "mean_term": mean_term,
            "denominator_term": denominator_term,
        },
    )


def _branches(n: float, delta: float) -> tuple[float, float, DiscreteBranch]:
    horizon_branch = (n * delta) ** -0.5
    mesh_branch = (n * delta**2) ** (1.0 / 3.0)
    if math.isclose(horizon_branch, mesh_branch, rel_tol=1e-9):
        branch = DiscreteBranch.BALANCED
    elif mesh_branch > horizon_branch:
        branch = DiscreteBranch.MESH
    else:
        branch = DiscreteBranch.HORIZON
    return horizon_branch, mesh_branch, branch


def rate_bound_discrete(theta: float, n: int, delta: float) -> RateBound:
    _positive(theta=theta, n=float(n), delta=delta)
    horizon = n * delta
    if horizon <= math.e:
        raise DomainError(f"discrete rate bound needs n * delta > e, got {horizon:.6g}")

    horizon_branch, mesh_branch, branch = _branches(n, delta)
    value = math.log(horizon) * max(horizon_branch, mesh_branch)
    return RateBound(
        value=value,
        constant=1.0,
        regime=RateRegime.DISCRETE,
        relative=True,
        branch=branch,
        constituents={
            "horizon_branch": horizon_branch,
            "mesh_branch": mesh_branch,
            "log_horizon": math.log(horizon),
        },
    )


def mesh_plan(n: int, lambda_: float) -> MeshPlan:
    if n < 2:
        raise DomainError(f"n must be >= 2, got {n}")
    if not 0.5 < lambda_ < 1.0:
        raise DomainError(f"mesh exponent must lie in (1/2, 1), got {lambda_}")
    delta = float(n) ** (-lambda_)
    horizon = n * delta
    horizon_branch, mesh_branch, branch = _branches(n, delta)
    # ln(n delta) = (1 - lambda) ln n
    predicted = (1.0 - lambda_) * math.log(n) * max(horizon_branch, mesh_branch)
    return MeshPlan(
        n=n,
        lambda_=lambda_,
        delta=delta,
        horizon=horizon,
        predicted_rate=predicted,
        branch=branch,
    )


def optimal_mesh(n: int) -> MeshPlan:
    """Mesh n^{-5/7} balancing the horizon and mesh error terms."""
    return mesh_plan(n, OPTIMAL_LAMBDA)


def samples_for_horizon(T: float, lambda_: float) -> int:
    _positive(T=T)
    if not 0.5 < lambda_ < 1.0:
        raise DomainError(f"mesh exponent must lie in (1/2, 1), got {lambda_}")
    return math.ceil(T ** (1.0 / (1.0 - lambda_)) * (1.0 - 1e-12))


def implied_rate_constant(distance: float, n: int, lambda_: float) -> float:
    """Smallest rate constant compatible with an observed Kolmogorov distance."""
    if not 0.0 <= distance <= 1.0:
        raise DomainError(f"distance must lie in [0, 1], got {distance}")
    if not 0.5 < lambda_ < 1.0:
        raise DomainError(f"mesh exponent must lie in (1/2, 1), got {lambda_}")
    mesh_rate = (1.0 - lambda_) * math.log(n) * n ** ((1.0 - 2.0 * lambda_) / 3.0)
    return distance / mesh_rate


def product_normal_mgf(sigma1: float, sigma2: float, beta: float) -> float:
    """E[exp(N1 N2 / beta)] for independent centered normals."""
    _positive(sigma1=sigma1, sigma2=sigma2)
    product = sigma1 * sigma2
    if not beta > product:
        raise DomainError(f"beta must exceed sigma1 * sigma2 = {product}, got {beta}")
    return 1.0 / math.sqrt(1.0 - (product / beta) ** 2)


def product_normal_beta_floor(sigma1: float, sigma2: float) -> float:
    """Smallest beta with product_normal_mgf < 2."""
    return 2.0 * math.sqrt(3.0) / 3.0 * sigma1 * sigma2


def product_normal_abs_mean(sigma1: float, sigma2: float) -> float:
    return 2.0 * sigma1 * sigma2 / math.pi


def mp_g(beta: float, epsilon: float) -> float:
    return 4.0 * math.exp(-epsilon / beta) + epsilon


def mp_optimal_epsilon(beta: float) -> tuple[float, float]:
    """Minimizer of 4 e^{-eps/beta} + eps and the minimum value."""
    if not 0.0 < beta < 4.0:
        raise DomainError(f"beta must lie in (0, 4), got {beta}")
    log_ratio = math.log(4.0 / beta)
    return beta * log_ratio, beta * (1.0 + log_ratio)


def chaos_tail_bound(y: float, beta: float, variance: float, k3: float) -> float:
    """Markov bound on P(Y > y) for a centered second-chaos variable."""
    if variance < 0:
        raise DomainError(f"variance must be non-negative, got {variance}")
    if not beta > 0 or beta < 4.0 * math.sqrt(variance):
        raise BetaTooSmallError(
            f"beta = {beta} below 4 * sqrt(variance) = {4.0 * math.sqrt(variance)}"
        )
    return math.exp(-y / beta + variance / beta**2 + k3 / (2.0 * beta**3))


def discretization_error_bound(theta: float, n: int, delta: float) -> float:
    """C_theta * n * delta^2 bounds E[delta(n)^2]."""
    _positive(n=float(n), delta=delta)
    return delta_constant(theta) * n * delta**2


def an_optimal_epsilon(theta: float, n: int, delta: float) -> float:
    return (4.0 * theta**3 * discretization_error_bound(theta, n, delta)) ** (1.0 / 3.0)


def _geometric_lag_sum(ratio: float, n: int) -> float:
    # sum_{a,b < n} ratio^{|a-b|}
    lags = np.arange(1, n, dtype=np.float64)
    return n + 2.0 * float(np.sum((n - lags) * ratio**lags))


def mean_sq_xtilde(theta: float, n: int, delta: float) -> float:
    """Exact E[Xtilde(n)^2] for the left-endpoint sample mean."""
    _positive(theta=theta, n=float(n), delta=delta)
    q = math.exp(-theta * delta)
    single = -math.expm1(-theta * delta * n) / -math.expm1(-theta * delta)
    return (_geometric_lag_sum(q, n) - single**2) / (2.0 * theta * n**2)


def mean_sq_xtilde_bound(theta: float, n: int, delta: float) -> float:
    _positive(theta=theta, n=float(n), delta=delta)
    return (1.0 / theta) * (1.0 + 2.0 / theta) / (n * delta)


def d1n_second_moment(theta: float, n: int, delta: float) -> float:
    """E[D_{1,n}^2], D_{1,n} = (2 theta / n) sum_{k<n} (X(t_k)^2 - E X(t_k)^2)."""
    _positive(theta=theta, n=float(n), delta=delta)
    q2 = math.exp(-2.0 * theta * delta)
    index = np.arange(n, dtype=np.float64)
    lag_part = _geometric_lag_sum(q2, n)
    max_part = float(np.sum((2.0 * index + 1.0) * q2**index))
    sum_part = (-math.expm1(-2.0 * theta * delta * n) / -math.expm1(-2.0 * theta * delta)) ** 2
    squared_covariances = (lag_part - 2.0 * max_part + sum_part) / (4.0 * theta**2)
    return 8.0 * theta**2 * squared_covariances / n**2


def d1n_second_moment_bound(theta: float, n: int, delta: float) -> float:
    _positive(theta=theta, n=float(n), delta=delta)
    return 2.0 * (1.0 + 1.0 / theta) / (n * delta)


def d2n_deviation(theta: float, n: int, delta: float) -> float:
    """|D_{2,n} - 1| with D_{2,n} = (2 theta / n) sum_{k<n} E X(t_k)^2."""
    _positive(theta=theta, n=float(n), delta=delta)
    return -math.expm1(-2.0 * theta * delta * n) / (n * -math.expm1(-2.0 * theta * delta))


def d2n_deviation_bound(theta: float, n: int, delta: float) -> float:
    """1/(n delta); dominates d2n_deviation once theta >= 1 and theta delta is small."""
    _positive(theta=theta, n=float(n), delta=delta)
    return 1.0 / (n * delta)
