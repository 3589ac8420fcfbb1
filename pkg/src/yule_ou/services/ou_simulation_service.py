import logging
import math

import numpy as np
from scipy.signal import lfilter

from yule_ou.common.exceptions import InvalidParameterError, UnstableSchemeError
from yule_ou.common.seeding import path_stream, validate_seed
from yule_ou.models.ou_params import OuParams
from yule_ou.models.path_pair import PathPair
from yule_ou.models.sample_grid import SampleGrid
from yule_ou.models.scheme import Scheme

logger = logging.getLogger(__name__)


def _require_positive_theta(params: OuParams) -> float:
    theta = float(params.theta)
    if not math.isfinite(theta) or theta <= 0:
        raise InvalidParameterError(f"theta must be positive and finite, got {theta}")
    return theta


def _run_recursion(
    coefficient: float, noise_scale: float, x0: float, seed: int, path_index: int, n: int
) -> np.ndarray:
    xi = path_stream(seed, path_index).standard_normal(n)
    body = lfilter([1.0], [1.0, -coefficient], noise_scale * xi, zi=[coefficient * x0])[0]
    path = np.empty(n + 1, dtype=np.float64)
    path[0] = x0
    path[1:] = body
    return path


def simulate_exact(params: OuParams, grid: SampleGrid, seed: int) -> PathPair:
    theta = _require_positive_theta(params)
    seed = validate_seed(seed)
    delta = grid.delta

    coefficient = math.exp(-theta * delta)
    noise_scale = math.sqrt(-math.expm1(-2.0 * theta * delta) / (2.0 * theta))

    x1 = _run_recursion(coefficient, noise_scale, params.x0, seed, 0, grid.n)
    x2 = _run_recursion(coefficient, noise_scale, params.x0, seed, 1, grid.n)
    return PathPair(
        grid=grid, x1=x1, x2=x2, scheme=Scheme.EXACT, seed=seed, x0=params.x0
    )


def simulate_euler(params: OuParams, grid: SampleGrid, seed: int) -> PathPair:
    """Euler scheme X_j = (1 - theta delta) X_{j-1} + (W_j - W_{j-1}).

    theta = 0 is accepted (see ``OuParams.degenerate_brownian``) and yields a
    Brownian skeleton.
    """
    theta = float(params.theta)
    if not math.isfinite(theta) or theta < 0:
        raise InvalidParameterError(f"theta must be finite and non-negative, got {theta}")
    seed = validate_seed(seed)
    delta = grid.delta
    step = theta * delta

    warnings: tuple[str, ...] = ()
    if step >= 2.0:
        raise UnstableSchemeError(
            f"Euler scheme explodes for theta * delta = {step:.6g} >= 2"
        )
    if step >= 1.0:
        message = f"Euler scheme unstable: theta * delta = {step:.6g} >= 1"
        logger.warning(message)
        warnings = (message,)

    coefficient = 1.0 - step
    noise_scale = math.sqrt(delta)

    x1 = _run_recursion(coefficient, noise_scale, params.x0, seed, 0, grid.n)
    x2 = _run_recursion(coefficient, noise_scale, params.x0, seed, 1, grid.n)
    return PathPair(
        grid=grid,
        x1=x1,
        x2=x2,
        scheme=Scheme.EULER,
        seed=seed,
        x0=params.x0,
        warnings=warnings,
    )


def simulate(params: OuParams, grid: SampleGrid, seed: int, scheme: Scheme) -> PathPair:
    if scheme is Scheme.EXACT:
        return simulate_exact(params, grid, seed)
    if scheme is Scheme.EULER:
        return simulate_euler(params, grid, seed)
    raise InvalidParameterError(f"cannot simulate scheme {scheme.value}")


def simulate_refined_exact(
    params: OuParams, grid: SampleGrid, refine: int, seed: int
) -> PathPair:
    """Exact pair on a grid ``refine`` times finer; grid.t_k is sample k * refine."""
    if refine < 1:
        raise InvalidParameterError(f"refine must be >= 1, got {refine}")
    fine = SampleGrid(n=grid.n * refine, delta=grid.delta / refine)
    return simulate_exact(params, fine, seed)


def covariance(params: OuParams, r, s):
    """E[X(r) X(s)] for the process started at 0."""
    theta = _require_positive_theta(params)
    r = np.asarray(r, dtype=np.float64)
    s = np.asarray(s, dtype=np.float64)
    if np.any(r < 0) or np.any(s < 0):
        raise InvalidParameterError("covariance is defined for non-negative times")

    # e^{-theta(r+s)} (e^{2 theta min} - 1) = e^{-theta|r-s|} (1 - e^{-2 theta min})
    value = (
        np.exp(-theta * np.abs(r - s))
        * -np.expm1(-2.0 * theta * np.minimum(r, s))
        / (2.0 * theta)
    )
    return float(value) if value.ndim == 0 else value


def stationary_cov(params: OuParams, lag):
    theta = _require_positive_theta(params)
    lag = np.asarray(lag, dtype=np.float64)
    if not np.all(np.isfinite(lag)):
        raise InvalidParameterError("lag must be finite")
    value = np.exp(-theta * np.abs(lag)) / (2.0 * theta)
    return float(value) if value.ndim == 0 else value


def lq_norm_stationary_cov(params: OuParams, horizon: float, q: float) -> float:
    """Closed form of the integral of |Q(t)|^q over [-horizon, horizon]."""
    theta = _require_positive_theta(params)
    if horizon <= 0 or q <= 0:
        raise InvalidParameterError("horizon and q must be positive")
    return (
        2.0
        * (2.0 * theta) ** (-q)
        * -math.expm1(-q * theta * horizon)
        / (q * theta)
    )


def euler_marginal_variance(params: OuParams, grid: SampleGrid, k: int) -> float:
    """Exact Var(X_k) of the Euler recursion: v_k = (1 - theta delta)^2 v_{k-1} + delta."""
    if not 0 <= k <= grid.n:
        raise InvalidParameterError(f"step index {k} outside 0..{grid.n}")
    c2 = (1.0 - params.theta * grid.delta) ** 2
    if c2 == 1.0:
        return k * grid.delta
    return grid.delta * (1.0 - c2**k) / (1.0 - c2)
