import logging
import math
from typing import Optional

import numpy as np
from scipy.integrate import trapezoid

from yule_ou.common.exceptions import (
    DegenerateVarianceError,
    InvalidParameterError,
    NumericalOvershootError,
)
from yule_ou.models.path_pair import PathPair
from yule_ou.models.yule_result import YuleMode, YuleResult

logger = logging.getLogger(__name__)

DEGENERACY_TOLERANCE = 1e-14
OVERSHOOT_TOLERANCE = 1e-12


def _check_index(index: int) -> None:
    if index not in (1, 2):
        raise InvalidParameterError(f"path index must be 1 or 2, got {index}")


def _left_samples(pair: PathPair, index: int) -> np.ndarray:
    return pair.path(index)[: pair.grid.n]


def y_discrete(pair: PathPair, i: int, j: int) -> float:
    """Delta * sum_{k<n} X_i X_j - T_n * mean_i * mean_j, left endpoints only."""
    _check_index(i)
    _check_index(j)
    xi = _left_samples(pair, i)
    xj = _left_samples(pair, j)
    return pair.grid.delta * float(np.dot(xi - xi.mean(), xj - xj.mean()))


def _trapezoid_weights(pair: PathPair) -> np.ndarray:
    weights = np.full(pair.grid.n + 1, pair.grid.delta)
    weights[0] = weights[-1] = 0.5 * pair.grid.delta
    return weights


def y_quadrature(pair: PathPair, i: int, j: int) -> float:
    _check_index(i)
    _check_index(j)
    weights = _trapezoid_weights(pair)
    horizon = pair.grid.horizon
    xi = pair.path(i)
    xj = pair.path(j)
    centered_i = xi - np.dot(weights, xi) / horizon
    centered_j = xj - np.dot(weights, xj) / horizon
    return float(np.sum(weights * centered_i * centered_j))


def _correlation(y11: float, y12: float, y22: float, scale1: float, scale2: float) -> float:
    if y11 <= DEGENERACY_TOLERANCE * scale1 or y22 <= DEGENERACY_TOLERANCE * scale2:
        raise DegenerateVarianceError(
            f"degenerate sampled series: y11={y11:.3g}, y22={y22:.3g}"
        )
    rho = y12 / math.sqrt(y11 * y22)
    if abs(rho) > 1.0:
        if abs(rho) - 1.0 > OVERSHOOT_TOLERANCE:
            raise NumericalOvershootError(f"|rho| exceeds 1 by {abs(rho) - 1.0:.3g}")
        rho = math.copysign(1.0, rho)
    return rho


def _psi_value(rho: float, theta: Optional[float], horizon: float) -> Optional[float]:
    if theta is None:
        return None
    if not theta > 0:
        raise InvalidParameterError(f"theta must be positive, got {theta}")
    return math.sqrt(theta * horizon) * rho


def rho_discrete(pair: PathPair, theta: Optional[float] = None) -> YuleResult:
    delta = pair.grid.delta
    x1 = _left_samples(pair, 1)
    x2 = _left_samples(pair, 2)
    c1 = x1 - x1.mean()
    c2 = x2 - x2.mean()
    y11 = delta * float(np.dot(c1, c1))
    y12 = delta * float(np.dot(c1, c2))
    y22 = delta * float(np.dot(c2, c2))

    rho = _correlation(
        y11, y12, y22, delta * float(np.dot(x1, x1)), delta * float(np.dot(x2, x2))
    )
    return YuleResult(
        y11=y11,
        y12=y12,
        y22=y22,
        rho=rho,
        psi=_psi_value(rho, theta, pair.grid.horizon),
        horizon=pair.grid.horizon,
        n=pair.grid.n,
        mode=YuleMode.DISCRETE,
    )


def psi(pair: PathPair, theta: float) -> float:
    """sqrt(theta * T_n) * rho_tilde(n), asymptotically standard normal."""
    return rho_discrete(pair, theta).psi


def rho_quadrature(pair: PathPair, theta: Optional[float] = None) -> YuleResult:
    weights = _trapezoid_weights(pair)
    horizon = pair.grid.horizon
    x1 = pair.x1
    x2 = pair.x2
    c1 = x1 - np.dot(weights, x1) / horizon
    c2 = x2 - np.dot(weights, x2) / horizon
    y11 = float(np.sum(weights * c1 * c1))
    y12 = float(np.sum(weights * c1 * c2))
    y22 = float(np.sum(weights * c2 * c2))

    rho = _correlation(
        y11,
        y12,
        y22,
        float(np.sum(weights * x1 * x1)),
        float(np.sum(weights * x2 * x2)),
    )
    return YuleResult(
        y11=y11,
        y12=y12,
        y22=y22,
        rho=rho,
        psi=_psi_value(rho, theta, horizon),
        horizon=horizon,
        n=pair.grid.n,
        mode=YuleMode.QUADRATURE,
    )


def numerator_split(pair: PathPair) -> tuple[float, float]:
    """(A(n), B(n)) with y_discrete(1, 2) / sqrt(T_n) = A(n) - B(n)."""
    x1 = _left_samples(pair, 1)
    x2 = _left_samples(pair, 2)
    root_horizon = math.sqrt(pair.grid.horizon)
    a_n = pair.grid.delta * float(np.dot(x1, x2)) / root_horizon
    b_n = root_horizon * float(x1.mean()) * float(x2.mean())
    return a_n, b_n


def discretization_delta(fine_pair: PathPair, refine: int) -> float:
    """A(n) on every ``refine``-th sample minus the trapezoid F_{T_n} on all samples."""
    if refine < 1 or fine_pair.grid.n % refine:
        raise InvalidParameterError(
            f"refine={refine} must divide the fine step count {fine_pair.grid.n}"
        )
    n = fine_pair.grid.n // refine
    delta = fine_pair.grid.delta * refine
    horizon = fine_pair.grid.horizon
    root_horizon = math.sqrt(horizon)

    coarse_product = fine_pair.x1[: n * refine : refine] * fine_pair.x2[: n * refine : refine]
    a_n = delta * float(coarse_product.sum()) / root_horizon
    f_proxy = float(trapezoid(fine_pair.x1 * fine_pair.x2, dx=fine_pair.grid.delta))
    return a_n - f_proxy / root_horizon


def denominator_term(pair: PathPair, theta: float) -> float:
    """2 theta sqrt(y11 y22) / T_n, which tends to 1."""
    if not theta > 0:
        raise InvalidParameterError(f"theta must be positive, got {theta}")
    return (
        2.0
        * theta
        * math.sqrt(max(y_discrete(pair, 1, 1), 0.0) * max(y_discrete(pair, 2, 2), 0.0))
        / pair.grid.horizon
    )
