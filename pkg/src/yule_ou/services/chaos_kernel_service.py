import logging
import math
from functools import partial
from typing import Callable, Optional

import numpy as np
import scipy.linalg

from yule_ou.common.exceptions import EigenFailureError, InvalidParameterError
from yule_ou.common.seeding import stream
from yule_ou.configurations.config import settings
from yule_ou.models.kernel_grid import ChaosSpectrum, KernelDomain, KernelGrid

logger = logging.getLogger(__name__)

Kernel = Callable[[np.ndarray, np.ndarray], np.ndarray]

_BLOCK_ENTRIES = 4_000_000


def _check(theta: float, T: float) -> None:
    if not (theta > 0 and T > 0 and math.isfinite(theta) and math.isfinite(T)):
        raise InvalidParameterError(f"theta and T must be positive, got {theta}, {T}")


def h_T_eval(theta: float, T: float, x, y):
    """Kernel of F_T on [0, T] x [-T, 0]; not symmetric."""
    _check(theta, T)
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    support = (x >= 0) & (x <= T) & (y >= -T) & (y <= 0)
    xc = np.clip(x, 0.0, T)
    yc = np.clip(y, -T, 0.0)
    spread = theta * (xc - yc)
    value = (
        np.exp(spread - 2.0 * theta * T)
        - np.exp(spread - 2.0 * theta * np.maximum(xc, -yc))
    ) / (2.0 * theta * math.sqrt(T))
    return np.where(support, value, 0.0)


def h_tilde_eval(theta: float, T: float, x, y):
    return 0.5 * (h_T_eval(theta, T, x, y) + h_T_eval(theta, T, y, x))


def k_T_eval(theta: float, T: float, x, y):
    """Kernel of the quadratic part of Y_11 on [0, T]^2 (symmetric, non-negative)."""
    _check(theta, T)
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    support = (x >= 0) & (x <= T) & (y >= 0) & (y <= T)
    xc = np.clip(x, 0.0, T)
    yc = np.clip(y, 0.0, T)
    total = theta * (xc + yc)
    value = (
        np.exp(total - 2.0 * theta * np.maximum(xc, yc))
        - np.exp(total - 2.0 * theta * T)
    ) / (2.0 * theta * T)
    return np.where(support, value, 0.0)


def g_T_eval(theta: float, T: float, x):
    """Kernel of the time average Xbar(T) = I_1(g_T)."""
    _check(theta, T)
    x = np.asarray(x, dtype=np.float64)
    support = (x >= 0) & (x <= T)
    value = -np.expm1(-theta * (T - np.clip(x, 0.0, T))) / (theta * T)
    return np.where(support, value, 0.0)


def y11_tilde_kernel_eval(theta: float, T: float, x, y):
    """2 theta (k_T - g_T (x) g_T): the fluctuating part of (2 theta / T) Y_11."""
    return 2.0 * theta * (
        k_T_eval(theta, T, x, y) - g_T_eval(theta, T, x) * g_T_eval(theta, T, y)
    )


def h_tilde_kernel(theta: float, T: float) -> Kernel:
    return partial(h_tilde_eval, theta, T)


def k_T_kernel(theta: float, T: float) -> Kernel:
    return partial(k_T_eval, theta, T)


def y11_tilde_kernel(theta: float, T: float) -> Kernel:
    return partial(y11_tilde_kernel_eval, theta, T)


def make_grid(domain: KernelDomain, T: float, m: int) -> KernelGrid:
    if m < 1:
        raise InvalidParameterError(f"grid needs at least one node, got m={m}")
    lower = -T if domain is KernelDomain.SYMMETRIC_TT else 0.0
    width = (T - lower) / m
    nodes = lower + width * (np.arange(m, dtype=np.float64) + 0.5)
    return KernelGrid(
        nodes=nodes, weights=np.full(m, width), domain=domain, horizon=T
    )


def kernel_matrix(kernel: Kernel, grid: KernelGrid) -> np.ndarray:
    return np.asarray(kernel(grid.nodes[:, None], grid.nodes[None, :]), dtype=np.float64)


def _midpoint_norm_sq(kernel: Kernel, grid: KernelGrid) -> float:
    nodes = grid.nodes
    weights = grid.weights
    rows = max(1, _BLOCK_ENTRIES // grid.size)
    total = 0.0
    for start in range(0, grid.size, rows):
        stop = min(start + rows, grid.size)
        block = np.asarray(kernel(nodes[start:stop, None], nodes[None, :]))
        total += float(weights[start:stop] @ (block * block) @ weights)
    return total


def l2_norm_sq(kernel: Kernel, grid: KernelGrid, richardson: bool = False) -> float:
    """Squared L2 norm of ``kernel`` over grid x grid.

    With ``richardson`` the uniform grid is combined with its 2x and 4x
    coarsenings, cancelling the h^2 and h^3 terms of the midpoint error
    (the h^3 term comes from kinks crossing cell centers).
    """
    if grid.size < 64:
        raise InvalidParameterError(f"l2_norm_sq needs m >= 64, got {grid.size}")
    fine = _midpoint_norm_sq(kernel, grid)
    if not richardson:
        return fine

    # coarse grids must keep 0 on a cell edge of [-T, T]
    if grid.size % 8 or not np.allclose(grid.weights, grid.weights[0]):
        raise InvalidParameterError("extrapolation needs a uniform grid with m % 8 == 0")
    half = _midpoint_norm_sq(kernel, make_grid(grid.domain, grid.horizon, grid.size // 2))
    quarter = _midpoint_norm_sq(
        kernel, make_grid(grid.domain, grid.horizon, grid.size // 4)
    )
    return (32.0 * fine - 12.0 * half + quarter) / 21.0


def contraction_norm_sq(theta: float, T: float, grid: KernelGrid) -> float:
    """Squared L2 norm of the one-fold self contraction of the symmetrized h_T."""
    if grid.domain is not KernelDomain.SYMMETRIC_TT:
        raise InvalidParameterError("the contraction of h_T lives on [-T, T]")
    if grid.size < 128:
        raise InvalidParameterError(f"contraction needs m >= 128, got {grid.size}")
    if grid.size > settings.contraction_max_nodes:
        raise InvalidParameterError(
            f"m={grid.size} exceeds contraction_max_nodes="
            f"{settings.contraction_max_nodes}"
        )
    matrix = kernel_matrix(h_tilde_kernel(theta, T), grid)
    weights = grid.weights
    contracted = (matrix * weights[None, :]) @ matrix.T
    return float(weights @ (contracted * contracted) @ weights)


def contraction_bound(theta: float, T: float) -> float:
    _check(theta, T)
    return (
        (1.0 / (4.0 * T))
        * (27.0 / (128.0 * theta**7))
        * (-math.expm1(-4.0 * theta * T / 3.0)) ** 3
    )


def _eigvalsh(matrix: np.ndarray, subset: Optional[list[int]] = None) -> np.ndarray:
    try:
        return scipy.linalg.eigh(matrix, eigvals_only=True, subset_by_index=subset)
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError) as e:
        raise EigenFailureError(f"symmetric eigen-solve failed: {e}") from e


def nystrom_spectrum(kernel: Kernel, grid: KernelGrid, rank: int) -> ChaosSpectrum:
    """Largest-magnitude ``rank`` eigenvalues of W^{1/2} K W^{1/2}."""
    m = grid.size
    if not 1 <= rank <= m:
        raise InvalidParameterError(f"rank must lie in 1..{m}, got {rank}")

    matrix = kernel_matrix(kernel, grid)
    if not np.allclose(matrix, matrix.T, rtol=1e-12, atol=1e-15):
        raise InvalidParameterError("Nystrom spectrum needs a symmetric kernel")
    root_weights = np.sqrt(grid.weights)
    weighted = root_weights[:, None] * matrix * root_weights[None, :]
    weighted = 0.5 * (weighted + weighted.T)

    if 2 * rank < m:
        # the top |lambda| values sit at the two ends of the sorted spectrum
        candidates = np.concatenate(
            [
                _eigvalsh(weighted, [0, rank - 1]),
                _eigvalsh(weighted, [m - rank, m - 1]),
            ]
        )
    else:
        candidates = _eigvalsh(weighted)

    ordered = candidates[np.argsort(-np.abs(candidates), kind="stable")][:rank]
    logger.debug(f"Nystrom spectrum: m={m}, rank={rank}, top={ordered[:3]}")
    return ChaosSpectrum.from_lambdas(ordered)


def sample_second_chaos(
    spectrum: ChaosSpectrum, seed: int, size: Optional[int] = None
):
    """Draws of sum_k lambda_k (xi_k^2 - 1) with i.i.d. standard normal xi_k."""
    count = 1 if size is None else int(size)
    lambdas = spectrum.lambdas
    draws = np.zeros(count, dtype=np.float64)
    if lambdas.size:
        rng = stream(seed)
        rows = max(1, _BLOCK_ENTRIES // lambdas.size)
        for start in range(0, count, rows):
            stop = min(start + rows, count)
            xi = rng.standard_normal((stop - start, lambdas.size))
            draws[start:stop] = (xi * xi - 1.0) @ lambdas
    return float(draws[0]) if size is None else draws
