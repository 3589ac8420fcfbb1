import logging
import math
import time
from typing import Optional

import numpy as np
from scipy.special import ndtr

from yule_ou.common.exceptions import (
    EmptySampleError,
    SkipLimitExceededError,
    ZeroBinsError,
)
from yule_ou.common.seeding import derive_seed
from yule_ou.configurations.config import settings
from yule_ou.models.mc_config import McConfig, Statistic
from yule_ou.models.mc_summary import Ecdf, Histogram, KsReport, McSample, McSummary
from yule_ou.models.ou_params import OuParams
from yule_ou.models.report import DiscretizationReport
from yule_ou.models.sample_grid import SampleGrid
from yule_ou.services import analytic_service
from yule_ou.services.ou_simulation_service import simulate, simulate_refined_exact
from yule_ou.services.yule_stats_service import discretization_delta, rho_discrete
from yule_ou.workers.replication_worker import run_replications

logger = logging.getLogger(__name__)


def replication_seed(master_seed: int, replication: int) -> int:
    return derive_seed(master_seed, replication)


def replication_value(config: McConfig, replication: int) -> float:
    params = OuParams(theta=config.theta)
    pair = simulate(
        params,
        config.grid,
        replication_seed(config.master_seed, replication),
        config.scheme,
    )
    result = rho_discrete(pair, config.theta)
    return result.psi if config.statistic is Statistic.PSI else result.rho


def run_mc(config: McConfig, max_workers: Optional[int] = None) -> McSample:
    """One statistic value per replication, ordered by replication index."""
    logger.info(
        f"Starting Monte Carlo: theta={config.theta}, n={config.n}, "
        f"delta={config.grid.delta:.6g}, reps={config.replications}, "
        f"scheme={config.scheme.value}, statistic={config.statistic.value}"
    )
    started = time.perf_counter()
    values = run_replications(
        lambda replication: replication_value(config, replication),
        config.replications,
        max_workers,
    )

    kept = ~np.isnan(values)
    skipped = int(config.replications - kept.sum())
    if skipped > settings.skip_fraction_limit * config.replications:
        raise SkipLimitExceededError(
            f"{skipped} of {config.replications} replications were degenerate"
        )

    logger.info(f"Finished Monte Carlo in {time.perf_counter() - started:.2f}s")
    return McSample(
        replications=np.flatnonzero(kept),
        values=values[kept],
        skipped=skipped,
    )


def _as_array(samples) -> np.ndarray:
    if isinstance(samples, McSample):
        samples = samples.values
    return np.asarray(samples, dtype=np.float64).reshape(-1)


def summarize(samples) -> McSummary:
    values = _as_array(samples)
    if values.size < 2:
        raise EmptySampleError(f"summary needs at least 2 values, got {values.size}")
    return McSummary(
        count=int(values.size),
        mean=float(values.mean()),
        median=float(np.median(values)),
        stddev=float(values.std(ddof=1)),
        min=float(values.min()),
        max=float(values.max()),
    )


def normal_cdf(x):
    """Standard normal CDF (Cephes ndtr, accurate far below 1e-12 absolute)."""
    return ndtr(x)


def kolmogorov_distance(samples) -> KsReport:
    """sup |F_N - Phi| over the sample, with the abscissa where it is attained."""
    values = np.sort(_as_array(samples))
    size = values.size
    if size < 10:
        raise EmptySampleError(f"Kolmogorov distance needs at least 10 values, got {size}")

    cdf = normal_cdf(values)
    ranks = np.arange(1, size + 1, dtype=np.float64)
    gaps = np.maximum(ranks / size - cdf, cdf - (ranks - 1.0) / size)
    worst = int(np.argmax(gaps))
    return KsReport(
        distance=float(min(max(gaps[worst], 0.0), 1.0)),
        sample_size=size,
        location=float(values[worst]),
    )


def ecdf(samples) -> Ecdf:
    values = _as_array(samples)
    if values.size < 1:
        raise EmptySampleError("empirical CDF of an empty sample")
    x, counts = np.unique(values, return_counts=True)
    fractions = np.cumsum(counts) / values.size
    fractions[-1] = 1.0
    return Ecdf(x=x, fractions=fractions)


def histogram(samples, bins: int) -> Histogram:
    if bins < 1:
        raise ZeroBinsError(f"histogram needs at least one bin, got {bins}")
    values = _as_array(samples)
    if values.size < 1:
        raise EmptySampleError("histogram of an empty sample")
    counts, edges = np.histogram(values, bins=bins)
    return Histogram(edges=edges, counts=counts)


def run_discretization_mc(
    theta: float,
    n: int,
    delta: float,
    replications: int,
    master_seed: int,
    refine: int = 16,
    max_workers: Optional[int] = None,
) -> DiscretizationReport:
    """Mean of delta(n)^2 = (A(n) - F_{T_n})^2 with F_{T_n} from a refined exact path."""
    params = OuParams(theta=theta)
    grid = SampleGrid(n=n, delta=delta)

    def task(replication: int) -> float:
        fine = simulate_refined_exact(
            params, grid, refine, replication_seed(master_seed, replication)
        )
        return discretization_delta(fine, refine) ** 2

    squares = run_replications(task, replications, max_workers, "discretization")
    return DiscretizationReport(
        theta=theta,
        n=n,
        delta=delta,
        refine=refine,
        replications=replications,
        mean_delta_sq=float(squares.mean()),
        standard_error=float(squares.std(ddof=1) / math.sqrt(replications)),
        bound=analytic_service.discretization_error_bound(theta, n, delta),
    )


def two_sided_p_value(statistic: float) -> float:
    """2 (1 - Phi(|statistic|)), computed in the upper tail directly."""
    return float(min(1.0, 2.0 * normal_cdf(-abs(statistic))))
