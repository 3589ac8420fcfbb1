import inspect
import logging
import math
import time
from typing import Any, Callable

import numpy as np
from pydantic import BaseModel

from yule_ou.common.exceptions import InvalidParameterError
from yule_ou.configurations.config import settings
from yule_ou.models.experiment_spec import Command, ExperimentSpec
from yule_ou.models.kernel_grid import KernelDomain
from yule_ou.models.mc_config import McConfig, Statistic
from yule_ou.models.ou_params import OuParams
from yule_ou.models.path_pair import PathPair
from yule_ou.models.report import AssessmentReport, KernelCheckReport, TableRow
from yule_ou.models.sample_grid import SampleGrid
from yule_ou.models.scheme import Scheme
from yule_ou.services import (
    analytic_service,
    chaos_kernel_service,
    csv_io_service,
    mc_harness_service,
    ou_simulation_service,
    yule_stats_service,
)

logger = logging.getLogger(__name__)

TABLE_THETAS = (1.0, 5.0, 10.0)
TABLE_NS = (10_000, 50_000, 100_000)
P_VALUE_FLOOR = 1e-15

ANALYTIC_FORMULAS: dict[str, Callable[..., Any]] = {
    "var_FT": analytic_service.var_FT,
    "mu_theta": analytic_service.mu_theta,
    "mean_sq_xbar": analytic_service.mean_sq_xbar,
    "rate_bound_continuous": analytic_service.rate_bound_continuous,
    "rate_bound_discrete": analytic_service.rate_bound_discrete,
    "optimal_mesh": analytic_service.optimal_mesh,
    "mesh_plan": analytic_service.mesh_plan,
    "samples_for_horizon": analytic_service.samples_for_horizon,
    "implied_rate_constant": analytic_service.implied_rate_constant,
    "product_normal_mgf": analytic_service.product_normal_mgf,
    "product_normal_beta_floor": analytic_service.product_normal_beta_floor,
    "product_normal_abs_mean": analytic_service.product_normal_abs_mean,
    "mp_g": analytic_service.mp_g,
    "mp_optimal_epsilon": analytic_service.mp_optimal_epsilon,
    "chaos_tail_bound": analytic_service.chaos_tail_bound,
    "discretization_error_bound": analytic_service.discretization_error_bound,
    "an_optimal_epsilon": analytic_service.an_optimal_epsilon,
    "variance_error_constant": analytic_service.variance_error_constant,
    "ft_kolmogorov_constant": analytic_service.ft_kolmogorov_constant,
    "cst": analytic_service.denominator_variance_constant,
    "continuous_threshold": analytic_service.continuous_threshold,
    "delta_constant": analytic_service.delta_constant,
    "norm_sq_k_T": analytic_service.norm_sq_k_T,
    "var_A_theta": analytic_service.var_A_theta,
    "var_A_theta_bound": analytic_service.var_A_theta_bound,
    "y11_deterministic": analytic_service.y11_deterministic,
    "var_y11_tilde": analytic_service.var_y11_tilde,
    "mean_sq_xtilde": analytic_service.mean_sq_xtilde,
    "mean_sq_xtilde_bound": analytic_service.mean_sq_xtilde_bound,
    "d1n_second_moment": analytic_service.d1n_second_moment,
    "d1n_second_moment_bound": analytic_service.d1n_second_moment_bound,
    "d2n_deviation": analytic_service.d2n_deviation,
    "contraction_bound": chaos_kernel_service.contraction_bound,
}

# CLI parameter names differ from python keywords in one place
_ARGUMENT_ALIASES = {"lambda_": "lambda"}


def formula_arguments(name: str) -> list[str]:
    if name not in ANALYTIC_FORMULAS:
        raise InvalidParameterError(
            f"unknown formula {name!r}; choose from {sorted(ANALYTIC_FORMULAS)}"
        )
    signature = inspect.signature(ANALYTIC_FORMULAS[name])
    return [_ARGUMENT_ALIASES.get(arg, arg) for arg in signature.parameters]


def _jsonable(value: Any) -> Any:
    if isinstance(value, BaseModel):
        return value.model_dump(mode="json", by_alias=True)
    if isinstance(value, tuple):
        return [_jsonable(item) for item in value]
    if isinstance(value, np.ndarray):
        return value.tolist()
    return value


def _grid(parameters: dict[str, Any]) -> SampleGrid:
    n = int(parameters["n"])
    if parameters.get("delta") is not None:
        return SampleGrid(n=n, delta=float(parameters["delta"]))
    return SampleGrid.from_exponent(n, float(parameters.get("lambda") or settings.default_lambda))


def _seed(parameters: dict[str, Any]) -> int:
    seed = parameters.get("seed")
    return settings.default_seed if seed is None else int(seed)


def _scheme(parameters: dict[str, Any]) -> Scheme:
    return Scheme(parameters.get("scheme") or settings.default_scheme)


def _thetas(parameters: dict[str, Any]) -> list[float]:
    thetas = parameters.get("theta")
    if thetas is None:
        raise InvalidParameterError("theta is required")
    return [float(t) for t in (thetas if isinstance(thetas, (list, tuple)) else [thetas])]


def _single_theta(parameters: dict[str, Any]) -> float:
    thetas = _thetas(parameters)
    if len(thetas) != 1:
        raise InvalidParameterError(f"exactly one theta expected, got {thetas}")
    return thetas[0]


def _single_n(parameters: dict[str, Any]) -> int:
    ns = parameters.get("n")
    if isinstance(ns, (list, tuple)):
        if len(ns) != 1:
            raise InvalidParameterError(f"exactly one n expected, got {ns}")
        ns = ns[0]
    if ns is None:
        raise InvalidParameterError("n is required")
    return int(ns)


def _pair_from(parameters: dict[str, Any]) -> PathPair:
    if parameters.get("input"):
        return csv_io_service.read_path_pair(parameters["input"])
    theta = _single_theta(parameters)
    grid = _grid({**parameters, "n": _single_n(parameters)})
    return ou_simulation_service.simulate(
        OuParams(theta=theta), grid, _seed(parameters), _scheme(parameters)
    )


def _mc_config(parameters: dict[str, Any], theta: float, n: int, statistic: Statistic) -> McConfig:
    mesh: dict[str, float] = {}
    if parameters.get("delta") is not None:
        mesh["delta"] = float(parameters["delta"])
    else:
        mesh["lambda"] = float(parameters.get("lambda") or settings.default_lambda)
    return McConfig(
        theta=theta,
        n=n,
        replications=int(parameters.get("reps") or settings.default_replications),
        master_seed=_seed(parameters),
        scheme=_scheme(parameters),
        statistic=statistic,
        **mesh,
    )


def run_simulate(spec: ExperimentSpec) -> dict[float, PathPair]:
    parameters = spec.parameters
    grid = _grid({**parameters, "n": _single_n(parameters)})
    seed = _seed(parameters)
    scheme = _scheme(parameters)
    pairs = {
        theta: ou_simulation_service.simulate(OuParams(theta=theta), grid, seed, scheme)
        for theta in _thetas(parameters)
    }
    if len(pairs) == 1:
        csv_io_service.export_path_pair(next(iter(pairs.values())), spec.output_path, parameters)
    else:
        csv_io_service.export_path_pairs(pairs, spec.output_path, {**parameters, "seed": seed})
    return pairs


def run_rho(spec: ExperimentSpec) -> dict[str, Any]:
    parameters = spec.parameters
    pair = _pair_from(parameters)
    theta = parameters.get("theta")
    theta = _single_theta(parameters) if theta else None
    document = {
        "discrete": rho_document(yule_stats_service.rho_discrete(pair, theta)),
        "quadrature": rho_document(yule_stats_service.rho_quadrature(pair, theta)),
    }
    if spec.command is Command.PSI:
        document = {"psi": document["discrete"]["psi"], **document}
    csv_io_service.write_json(document, spec.output_path, pair.seed, parameters)
    return document


def rho_document(result) -> dict[str, Any]:
    return result.model_dump(mode="json")


def run_mc(spec: ExperimentSpec):
    parameters = spec.parameters
    statistic = Statistic(parameters.get("statistic") or Statistic.RHO.value)
    config = _mc_config(parameters, _single_theta(parameters), _single_n(parameters), statistic)
    sample = mc_harness_service.run_mc(config, parameters.get("workers"))
    csv_io_service.write_mc_sample(
        sample, spec.output_path, config.master_seed, _provenance_config(parameters)
    )
    return sample


def _provenance_config(parameters: dict[str, Any]) -> dict[str, Any]:
    # worker count never changes results, so it stays out of the provenance
    return {key: value for key, value in parameters.items() if key != "workers"}


def run_table1(spec: ExperimentSpec) -> list[TableRow]:
    """Mean, median and standard deviation of rho_tilde(n) over a theta x n grid."""
    parameters = spec.parameters
    thetas = _thetas(parameters) if parameters.get("theta") else list(TABLE_THETAS)
    ns = parameters.get("n") or list(TABLE_NS)
    ns = [int(n) for n in (ns if isinstance(ns, (list, tuple)) else [ns])]

    started = time.perf_counter()
    rows = []
    for theta in thetas:
        for n in ns:
            config = _mc_config(parameters, theta, n, Statistic.RHO)
            summary = mc_harness_service.summarize(
                mc_harness_service.run_mc(config, parameters.get("workers"))
            )
            logger.debug(f"Table cell theta={theta}, n={n}: {summary}")
            rows.append(
                TableRow(
                    theta=theta,
                    n=n,
                    T_n=config.grid.horizon,
                    mean=summary.mean,
                    median=summary.median,
                    stddev=summary.stddev,
                )
            )
    logger.info(f"Table of {len(rows)} cells in {time.perf_counter() - started:.2f}s")
    csv_io_service.write_table(
        rows, spec.output_path, _seed(parameters), _provenance_config(parameters)
    )
    return rows


def run_ks(spec: ExperimentSpec) -> dict[str, Any]:
    """Kolmogorov distance of psi(n, theta) to N(0, 1), with plot-ready data."""
    parameters = spec.parameters
    config = _mc_config(
        parameters, _single_theta(parameters), _single_n(parameters), Statistic.PSI
    )
    sample = mc_harness_service.run_mc(config, parameters.get("workers"))
    report = mc_harness_service.kolmogorov_distance(sample)
    summary = mc_harness_service.summarize(sample)
    provenance = _provenance_config(parameters)

    if parameters.get("samples_out"):
        csv_io_service.write_mc_sample(
            sample, parameters["samples_out"], config.master_seed, provenance
        )
    if parameters.get("ecdf_out"):
        csv_io_service.write_ecdf(
            mc_harness_service.ecdf(sample), parameters["ecdf_out"], config.master_seed, provenance
        )
    if parameters.get("hist_out"):
        csv_io_service.write_histogram(
            mc_harness_service.histogram(sample, int(parameters.get("bins") or 30)),
            parameters["hist_out"],
            config.master_seed,
            provenance,
        )

    document: dict[str, Any] = {
        "ks": report.model_dump(mode="json"),
        "summary": summary.model_dump(mode="json"),
        "skipped": sample.skipped,
    }
    if config.lambda_ is not None:
        document["implied_rate_constant"] = analytic_service.implied_rate_constant(
            report.distance, config.n, config.lambda_
        )
    csv_io_service.write_json(document, spec.output_path, config.master_seed, provenance)
    return document


def evaluate_formula(name: str, parameters: dict[str, Any]) -> Any:
    arguments = formula_arguments(name)
    missing = [arg for arg in arguments if parameters.get(arg) is None]
    if missing:
        raise InvalidParameterError(f"formula {name} needs {missing}")
    values = [
        int(parameters[arg]) if arg == "n" else float(parameters[arg]) for arg in arguments
    ]
    return ANALYTIC_FORMULAS[name](*values)


def run_analytic(spec: ExperimentSpec) -> dict[str, Any]:
    parameters = spec.parameters
    name = parameters["name"]
    used = {arg: parameters.get(arg) for arg in formula_arguments(name)}
    document = {
        "name": name,
        "params": used,
        "value": _jsonable(evaluate_formula(name, parameters)),
    }
    csv_io_service.write_json(document, spec.output_path, None, parameters)
    return document


def run_mesh_plan(spec: ExperimentSpec) -> dict[str, Any]:
    parameters = spec.parameters
    n = _single_n(parameters)
    if parameters.get("lambda") is not None:
        plan = analytic_service.mesh_plan(n, float(parameters["lambda"]))
    else:
        plan = analytic_service.optimal_mesh(n)
    document = {"plan": _jsonable(plan)}
    csv_io_service.write_json(document, spec.output_path, None, parameters)
    return document


def kernel_check(theta: float, T: float, m: int, contraction_m: int, rank: int) -> KernelCheckReport:
    symmetric = chaos_kernel_service.make_grid(KernelDomain.SYMMETRIC_TT, T, m)
    positive = chaos_kernel_service.make_grid(KernelDomain.POSITIVE_T, T, m)

    var_quadrature = 2.0 * chaos_kernel_service.l2_norm_sq(
        chaos_kernel_service.h_tilde_kernel(theta, T), symmetric, richardson=True
    )
    contraction = chaos_kernel_service.contraction_norm_sq(
        theta,
        T,
        chaos_kernel_service.make_grid(KernelDomain.SYMMETRIC_TT, T, contraction_m),
    )
    spectrum = chaos_kernel_service.nystrom_spectrum(
        chaos_kernel_service.k_T_kernel(theta, T), positive, rank
    )
    diagonal = chaos_kernel_service.k_T_eval(theta, T, positive.nodes, positive.nodes)
    y11_variance = 2.0 * chaos_kernel_service.l2_norm_sq(
        chaos_kernel_service.y11_tilde_kernel(theta, T), positive, richardson=True
    )

    return KernelCheckReport(
        theta=theta,
        horizon=T,
        m=m,
        var_closed_form=analytic_service.var_FT(theta, T),
        var_quadrature=var_quadrature,
        contraction_value=contraction,
        contraction_bound=chaos_kernel_service.contraction_bound(theta, T),
        top_eigenvalues=spectrum.lambdas.tolist(),
        k_trace=float(positive.weights @ diagonal),
        k_trace_closed_form=analytic_service.mu_theta(theta, T) / (2.0 * theta),
        y11_tilde_variance=y11_variance,
        y11_tilde_variance_closed_form=analytic_service.var_y11_tilde(theta, T),
    )


def run_kernel_check(spec: ExperimentSpec) -> KernelCheckReport:
    parameters = spec.parameters
    report = kernel_check(
        _single_theta(parameters),
        float(parameters["T"]),
        int(parameters.get("m") or 2048),
        int(parameters.get("contraction_m") or 256),
        int(parameters.get("rank") or 10),
    )
    csv_io_service.write_json(report.model_dump(mode="json"), spec.output_path, None, parameters)
    return report


def assess(spec: ExperimentSpec) -> AssessmentReport:
    """Test an observed pair of series for nonsense correlation at known theta."""
    parameters = spec.parameters
    theta = _single_theta(parameters)
    pair = csv_io_service.read_path_pair(parameters["input"])
    result = yule_stats_service.rho_discrete(pair, theta)
    p_value = mc_harness_service.two_sided_p_value(result.psi)
    display = f"< {P_VALUE_FLOOR:g}" if p_value < P_VALUE_FLOOR else f"{p_value:.6g}"

    horizon = pair.grid.horizon
    rate_bound = None
    rate_note = None
    if horizon > math.e:
        rate_bound = analytic_service.rate_bound_discrete(theta, pair.grid.n, pair.grid.delta)
    else:
        rate_note = f"horizon {horizon:.6g} <= e: no rate bound applies"

    report = AssessmentReport(
        n=pair.grid.n,
        delta=pair.grid.delta,
        horizon=horizon,
        theta=theta,
        rho=result.rho,
        psi=result.psi,
        p_value=p_value,
        p_value_display=display,
        rate_bound=rate_bound,
        rate_note=rate_note,
    )
    csv_io_service.write_json(report.model_dump(mode="json"), spec.output_path, None, parameters)
    return report


def run_discretization(spec: ExperimentSpec):
    parameters = spec.parameters
    theta = _single_theta(parameters)
    grid = _grid({**parameters, "n": _single_n(parameters)})
    report = mc_harness_service.run_discretization_mc(
        theta,
        grid.n,
        grid.delta,
        int(parameters.get("reps") or settings.default_replications),
        _seed(parameters),
        int(parameters.get("refine") or 16),
        parameters.get("workers"),
    )
    csv_io_service.write_json(
        report.model_dump(mode="json"),
        spec.output_path,
        _seed(parameters),
        _provenance_config(parameters),
    )
    return report


_RUNNERS: dict[Command, Callable[[ExperimentSpec], Any]] = {
    Command.SIMULATE: run_simulate,
    Command.RHO: run_rho,
    Command.PSI: run_rho,
    Command.MC: run_mc,
    Command.MC_TABLE: run_table1,
    Command.KS: run_ks,
    Command.ANALYTIC: run_analytic,
    Command.MESH_PLAN: run_mesh_plan,
    Command.KERNEL_CHECK: run_kernel_check,
    Command.ASSESS: assess,
    Command.DISCRETIZATION: run_discretization,
}


def run_experiment(spec: ExperimentSpec) -> Any:
    logger.info(f"Running {spec.command.value}")
    return _RUNNERS[spec.command](spec)
