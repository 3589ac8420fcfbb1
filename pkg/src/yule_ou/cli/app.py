import logging
import sys
from pathlib import Path
from typing import Annotated, Any, List, Optional, Sequence

import click
import typer
from pydantic import ValidationError

from yule_ou.common.exceptions import InvalidParameterError, YuleError
from yule_ou.models.experiment_spec import Command, ExperimentSpec, OutputFormat
from yule_ou.models.mc_config import Statistic
from yule_ou.models.scheme import Scheme
from yule_ou.services import experiment_service

logger = logging.getLogger(__name__)

app = typer.Typer(
    name="yule-ou",
    help="Yule's nonsense correlation for pairs of Ornstein-Uhlenbeck paths.",
    add_completion=False,
    no_args_is_help=True,
)

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_USAGE = 2

_CSV_COMMANDS = {Command.SIMULATE, Command.MC, Command.MC_TABLE}

_REQUIRED: dict[Command, tuple[str, ...]] = {
    Command.SIMULATE: ("theta", "n"),
    Command.PSI: ("theta",),
    Command.MC: ("theta", "n"),
    Command.KS: ("theta", "n"),
    Command.MESH_PLAN: ("n",),
    Command.KERNEL_CHECK: ("theta", "T"),
    Command.ASSESS: ("input", "theta"),
    Command.DISCRETIZATION: ("theta", "n"),
    Command.ANALYTIC: ("name",),
}

Theta = Annotated[
    Optional[List[float]], typer.Option("--theta", help="Drift theta; repeatable")
]
N = Annotated[Optional[List[int]], typer.Option("--n", help="Sample count; repeatable")]
Lambda = Annotated[
    Optional[float], typer.Option("--lambda", help="Mesh exponent: delta = n^-lambda")
]
Delta = Annotated[Optional[float], typer.Option("--delta", help="Explicit mesh")]
SchemeOpt = Annotated[Optional[Scheme], typer.Option("--scheme")]
Seed = Annotated[Optional[int], typer.Option("--seed", min=0, max=2**64 - 1)]
Reps = Annotated[Optional[int], typer.Option("--reps", min=2)]
Workers = Annotated[
    Optional[int], typer.Option("--workers", min=1, help="Overrides YULE_MAX_WORKERS")
]
Output = Annotated[str, typer.Option("--output", "-o", help="File path, '-' for stdout")]
Input = Annotated[Optional[str], typer.Option("--input", help="CSV with columns t,x1,x2")]


def _clean(params: dict[str, Any]) -> dict[str, Any]:
    cleaned = {}
    for key, value in params.items():
        if value is None or (isinstance(value, (list, tuple)) and not value):
            continue
        if isinstance(value, tuple):
            value = list(value)
        if isinstance(value, (Scheme, Statistic)):
            value = value.value
        cleaned["lambda" if key == "lambda_" else key] = value
    return cleaned


def build_spec(command: Command, params: dict[str, Any]) -> ExperimentSpec:
    """Validate parsed options into an ExperimentSpec or raise a usage error."""
    parameters = _clean(params)
    output_path = parameters.pop("output", "-")

    if "lambda" in parameters and "delta" in parameters:
        raise click.UsageError("--lambda and --delta are mutually exclusive")

    required = list(_REQUIRED.get(command, ()))
    if command is Command.RHO and "input" not in parameters:
        required += ["theta", "n"]
    if command is Command.PSI and "input" not in parameters:
        required += ["n"]
    if command is Command.ANALYTIC and "name" in parameters:
        try:
            required += experiment_service.formula_arguments(parameters["name"])
        except InvalidParameterError as e:
            raise click.UsageError(str(e)) from e
    missing = [name for name in required if name not in parameters]
    if missing:
        flags = ", ".join(f"--{name.replace('_', '-')}" for name in missing)
        raise click.UsageError(f"{command.value} needs {flags}")

    if output_path != "-" and not Path(output_path).parent.is_dir():
        raise click.UsageError(f"cannot write {output_path}: no such directory")

    return ExperimentSpec(
        command=command,
        parameters=parameters,
        output_path=output_path,
        format=OutputFormat.CSV if command in _CSV_COMMANDS else OutputFormat.JSON,
    )


def execute(spec: ExperimentSpec) -> int:
    try:
        experiment_service.run_experiment(spec)
    except (YuleError, ValidationError, OSError) as e:
        logger.error(f"{spec.command.value} failed: {e}")
        return EXIT_RUNTIME
    return EXIT_OK


def _run(command: Command, params: dict[str, Any]) -> None:
    code = execute(build_spec(command, params))
    if code != EXIT_OK:
        raise typer.Exit(code=code)


@app.command()
def simulate(
    theta: Theta = None,
    n: N = None,
    lambda_: Lambda = None,
    delta: Delta = None,
    scheme: SchemeOpt = None,
    seed: Seed = None,
    output: Output = "-",
):
    """Simulate path pairs and write t,x1,x2 (one block per theta)."""
    _run(Command.SIMULATE, locals())


@app.command()
def rho(
    input: Input = None,
    theta: Theta = None,
    n: N = None,
    lambda_: Lambda = None,
    delta: Delta = None,
    scheme: SchemeOpt = None,
    seed: Seed = None,
    output: Output = "-",
):
    """Discrete and quadrature correlation of one pair."""
    _run(Command.RHO, locals())


@app.command()
def psi(
    input: Input = None,
    theta: Theta = None,
    n: N = None,
    lambda_: Lambda = None,
    delta: Delta = None,
    scheme: SchemeOpt = None,
    seed: Seed = None,
    output: Output = "-",
):
    """Standardized statistic sqrt(theta T_n) rho_tilde(n) of one pair."""
    _run(Command.PSI, locals())


@app.command()
def mc(
    theta: Theta = None,
    n: N = None,
    lambda_: Lambda = None,
    delta: Delta = None,
    reps: Reps = None,
    seed: Seed = None,
    scheme: SchemeOpt = None,
    statistic: Annotated[Optional[Statistic], typer.Option("--statistic")] = None,
    workers: Workers = None,
    output: Output = "-",
):
    """One Monte Carlo cell: replication,value."""
    _run(Command.MC, locals())


@app.command("mc-table")
def mc_table(
    theta: Theta = None,
    n: N = None,
    lambda_: Lambda = None,
    delta: Delta = None,
    reps: Reps = None,
    seed: Seed = None,
    scheme: SchemeOpt = None,
    workers: Workers = None,
    output: Output = "-",
):
    """Mean, median and standard deviation of rho_tilde over a theta x n grid."""
    _run(Command.MC_TABLE, locals())


@app.command()
def ks(
    theta: Theta = None,
    n: N = None,
    lambda_: Lambda = None,
    delta: Delta = None,
    reps: Reps = None,
    seed: Seed = None,
    scheme: SchemeOpt = None,
    workers: Workers = None,
    bins: Annotated[Optional[int], typer.Option("--bins", min=1)] = None,
    samples_out: Annotated[Optional[str], typer.Option("--samples-out")] = None,
    ecdf_out: Annotated[Optional[str], typer.Option("--ecdf-out")] = None,
    hist_out: Annotated[Optional[str], typer.Option("--hist-out")] = None,
    output: Output = "-",
):
    """Kolmogorov distance of psi(n, theta) to the standard normal."""
    _run(Command.KS, locals())


@app.command()
def analytic(
    name: Annotated[Optional[str], typer.Option("--name", help="Formula name")] = None,
    theta: Annotated[Optional[float], typer.Option("--theta")] = None,
    T: Annotated[Optional[float], typer.Option("--T")] = None,
    n: Annotated[Optional[int], typer.Option("--n")] = None,
    delta: Delta = None,
    lambda_: Lambda = None,
    beta: Annotated[Optional[float], typer.Option("--beta")] = None,
    sigma1: Annotated[Optional[float], typer.Option("--sigma1")] = None,
    sigma2: Annotated[Optional[float], typer.Option("--sigma2")] = None,
    y: Annotated[Optional[float], typer.Option("--y")] = None,
    variance: Annotated[Optional[float], typer.Option("--variance")] = None,
    k3: Annotated[Optional[float], typer.Option("--k3")] = None,
    epsilon: Annotated[Optional[float], typer.Option("--epsilon")] = None,
    distance: Annotated[Optional[float], typer.Option("--distance")] = None,
    output: Output = "-",
):
    """Evaluate one closed-form quantity as JSON."""
    _run(Command.ANALYTIC, locals())


@app.command("mesh-plan")
def mesh_plan(
    n: N = None,
    lambda_: Lambda = None,
    output: Output = "-",
):
    """Mesh, horizon and predicted rate for n samples (optimal mesh by default)."""
    _run(Command.MESH_PLAN, locals())


@app.command("kernel-check")
def kernel_check(
    theta: Theta = None,
    T: Annotated[Optional[float], typer.Option("--T")] = None,
    m: Annotated[Optional[int], typer.Option("--m", min=64)] = None,
    contraction_m: Annotated[
        Optional[int], typer.Option("--contraction-m", min=128)
    ] = None,
    rank: Annotated[Optional[int], typer.Option("--rank", min=1)] = None,
    output: Output = "-",
):
    """Quadrature and spectral checks of the second-chaos kernels."""
    _run(Command.KERNEL_CHECK, locals())


@app.command()
def assess(
    input: Input = None,
    theta: Theta = None,
    output: Output = "-",
):
    """p-value of the observed correlation of two series under independence."""
    _run(Command.ASSESS, locals())


@app.command()
def discretization(
    theta: Theta = None,
    n: N = None,
    lambda_: Lambda = None,
    delta: Delta = None,
    reps: Reps = None,
    seed: Seed = None,
    refine: Annotated[Optional[int], typer.Option("--refine", min=1)] = None,
    workers: Workers = None,
    output: Output = "-",
):
    """Mean squared gap between the Riemann sum and the refined integral."""
    _run(Command.DISCRETIZATION, locals())


def parse_cli(argv: Optional[Sequence[str]] = None) -> ExperimentSpec:
    """Parse arguments into an ExperimentSpec without running anything."""
    group = typer.main.get_command(app)
    args = list(sys.argv[1:] if argv is None else argv)
    ctx = group.make_context(app.info.name, args)
    remaining = ctx.protected_args + ctx.args
    if not remaining:
        raise click.UsageError("missing command", ctx)
    name, command, rest = group.resolve_command(ctx, remaining)
    sub_ctx = command.make_context(name, rest, parent=ctx)
    return build_spec(Command(name), sub_ctx.params)


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        spec = parse_cli(argv)
    except click.exceptions.Exit as e:
        return e.exit_code
    except click.ClickException as e:
        e.show()
        return e.exit_code
    return execute(spec)
