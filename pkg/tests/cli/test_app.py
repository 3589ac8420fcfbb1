import orjson
import pandas as pd
import pytest
from click import UsageError
from typer.testing import CliRunner

from yule_ou.cli.app import EXIT_OK, EXIT_RUNTIME, EXIT_USAGE, app, main, parse_cli
from yule_ou.models.experiment_spec import Command, OutputFormat

runner = CliRunner()


def test_parse_mc_table():
    spec = parse_cli(
        ["mc-table", "--theta", "1", "--n", "10000", "--lambda", "0.6", "--reps", "500", "--seed", "42"]
    )
    assert spec.command is Command.MC_TABLE
    assert spec.format is OutputFormat.CSV
    assert spec.output_path == "-"
    assert spec.parameters == {
        "theta": [1.0],
        "n": [10000],
        "lambda": 0.6,
        "reps": 500,
        "seed": 42,
    }


def test_parse_mesh_plan():
    spec = parse_cli(["mesh-plan", "--n", "10000000"])
    assert spec.command is Command.MESH_PLAN
    assert spec.parameters == {"n": [10_000_000]}
    assert spec.format is OutputFormat.JSON


def test_parse_assess():
    spec = parse_cli(["assess", "--input", "pair.csv", "--theta", "2"])
    assert spec.command is Command.ASSESS
    assert spec.parameters == {"input": "pair.csv", "theta": [2.0]}


def test_parse_repeated_options():
    spec = parse_cli(["simulate", "--theta", "1", "--theta", "5", "--n", "100", "--scheme", "exact"])
    assert spec.parameters["theta"] == [1.0, 5.0]
    assert spec.parameters["scheme"] == "exact"


@pytest.mark.parametrize(
    "argv",
    [
        ["mc", "--theta", "1", "--n", "100", "--lambda", "0.6", "--delta", "0.01"],
        ["simulate", "--n", "100"],
        ["rho", "--theta", "1"],
        ["analytic", "--name", "var_FT", "--theta", "1"],
        ["analytic", "--name", "no_such_formula"],
    ],
)
def test_usage_errors(argv):
    with pytest.raises(UsageError):
        parse_cli(argv)


@pytest.mark.parametrize(
    "argv",
    [
        ["simulate", "--theta", "1", "--n", "100", "--frobnicate"],
        ["simulate", "--theta", "1", "--n", "100", "--lambda", "0.6", "--delta", "0.1"],
        ["mesh-plan"],
        ["no-such-command"],
        ["mc", "--theta", "1", "--n", "100", "--reps", "1"],
    ],
)
def test_usage_errors_exit_with_two(argv):
    assert main(argv) == EXIT_USAGE


def test_missing_output_directory_is_a_usage_error(tmp_path):
    target = tmp_path / "missing" / "out.json"
    assert main(["mesh-plan", "--n", "128", "-o", str(target)]) == EXIT_USAGE


def test_successful_run(tmp_path):
    target = tmp_path / "pair.csv"
    assert main(["simulate", "--theta", "1", "--n", "64", "--seed", "1", "-o", str(target)]) == EXIT_OK
    assert target.read_text(encoding="utf-8").startswith("# seed=1, ")
    assert len(pd.read_csv(target, comment="#")) == 65


def test_runtime_errors_exit_with_one(tmp_path):
    assert main(["assess", "--input", str(tmp_path / "absent.csv"), "--theta", "1"]) == EXIT_RUNTIME

    bad = tmp_path / "bad.csv"
    bad.write_text("t,x1,x2\n0,0,0\n1,1,2\n2.5,2,1\n3,0,1\n", encoding="utf-8")
    assert main(["assess", "--input", str(bad), "--theta", "1"]) == EXIT_RUNTIME

    assert main(["analytic", "--name", "var_FT", "--theta", "-1", "--T", "1"]) == EXIT_RUNTIME


@pytest.mark.parametrize(
    "content", ["", "t,x1,x2\n0,1,1\n1,oops,1\n2,3,1\n3,1,2\n"], ids=["empty", "text"]
)
def test_malformed_input_exits_with_one(tmp_path, content):
    bad = tmp_path / "bad.csv"
    bad.write_text(content, encoding="utf-8")
    assert main(["assess", "--input", str(bad), "--theta", "1"]) == EXIT_RUNTIME


def test_help_exits_cleanly():
    assert main(["--help"]) == EXIT_OK


def test_mesh_plan_through_typer():
    result = runner.invoke(app, ["mesh-plan", "--n", "128"])
    assert result.exit_code == 0
    document = orjson.loads(result.stdout)
    assert document["plan"]["horizon"] == pytest.approx(4.0)
    assert document["schema_version"] == 1


def test_analytic_through_typer():
    result = runner.invoke(app, ["analytic", "--name", "cst", "--theta", "1"])
    assert result.exit_code == 0
    assert orjson.loads(result.stdout)["value"] == 83.0


def test_exit_codes_through_typer(tmp_path):
    assert runner.invoke(app, ["mesh-plan", "--n", "128", "--lambda", "0.3"]).exit_code == 1
    assert runner.invoke(app, ["mc", "--theta", "1"]).exit_code == 2


def test_mc_csv_is_byte_identical_across_workers(tmp_path):
    outputs = []
    for workers in ("1", "3"):
        target = tmp_path / f"mc{workers}.csv"
        argv = ["mc", "--theta", "1", "--n", "400", "--reps", "9", "--seed", "5"]
        assert main([*argv, "--workers", workers, "-o", str(target)]) == EXIT_OK
        outputs.append(target.read_bytes())
    assert outputs[0] == outputs[1]
