"""End-to-end tests of the command line."""

import json
from unittest.mock import patch

import pytest
from click.testing import CliRunner

from cli.main import cli, run_cli
from tests.fixtures.samples import (
    COMPLEMENTARY_INSTANCE_TEXT,
    CONTRADICTORY_INSTANCE_TEXT,
    MALFORMED_INSTANCE_TEXT,
    SMALL_CNF_TEXT,
    SMALL_HYPERGRAPH_TEXT,
    TOY_INSTANCE_TEXT,
    TRANSVERSAL_GRAPH_TEXT,
)


@pytest.fixture
def workspace(temp_dir, monkeypatch, restore_logging):
    """Working directory holding the sample inputs, with no configuration file."""
    monkeypatch.chdir(temp_dir)
    samples = {
        "toy.txt": TOY_INSTANCE_TEXT,
        "complementary.txt": COMPLEMENTARY_INSTANCE_TEXT,
        "contradictory.txt": CONTRADICTORY_INSTANCE_TEXT,
        "malformed.txt": MALFORMED_INSTANCE_TEXT,
        "small.cnf": SMALL_CNF_TEXT,
        "small.hg": SMALL_HYPERGRAPH_TEXT,
        "classes.txt": TRANSVERSAL_GRAPH_TEXT,
    }
    for name, text in samples.items():
        (temp_dir / name).write_text(text, encoding="utf-8")
    return temp_dir


def invoke(capsys, *argv):
    """Run the command line and return its exit code and parsed stdout."""
    code = run_cli(list(argv))
    out = capsys.readouterr().out
    return code, json.loads(out) if out.strip() else None


class TestCheckCommand:
    """Test cases for the check subcommand."""

    def test_satisfied(self, workspace, capsys):
        """Test the toy instance under the default criterion."""
        code, payload = invoke(capsys, "check", "toy.txt")

        assert code == 0
        assert payload["status"] == "ok"
        assert payload["kind"] == "blend"
        assert payload["instance"] == {"path": "toy.txt", "n": 3, "m": 2}
        assert [event["mu"] for event in payload["events"]] == pytest.approx([0.5, 0.5])

    @pytest.mark.parametrize("criterion", ["llll", "orderable", "assignable", "pegden-variable"])
    def test_other_criteria(self, workspace, capsys, criterion):
        """Test that the weaker criteria also accept the toy instance."""
        code, payload = invoke(capsys, "check", "toy.txt", "--criterion", criterion)

        assert code == 0
        assert payload["satisfied"] is True

    def test_complementary(self, workspace, capsys):
        """Test that an unsatisfiable instance exits with 1."""
        code, payload = invoke(capsys, "check", "complementary.txt", "--max-iters", "500")

        assert code == 1
        assert payload["status"] == "unsatisfied"
        assert payload["satisfied"] is False
        assert "reason" in payload

    def test_symmetric(self, workspace, capsys):
        """Test that the symmetric criterion rejects the toy instance."""
        code, payload = invoke(capsys, "check", "toy.txt", "--criterion", "symmetric-lll")

        assert code == 1
        assert payload["satisfied"] is False

    def test_uniform_weight(self, workspace, capsys):
        """Test checking a given weight instead of searching."""
        code, payload = invoke(capsys, "check", "toy.txt", "--mu-uniform", "0.1")

        assert code == 1
        assert payload["satisfied"] is False

    def test_malformed(self, workspace, capsys):
        """Test that a syntax error exits with 2 and names the line."""
        code, payload = invoke(capsys, "check", "malformed.txt")

        assert code == 2
        assert payload["status"] == "error"
        assert payload["error"]["category"] == "input_format"
        assert payload["error"]["context"]["line"] == 4

    def test_contradictory(self, workspace, capsys):
        """Test that an event demanding two values of one variable is rejected."""
        code, payload = invoke(capsys, "check", "contradictory.txt")

        assert code == 2
        assert payload["error"]["category"] == "instance_validation"

    def test_missing_file(self, workspace, capsys):
        """Test that a missing input file exits with 2."""
        code, payload = invoke(capsys, "check", "absent.txt")

        assert code == 2
        assert payload["error"]["error_id"] == "invalid_option"

    def test_output_file(self, workspace, capsys):
        """Test writing the result to a file."""
        code, payload = invoke(capsys, "check", "toy.txt", "--output", "result.json")

        assert code == 0
        assert payload is None
        assert json.loads((workspace / "result.json").read_text())["satisfied"] is True


class TestSolveCommands:
    """Test cases for the application solvers."""

    def test_solve_sat(self, workspace, capsys):
        """Test solving the small 4-CNF."""
        code, payload = invoke(capsys, "solve-sat", "small.cnf", "--seed", "3")

        assert code == 0
        assert payload["satisfied"] is True
        assert payload["criterion_holds"] is True
        assert len(payload["model"]) == 8
        assert payload["config"]["k"] == 4

    def test_solve_hypergraph(self, workspace, capsys):
        """Test two-coloring the small hypergraph."""
        code, payload = invoke(capsys, "solve-hypergraph", "small.hg")

        assert code == 0
        assert len(payload["coloring"]) == 8
        assert payload["criterion_holds"] is True

    def test_solve_transversal(self, workspace, capsys):
        """Test an independent transversal of the sample graph."""
        code, payload = invoke(capsys, "solve-transversal", "classes.txt")

        assert code == 0
        assert len(payload["transversal"]) == 3
        assert payload["config"]["b"] == 4

    def test_solve_ramsey(self, workspace, capsys):
        """Test a triangle-free red coloring of K_10."""
        code, payload = invoke(capsys, "solve-ramsey", "--n", "10", "--s", "3", "--t", "4")

        assert code == 0
        assert payload["config"]["n"] == 10
        assert payload["blue_cliques"]["trials"] == 1
        assert "criterion_holds" in payload

    def test_sat_wrong_format(self, workspace, capsys):
        """Test that a non-DIMACS file exits with 2."""
        code, payload = invoke(capsys, "solve-sat", "toy.txt")

        assert code == 2
        assert payload["error"]["category"] == "input_format"


class TestSimulateParallel:
    """Test cases for simulate-parallel."""

    @pytest.mark.parametrize("mode", ["simplified", "full", "hybrid"])
    def test_modes(self, workspace, capsys, mode):
        """Test that every variant terminates on the toy instance."""
        code, payload = invoke(capsys, "simulate-parallel", "toy.txt", "--mode", mode)

        assert code == 0
        assert payload["mode"] == mode
        assert payload["terminated"] is True
        assert payload["psi"] == pytest.approx(0.5)

    def test_trace_and_workers(self, workspace, capsys):
        """Test the trace file and threaded proposals of a hybrid run."""
        code, payload = invoke(
            capsys,
            "simulate-parallel",
            "toy.txt",
            "--mode",
            "hybrid",
            "--workers",
            "2",
            "--trace",
            "trace.jsonl",
        )

        assert code == 0
        assert payload["heights"]["ok"] is True
        lines = (workspace / "trace.jsonl").read_text().splitlines()
        assert len(lines) == payload["sub_rounds"]
        assert all("longest_path" in json.loads(line) for line in lines)


class TestTablesAndBounds:
    """Test cases for table-hypergraph and bounds."""

    def test_table(self, workspace, capsys):
        """Test the first rows of the degree table."""
        code, payload = invoke(capsys, "table-hypergraph", "--kmin", "4", "--kmax", "6")

        assert code == 0
        assert [(row["k"], row["L"], row["L_prime"]) for row in payload["rows"]] == [
            (4, 2, 2),
            (5, 3, 3),
            (6, 5, 4),
        ]

    def test_ksat_bounds(self, workspace, capsys):
        """Test the k-SAT occurrence bounds for k = 6."""
        code, payload = invoke(capsys, "bounds", "--ksat", "--k", "6")

        assert code == 0
        assert payload["L_new"] == pytest.approx(8.240, abs=1e-3)
        assert payload["L_gst"] == pytest.approx(6.727, abs=1e-3)
        assert payload["L"] == 8

    def test_transversal_bounds(self, workspace, capsys):
        """Test a class size below the threshold."""
        code, payload = invoke(capsys, "bounds", "--transversal", "--delta", "2", "--b", "6")

        assert code == 0
        assert payload["threshold"] == 7
        assert payload["feasible"] is False
        assert payload["alpha"] is None
        assert payload["parallel_factor"] is None

    def test_ramsey_bounds(self, workspace, capsys):
        """Test the Ramsey edge probability."""
        code, payload = invoke(capsys, "bounds", "--ramsey", "--n", "20", "--s", "3")

        assert code == 0
        assert payload["p"] == pytest.approx(0.1291, abs=1e-4)

    def test_missing_problem(self, workspace, capsys):
        """Test that bounds needs a problem flag."""
        code, payload = invoke(capsys, "bounds", "--k", "6")

        assert code == 2
        assert payload["error"]["error_id"] == "invalid_option"

    def test_missing_parameter(self, workspace, capsys):
        """Test that a required parameter is named."""
        code, payload = invoke(capsys, "bounds", "--ksat")

        assert code == 2
        assert "k" in payload["error"]["description"]


class TestStatsCommand:
    """Test cases for the statistical suites."""

    def test_resampling(self, workspace, capsys):
        """Test mean resampling counts against the weights."""
        code, payload = invoke(capsys, "stats", "resampling", "toy.txt", "--runs", "100")

        assert code == 0
        assert payload["runs"] == 100
        assert all(event["ok"] for event in payload["events"])
        assert payload["W"] == pytest.approx(1.0)

    def test_witness(self, workspace, capsys):
        """Test witness tree frequencies against their weights."""
        code, payload = invoke(
            capsys, "stats", "witness", "toy.txt", "--runs", "100", "--limit", "3"
        )

        assert code == 0
        assert payload["failing"] == []
        assert len(payload["trees"]) <= 3

    def test_distribution(self, workspace, capsys):
        """Test an outside event against its distribution bound."""
        code, payload = invoke(
            capsys, "stats", "distribution", "toy.txt", "--target", "(0,1)", "--runs", "200"
        )

        assert code == 0
        assert payload["bound"] == pytest.approx(0.75)
        assert payload["target"] == [[0, 1]]

    def test_distribution_needs_target(self, workspace, capsys):
        """Test that the distribution suite needs a target."""
        code, _ = invoke(capsys, "stats", "distribution", "toy.txt")

        assert code == 2

    def test_target_outside_space(self, workspace, capsys):
        """Test a target value outside its domain."""
        code, payload = invoke(capsys, "stats", "distribution", "toy.txt", "--target", "(0,5)")

        assert code == 2
        assert "outside" in payload["error"]["description"]


class TestGlobalOptions:
    """Test cases for configuration, table output, profiling and usage errors."""

    def test_init_config(self, workspace, capsys):
        """Test writing the default configuration file."""
        code, payload = invoke(capsys, "init-config")

        assert code == 0
        assert (workspace / ".lopsided-mt.yaml").exists()
        assert payload["path"].endswith(".lopsided-mt.yaml")

    def test_init_config_current(self, workspace, capsys):
        """Test writing the loaded configuration with --current."""
        (workspace / "seeded.yaml").write_text("run:\n  seed: 77\n")
        (workspace / "out").mkdir()

        code, payload = invoke(
            capsys, "--config", "seeded.yaml", "init-config", "--current", "--directory", "out"
        )

        assert code == 0
        assert payload["path"].endswith(".lopsided-mt.yaml")
        code, payload = invoke(capsys, "solve-transversal", "classes.txt")
        assert code == 0
        assert payload["seed"] == 20160613
        code, payload = invoke(
            capsys, "--config", "out/.lopsided-mt.yaml", "solve-transversal", "classes.txt"
        )
        assert code == 0
        assert payload["seed"] == 77

    def test_config_file_used(self, workspace, capsys):
        """Test that a configuration file sets the seed."""
        (workspace / ".lopsided-mt.yaml").write_text("run:\n  seed: 77\n")

        code, payload = invoke(capsys, "solve-transversal", "classes.txt")

        assert code == 0
        assert payload["seed"] == 77

    def test_bad_config_path(self, workspace, capsys):
        """Test that a missing --config file exits with 2."""
        code, payload = invoke(capsys, "--config", "absent.yaml", "check", "toy.txt")

        assert code == 2
        assert payload["error"]["category"] == "configuration"

    def test_invalid_config(self, workspace, capsys):
        """Test that an invalid configuration exits with 2."""
        (workspace / "bad.yaml").write_text("run:\n  seed: -4\n")

        code, _ = invoke(capsys, "--config", "bad.yaml", "check", "toy.txt")

        assert code == 2

    def test_table_output(self, workspace, capsys):
        """Test rich tables instead of JSON."""
        code = run_cli(["--table", "check", "toy.txt"])

        out = capsys.readouterr().out
        assert code == 0
        assert "satisfied" in out
        assert not out.lstrip().startswith("{")

    def test_profile(self, workspace, capsys):
        """Test that profiling attaches phase timings."""
        code, payload = invoke(capsys, "--profile", "check", "toy.txt")

        assert code == 0
        assert [s["name"] for s in payload["timing"]["sections"]] == ["load", "criterion"]

    def test_usage_error(self, workspace, capsys):
        """Test that an unknown option exits with 2."""
        code = run_cli(["check", "toy.txt", "--criterion", "strongest"])

        assert code == 2
        assert capsys.readouterr().out == ""

    def test_unknown_command(self, workspace, capsys):
        """Test that an unknown subcommand exits with 2."""
        assert run_cli(["resolve"]) == 2


class TestClickEntryPoint:
    """Test cases for the click group run in standalone mode."""

    def test_exit_code(self, workspace):
        """Test that the group exits with the tool's code."""
        result = CliRunner().invoke(cli, ["check", "toy.txt", "--output", "result.json"])

        assert result.exit_code == 0
        assert json.loads((workspace / "result.json").read_text())["satisfied"] is True

    def test_unsatisfied_exit_code(self, workspace):
        """Test exit code 1 for an unsatisfied criterion."""
        result = CliRunner().invoke(
            cli, ["check", "toy.txt", "--mu-uniform", "0.1", "--output", "result.json"]
        )

        assert result.exit_code == 1

    def test_version(self):
        """Test the version flag."""
        result = CliRunner().invoke(cli, ["--version"])

        assert result.exit_code == 0
        assert "0.1.0" in result.output

    def test_unexpected_error(self, workspace, capsys):
        """Test that an unexpected tool failure is reported with exit code 2."""
        with patch("cli.main.check_tool", side_effect=RuntimeError("boom")):
            code, payload = invoke(capsys, "check", "toy.txt")

        assert code == 2
        assert payload["status"] == "error"
        assert payload["error"]["description"] == "boom"
