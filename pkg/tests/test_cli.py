"""
Tests for the command-line front end
"""

import json

import pytest

from tracebound.cli import build_parser, main


@pytest.fixture
def config_path(tmp_path, monkeypatch):
    for name in ("REPRO_PRECISION", "TRACEBOUND_GRID_N", "TRACEBOUND_SEED", "LOG_LEVEL"):
        monkeypatch.delenv(name, raising=False)
    path = tmp_path / "config.json"
    path.write_text(json.dumps({"grid_n": 65}))
    return str(path)


def run(config_path, *argv):
    return main(["--config", config_path, *argv])


class TestParser:
    """Argument surface"""

    def test_threshold_arguments(self):
        args = build_parser().parse_args(
            ["threshold", "--case", "b", "--form", "sum", "--dir", "geq", "--tol", "1e-6", "--bracket", "-2.5", "-2.4"]
        )
        assert args.tol == 1e-6
        assert args.bracket == ["-2.5", "-2.4"]

    def test_identities_default_eps(self):
        assert build_parser().parse_args(["identities"]).eps == ["0", "1"]

    def test_no_command(self, config_path):
        assert run(config_path) == 2

    @pytest.mark.parametrize("where", ["before", "after"])
    def test_run_options_either_side(self, where):
        options = ["--json", "--digits", "40", "--seed", "9", "--grid-n", "33"]
        argv = options + ["moments", "--case", "a"] if where == "before" else ["moments", "--case", "a"] + options
        args = build_parser().parse_args(argv)
        assert args.json is True
        assert (args.digits, args.seed, args.grid_n) == (40, 9, 33)

    def test_run_options_default_when_absent(self):
        args = build_parser().parse_args(["verify", "measure", "--atoms", "builtin:a1-opt"])
        assert args.json is False
        assert args.digits is None and args.grid_n is None

    def test_option_after_command_wins(self):
        args = build_parser().parse_args(["--digits", "40", "verify", "measure", "--atoms", "x", "--digits", "50"])
        assert args.digits == 50


class TestCommands:
    """Exit codes and output"""

    def test_moments(self, config_path, capsys):
        assert run(config_path, "moments", "--case", "a") == 0
        assert "Moment basis A5" in capsys.readouterr().out

    def test_moments_json(self, config_path, capsys):
        assert run(config_path, "--json", "moments", "--case", "b") == 0
        document = json.loads(capsys.readouterr().out)
        assert document["basis"] == "B32"
        assert len(document["features"]) == 32

    def test_json_after_command(self, config_path, capsys):
        assert run(config_path, "moments", "--case", "b", "--json") == 0
        assert json.loads(capsys.readouterr().out)["basis"] == "B32"

    def test_verify_measure_json_after_command(self, config_path, capsys):
        assert run(config_path, "verify", "measure", "--atoms", "builtin:a1-opt", "--json") == 0
        assert json.loads(capsys.readouterr().out)["verdict"] == "valid"

    def test_unknown_case(self, config_path, capsys):
        assert run(config_path, "moments", "--case", "c") == 2
        assert capsys.readouterr().err.startswith("error:")

    def test_identities(self, config_path, capsys):
        assert run(config_path, "identities", "--eps", "0", "1/100") == 0
        assert "all identities hold" in capsys.readouterr().out

    def test_identities_json(self, config_path, capsys):
        assert run(config_path, "--json", "identities") == 0
        document = json.loads(capsys.readouterr().out)
        assert document["passed"] is True
        assert len(document["checks"]) == 12

    def test_verify_builtin_measure(self, config_path, capsys):
        assert run(config_path, "verify", "measure", "--atoms", "builtin:a1-opt") == 0
        assert "verdict valid" in capsys.readouterr().out

    def test_verify_measure_wrong_region(self, config_path):
        assert run(config_path, "verify", "measure", "--atoms", "builtin:a1-opt", "--region", "sum>=0") == 1

    def test_verify_measure_file_needs_region(self, config_path, tmp_path):
        atoms = tmp_path / "atoms.json"
        atoms.write_text(json.dumps({"atoms": [{"x": "0", "y": "0"}]}))
        assert run(config_path, "verify", "measure", "--atoms", str(atoms), "--case", "a") == 2

    def test_verify_builtin_hyperplane(self, config_path, capsys):
        code = run(config_path, "verify", "hyperplane", "--poly", "builtin:a-sum", "--mirror")
        assert code == 0
        out = capsys.readouterr().out
        assert out.count("Separating polynomial") == 2

    def test_mirror_unavailable(self, config_path):
        assert run(config_path, "verify", "hyperplane", "--poly", "builtin:a-product-min", "--mirror") == 2

    def test_missing_polynomial_file(self, config_path, tmp_path):
        code = run(
            config_path, "verify", "hyperplane", "--poly", str(tmp_path / "absent.json"), "--region", "box", "--case", "a"
        )
        assert code == 2

    def test_missing_config(self, tmp_path):
        assert main(["--config", str(tmp_path / "absent.json"), "moments", "--case", "a"]) == 2

    def test_minimize(self, config_path, tmp_path, capsys):
        poly = tmp_path / "p.json"
        terms = [{"dx": 2, "dy": 0, "coeff": "1"}, {"dx": 1, "dy": 0, "coeff": "-1"}, {"dx": 0, "dy": 2, "coeff": "1"}]
        poly.write_text(json.dumps({"terms": terms}))
        assert run(config_path, "--json", "minimize", "--poly", str(poly), "--region", "box") == 0
        document = json.loads(capsys.readouterr().out)
        assert document["converged"] is True
        assert document["active_set"] == []

    def test_plot(self, config_path, tmp_path, capsys):
        out = tmp_path / "plots" / "a1.svg"
        assert run(config_path, "plot", "--atoms", "builtin:a1-opt", "-o", str(out)) == 0
        assert out.read_text().count("<circle") == 3
        assert capsys.readouterr().out.strip() == str(out)

    def test_plot_published_witness(self, config_path, tmp_path):
        out = tmp_path / "a2.svg"
        assert run(config_path, "plot", "--atoms", "builtin:appendix-a2", "-o", str(out)) == 0
        assert out.read_text().count("<circle") == 33

    @pytest.mark.slow
    def test_threshold(self, config_path, capsys):
        code = run(config_path, "--json", "threshold", "--case", "a", "--form", "sum", "--dir", "geq", "--tol", "0.01")
        assert code == 0
        document = json.loads(capsys.readouterr().out)
        assert document["status"] == "ok"
        assert document["witness_verdict"] == "valid"
        assert document["implied"].startswith("a1_min <=")

    @pytest.mark.slow
    def test_verify_rounded_sum_separator(self, config_path, capsys):
        assert run(config_path, "verify", "hyperplane", "--poly", "builtin:q", "--mirror") == 0
        assert capsys.readouterr().out.count("Separating polynomial") == 2

    @pytest.mark.slow
    def test_minimize_rounded_product_separator(self, config_path, capsys):
        assert run(config_path, "minimize", "--poly", "builtin:r", "--json") == 0
        document = json.loads(capsys.readouterr().out)
        assert document["converged"] is True
        assert float(document["value"]) == pytest.approx(-8.32369, abs=1e-4)

    def test_create_sample(self, tmp_path):
        path = tmp_path / "sample.json"
        assert main(["--config", str(path), "--create-sample"]) == 0
        assert json.loads(path.read_text())["grid_n"] == 257

    def test_bad_config_value(self, config_path):
        assert run(config_path, "--digits", "10", "moments", "--case", "a") == 2
