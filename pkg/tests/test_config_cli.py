import csv
import json
import math

import pytest

from dvhilbert.cli import main
from dvhilbert.config import CliConfig, dump_config, load_config_file, parse_config_text
from dvhilbert.errors import ConfigError
from dvhilbert.schemas import NormMethod, OutputFormat


def test_defaults():
    config = CliConfig()
    assert config.weights.specs == ["std:1"]
    assert config.sweep.p_list == [1.0, 2.0, math.inf]
    assert config.symbols.method == NormMethod.BLOCKS
    assert config.output.path is None


def test_dump_config_parses_back():
    config = parse_config_text(
        "[weights]\nspecs = std:0.5, std:1.5\n"
        "[sweep]\np_list = 0.5, inf\nn_list = 16, 32\nworkers = 2\n"
        "[output]\nformat = json\n"
    )
    assert config.weights.specs == ["std:0.5", "std:1.5"]
    assert config.sweep.p_list == [0.5, math.inf]
    assert config.output.format == OutputFormat.JSON
    assert parse_config_text(dump_config(config)) == config
    assert parse_config_text(dump_config(CliConfig())) == CliConfig()


@pytest.mark.parametrize(
    "text",
    [
        "[plots]\ncolor = red\n",
        "[weights]\nalpha = 1\n",
        "[sweep]\nn_list = 32, 16\n",
        "[sweep]\np_list = 0, 2\n",
        "[sweep]\np_list = two\n",
        "[tolerances]\nbracket = 0.5\n",
        "not an ini file",
    ],
)
def test_bad_config_is_rejected(text):
    with pytest.raises(ConfigError):
        parse_config_text(text)


def test_tolerances_reach_quadrature_and_sweeps():
    config = parse_config_text("[tolerances]\nabs_tol = 1e-9\nrel_tol = 1e-6\nmax_panels = 40\ntruncation = 0.01\n")
    spec = config.tolerances.integration_spec()
    assert (spec.abs_tol, spec.rel_tol, spec.max_panels) == (1e-9, 1e-6, 40)
    assert not spec.singular_at_0 and not spec.singular_at_1
    assert config.tolerances.truncation == 0.01
    assert parse_config_text(dump_config(config)) == config


def test_missing_config_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config_file(str(tmp_path / "missing.ini"))


def test_merged_overrides_skip_none():
    config = CliConfig().merged({"weights": {"specs": ["std:2"], "depth": None}})
    assert config.weights.specs == ["std:2"]
    assert config.weights.depth == 24


def test_cli_dump_config(capsys, tmp_path):
    path = tmp_path / "run.ini"
    path.write_text("[symbols]\nspecs = log\n", encoding="utf-8")
    assert main(["--config", str(path), "--dump-config"]) == 0
    out = capsys.readouterr().out
    assert parse_config_text(out).symbols.specs == ["log"]


def test_cli_symbol_bnorm_json(capsys):
    code = main(["symbol", "bnorm", "--symbol", "log", "--p", "inf", "--format", "json"])
    assert code == 0
    response = json.loads(capsys.readouterr().out)
    assert response["success"]
    (result,) = response["data"]
    assert result["symbol"] == "log"
    assert result["verdict"] == "finite"
    assert result["value"] == pytest.approx(1.0, rel=1e-12)


def test_cli_operator_matrix_csv(tmp_path):
    path = tmp_path / "matrix.csv"
    code = main([
        "operator", "matrix", "--weight", "std:1", "--symbol", "log", "--N", "2",
        "--format", "csv", "--output", str(path),
    ])
    assert code == 0
    with open(path, newline="", encoding="utf-8") as handle:
        rows = list(csv.DictReader(handle))
    assert [row["j"] for row in rows] == ["0", "1"]
    assert float(rows[0]["1"]) == pytest.approx(math.sqrt(3.0) / 2.0, rel=1e-13)
    assert float(rows[1]["1"]) == pytest.approx(1.0 / 3.0, rel=1e-13)


@pytest.mark.parametrize(
    "argv",
    [
        [],
        ["symbol", "bnorm", "--symbol", "exp:2"],
        ["symbol", "bnorm", "--p", "-1"],
        ["--config", "/nonexistent/dvhilbert.ini", "symbol", "blocks"],
        ["operator", "matrix", "--weight", "std:2.5", "--N", "8"],
    ],
)
def test_cli_usage_errors_exit_2(argv, capsys):
    assert main(argv) == 2
    assert capsys.readouterr().err
