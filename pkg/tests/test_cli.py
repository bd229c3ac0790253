import json
import logging

import pandas as pd
import pytest

from src import __version__
from src.cli.commands import EXIT_CONFIG, EXIT_NEGATIVE, EXIT_NUMERIC, EXIT_OK, build_parser, exit_code_for, run_cli
from src.cli.output import render_csv
from src.errors import BracketError, ConfigError, KellerOssermanError, RadicandError


@pytest.fixture(autouse=True)
def restore_root_logger():
    root = logging.getLogger()
    handlers, level = root.handlers[:], root.level
    yield
    root.handlers[:] = handlers
    root.setLevel(level)


def write_config(tmp_path, config):
    path = tmp_path / "config.json"
    path.write_text(json.dumps(config))
    return str(path)


def test_expand_prints_coefficients(tmp_path, capsys):
    code = run_cli(["expand", "--p", "3", "--N", "3", "--out", str(tmp_path)])
    assert code == EXIT_OK
    lines = {line.split()[0]: line for line in capsys.readouterr().out.splitlines() if line.startswith("k=")}
    a0 = float(lines["k=0"].split("a_k=")[1])
    a1 = float(lines["k=1"].split("a_k=")[1])
    assert a0 == pytest.approx(2.0**0.5, rel=1e-12)
    assert a1 == pytest.approx(2.0 / (3.0 * 2.0**0.5), rel=1e-10)


def test_expand_writes_csv_with_header(tmp_path, capsys):
    run_cli(["expand", "--p", "2", "--out", str(tmp_path)])
    filename = tmp_path / "expand_job0_expand.csv"
    assert f"Results saved to {filename}" in capsys.readouterr().out
    text = filename.read_text()
    assert text.startswith(f"# blowup-rates {__version__}\n# config: ")
    frame = pd.read_csv(filename, comment="#")
    assert list(frame["a_k"][:2]) == pytest.approx([6.0, 2.4], rel=1e-10)


def test_csv_output_is_deterministic(tmp_path):
    filename = tmp_path / "expand_job0_expand.csv"
    run_cli(["expand", "--p", "2.5", "--out", str(tmp_path)])
    first = filename.read_bytes()
    run_cli(["expand", "--p", "2.5", "--out", str(tmp_path)])
    assert filename.read_bytes() == first


def test_jobs_are_named_and_merged(tmp_path):
    config = write_config(tmp_path, {
        "run": {"output": str(tmp_path / "out")},
        "jobs": [{"name": "square", "nonlinearity": {"p": 2.0}}, {"nonlinearity": {"p": 5.0}}],
    })
    assert run_cli(["expand", "--config", config, "--jobs", "2"]) == EXIT_OK
    square = pd.read_csv(tmp_path / "out" / "expand_square_expand.csv", comment="#")
    second = pd.read_csv(tmp_path / "out" / "expand_job1_expand.csv", comment="#")
    assert square["p"].iloc[0] == 2.0
    assert second["p"].iloc[0] == 5.0


def test_ko_holds_for_cubic(tmp_path, capsys):
    assert run_cli(["ko", "--p", "3", "--out", str(tmp_path)]) == EXIT_OK
    assert "verdict=holds" in capsys.readouterr().out
    assert (tmp_path / "ko_job0_ko.csv").exists()


def test_ko_fails_for_linear_growth(tmp_path):
    config = write_config(tmp_path, {
        "nonlinearity": {
            "family": "custom", "expr": "u", "a": 1.0,
            "tail": {"kind": "PowerLaw", "amplitude": 0.5, "exponent_or_rate": 2.0, "cutoff": 100.0},
        },
        "run": {"output": str(tmp_path)},
    })
    assert run_cli(["ko", "--config", config]) == EXIT_NEGATIVE
    frame = pd.read_csv(tmp_path / "ko_job0_ko.csv", comment="#")
    assert frame["verdict"].iloc[0] == "fails"


@pytest.mark.parametrize("p, code", [(3.0, EXIT_NEGATIVE), (5.0, EXIT_OK)])
def test_universal_exit_codes(tmp_path, p, code):
    config = write_config(tmp_path, {"universality": {"max_doublings": 40}, "run": {"output": str(tmp_path)}})
    assert run_cli(["universal", "--config", config, "--p", str(p)]) == code
    samples = pd.read_csv(tmp_path / "universal_job0_universal.csv", comment="#")
    assert list(samples.columns) == ["u", "phi"]


def test_worst_job_sets_the_exit_code(tmp_path):
    config = write_config(tmp_path, {
        "universality": {"max_doublings": 40},
        "run": {"output": str(tmp_path)},
        "jobs": [{"nonlinearity": {"p": 5.0}}, {"nonlinearity": {"p": 3.0}}],
    })
    assert run_cli(["universal", "--config", config]) == EXIT_NEGATIVE


def test_missing_config_file(tmp_path):
    assert run_cli(["ko", "--config", str(tmp_path / "absent.json")]) == EXIT_CONFIG


def test_invalid_json(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{not json")
    assert run_cli(["ko", "--config", str(path)]) == EXIT_CONFIG


@pytest.mark.parametrize("argv", [
    ["expand", "--family", "exponential"],
    ["expand", "--N", "0"],
    ["ko", "--r", "0.5", "1.5"],
    ["ko", "--jobs", "0"],
    ["ko", "--family", "custom"],
])
def test_configuration_errors(tmp_path, argv):
    assert run_cli(argv + ["--out", str(tmp_path)]) == EXIT_CONFIG


def test_help_exits_cleanly(capsys):
    with pytest.raises(SystemExit) as info:
        build_parser().parse_args(["--help"])
    assert info.value.code == 0
    assert "expand" in capsys.readouterr().out


def test_unknown_command_is_rejected():
    with pytest.raises(SystemExit) as info:
        build_parser().parse_args(["integrate"])
    assert info.value.code == 2


@pytest.mark.parametrize("error, code", [
    (KellerOssermanError("fails"), EXIT_NEGATIVE),
    (ConfigError("bad"), EXIT_CONFIG),
    (ValueError("bad"), EXIT_CONFIG),
    (KeyError("p"), EXIT_CONFIG),
    (BracketError("no sign change"), EXIT_NUMERIC),
    (RadicandError("negative"), EXIT_NUMERIC),
    (RuntimeError("solver"), EXIT_NUMERIC),
])
def test_exit_code_for(error, code):
    assert exit_code_for(error) == code


def test_render_csv_is_stable():
    frame = pd.DataFrame({"u": [1.0, 0.1], "phi": [1.0 / 3.0, 2.0]})
    config = {"b": 1, "a": {"y": 2, "x": 1}}
    text = render_csv(frame, config)
    lines = text.splitlines()
    assert lines[1] == '# config: {"a": {"x": 1, "y": 2}, "b": 1}'
    assert lines[2] == "u,phi"
    assert lines[3] == "1,0.33333333333333331"
    assert render_csv(frame, dict(reversed(list(config.items())))) == text
