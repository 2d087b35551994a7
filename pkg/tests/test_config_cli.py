import filecmp

import pytest

from ncdg.cli import EXIT_BLOWUP, EXIT_CONFIG, EXIT_OK, main
from ncdg.config import SCENARIOS, ConfigError, RunConfig
from ncdg.scenarios import OUTPUT_ENV, default_config, output_directory

QUICK = ["-o", "mesh.steps=5"]


@pytest.mark.parametrize("scenario", SCENARIOS)
def test_default_config_round_trips(scenario, tmp_path):
    cfg = default_config(scenario)
    path = tmp_path / "run.ini"
    cfg.save(path)
    back = RunConfig.load(path)
    assert back == cfg
    assert back.to_string() == cfg.to_string()


@pytest.mark.parametrize("override, attr, expected", [
    ("degree=1,2", "degrees", (1, 2)),
    ("run.courant=0.1", "courant", 0.1),
    ("coupling=p2p", "couplings", ("p2p",)),
    ("end_time=0.5", "end_time", 0.5),
])
def test_run_overrides(override, attr, expected):
    cfg = default_config("instability").with_overrides([override])
    assert getattr(cfg, attr) == expected


def test_nested_overrides():
    cfg = default_config("heterogeneous").with_overrides(
        ["material.right.c=2", "mesh.h_left=0.02", "options.initial=interpolate"])
    assert cfg.materials["right"].c == 2.0
    assert cfg.mesh["h_left"] == 0.02
    assert cfg.option("initial") == "interpolate"
    # the original is untouched
    assert default_config("heterogeneous").materials["right"].c == 3.0


@pytest.mark.parametrize("override", [
    "degree=0", "refinement=-1", "end_time=0", "courant=-1", "scheme=euler",
    "coupling=nearest", "scenario=unknown", "material.inner.c=0", "frobnicate=1",
    "boundary.*.kind=robin", "degree", "cadence=0",
])
def test_invalid_overrides_rejected(override):
    with pytest.raises(ConfigError):
        default_config("membrane-convergence").with_overrides([override])


@pytest.mark.parametrize("text", [
    "", "[run]\ndegree = 2\n", "[run]\nscenario = overlap\n[bogus]\nx = 1\n",
    "[run]\nscenario = overlap\ndegree = two\n", "not an ini file",
])
def test_malformed_files_rejected(text):
    with pytest.raises(ConfigError):
        RunConfig.from_string(text)


def test_missing_material_reported():
    cfg = default_config("membrane-convergence")
    with pytest.raises(ConfigError, match="inner"):
        cfg.copy(materials={"outer": cfg.materials["outer"]}).require_materials(["outer", "inner"])


def test_output_directory_precedence(tmp_path, monkeypatch):
    cfg = default_config("conforming-check").copy(output_dir=str(tmp_path / "cfg"))
    monkeypatch.delenv(OUTPUT_ENV, raising=False)
    assert output_directory(cfg) == tmp_path / "cfg"
    monkeypatch.setenv(OUTPUT_ENV, str(tmp_path / "env"))
    assert output_directory(cfg) == tmp_path / "env"
    assert output_directory(cfg, tmp_path / "arg") == tmp_path / "arg"


# command line --------------------------------------------------------------------

def test_cli_success_writes_outputs(tmp_path, capsys):
    assert main(["conforming-check", *QUICK, "--output", str(tmp_path)]) == EXIT_OK
    assert "max |mortar - conforming|" in capsys.readouterr().out
    assert (tmp_path / "conforming_check.csv").exists()
    assert RunConfig.load(tmp_path / "config.ini").mesh["steps"] == 5.0


def test_cli_solve_uses_config_file(tmp_path):
    cfg = default_config("conforming-check").with_overrides(["mesh.steps=3"])
    path = tmp_path / "run.ini"
    cfg.save(path)
    assert main(["solve", str(path), "--output", str(tmp_path / "out")]) == EXIT_OK
    rows = (tmp_path / "out" / "conforming_check.csv").read_text().splitlines()
    assert rows[1].startswith("3,3,")


def test_cli_configuration_errors(tmp_path, capsys):
    assert main(["conforming-check", "-o", "degree=0", "--output", str(tmp_path)]) == EXIT_CONFIG
    assert main(["solve", str(tmp_path / "missing.ini")]) == EXIT_CONFIG
    other = tmp_path / "overlap.ini"
    default_config("overlap").save(other)
    assert main(["conforming-check", "--config", str(other)]) == EXIT_CONFIG
    assert "configuration error" in capsys.readouterr().err


def test_cli_blow_up_exit_code(tmp_path, capsys):
    code = main(["conforming-check", "-o", "courant=20", "-o", "mesh.steps=300",
                 "--output", str(tmp_path)])
    assert code == EXIT_BLOWUP
    assert "non-finite" in capsys.readouterr().err


def test_cli_show_config(capsys):
    assert main(["show-config", "overlap"]) == EXIT_OK
    text = capsys.readouterr().out
    assert RunConfig.from_string(text) == default_config("overlap")


def test_cli_output_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv(OUTPUT_ENV, str(tmp_path / "env"))
    assert main(["conforming-check", *QUICK]) == EXIT_OK
    assert (tmp_path / "env" / "conforming_check.csv").exists()


def test_repeated_runs_are_byte_identical(tmp_path):
    for name in ("a", "b"):
        assert main(["conforming-check", *QUICK, "--output", str(tmp_path / name)]) == EXIT_OK
    cmp = filecmp.dircmp(tmp_path / "a", tmp_path / "b")
    assert cmp.left_list == cmp.right_list and not cmp.diff_files
    _, mismatch, errors = filecmp.cmpfiles(tmp_path / "a", tmp_path / "b", cmp.common_files,
                                           shallow=False)
    assert not mismatch and not errors
