import asyncio

import pytest

import main
from cantilever.exceptions import ConfigError, ConvergenceError, UnknownScenarioError
from cantilever.scenarios.config import parse_config
from cantilever.suite import SuiteRunner, exit_code


@pytest.fixture(autouse=True)
def no_logging_config(monkeypatch):
    monkeypatch.setattr(main, "configure_logging", lambda: None)


def cli(*argv: str) -> int:
    return asyncio.run(main.main(list(argv)))


def test_presets_lists_presets_and_suites(capsys):
    assert cli("presets") == 0

    out = capsys.readouterr().out
    assert "fig7\n" in out
    assert "suite acceptance: table-eq6 fig5 fig7 fig11 continuum-loaded" in out


def test_unknown_preset_exits_2(capsys):
    assert cli("run", "fig99") == 2
    assert "no preset named 'fig99'" in capsys.readouterr().err


def test_invalid_scenario_file_exits_2(tmp_path, capsys):
    path = tmp_path / "broken.toml"
    path.write_text("[scenario]\nname = \n", encoding="utf-8")

    assert cli("run", str(path)) == 2
    assert "line 2" in capsys.readouterr().err


def test_print_effective_config(capsys):
    assert cli("run", "fig5", "--full", "--print-effective-config") == 0

    config = parse_config(capsys.readouterr().out).unwrap()
    assert config.lattice.points_outer_row == 511
    assert config.continuum.mass_ratio == 0.72


def test_full_without_full_size_exits_2(capsys):
    assert cli("run", "hold", "--full", "--print-effective-config") == 2
    assert "full_points_outer_row" in capsys.readouterr().err


def test_oracle_prints_table(tmp_path, capsys):
    assert cli("oracle", "--lf-hat", "0.05", "--mass-ratio", "0.72", "--modes", "3", "--out", str(tmp_path)) == 0

    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "n,omega_bar,Omega,Omega_self"
    assert len(lines) == 4
    assert lines[1].endswith(",1")
    assert (tmp_path / "oracle" / "eigenvalues.csv").is_file()


@pytest.mark.parametrize("lf_hat", ["0", "1.5", "-0.1"])
def test_oracle_rejects_attachment_length(lf_hat: str, tmp_path):
    assert cli("oracle", "--lf-hat", lf_hat, "--mass-ratio", "0.72", "--out", str(tmp_path)) == 2


def test_oracle_rejects_mode_count(tmp_path):
    assert cli("oracle", "--lf-hat", "0.05", "--mass-ratio", "0.72", "--modes", "9", "--basis-size", "4") == 2


def test_sweep_prints_rows(capsys):
    assert cli("sweep", "--mass-ratio", "0.72", "--lf-hat", "0.05", "0.1", "--modes", "3") == 0

    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "lf_hat,Omega_0,Omega_1,Omega_2"
    assert [line.split(",")[0] for line in lines[1:]] == ["0.05", "0.1"]


def test_unknown_suite_exits_2(capsys):
    assert cli("suite", "everything") == 2
    assert "no suite named" in capsys.readouterr().err


def test_exit_codes():
    assert exit_code(ConfigError("bad")) == 2
    assert exit_code(UnknownScenarioError("fig99")) == 2
    assert exit_code(ConvergenceError("stuck", 1.0)) == 3


def test_named_suite(tmp_path):
    runner = SuiteRunner.named("continuum", tmp_path, max_workers=2)

    assert runner.names == ["fig9", "continuum-loaded"]
    with pytest.raises(UnknownScenarioError):
        SuiteRunner.named("everything", tmp_path)


def test_suite_reports_each_scenario(tmp_path):
    outcomes = asyncio.run(SuiteRunner(["fig9", "fig99"], tmp_path, max_workers=2).run())

    assert [o.name for o in outcomes] == ["fig9", "fig99"]
    assert outcomes[0].succeeded and outcomes[0].exit_code == 0
    assert (tmp_path / "fig9" / "mode_shapes.csv").is_file()
    assert not outcomes[1].succeeded and outcomes[1].exit_code == 2
