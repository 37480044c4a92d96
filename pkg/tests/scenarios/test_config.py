import pytest

from cantilever.exceptions import ConfigError, ConfigKeyError, ConfigSyntaxError, UnknownScenarioError
from cantilever.excitation import DriverKind
from cantilever.lattice.types import InertiaModel, LoadKind
from cantilever.scenarios.config import (
    SUITES,
    ModelKind,
    OutputKind,
    effective_config,
    load_scenario,
    parse_config,
    preset_names,
    preset_text,
)
from cantilever.spectral.probes import ProbeKind
from cantilever.spectral.spectrum import Window
from common.geometry import Component
from common.result import Err, Ok

MINIMAL = """
[scenario]
name = "tiny"
model = "uniform"

[lattice]
length = 40.0
width = 1.0
points_outer_row = 21
"""


def error_of(text: str):
    match parse_config(text):
        case Err(error):
            return error
        case Ok(config):
            pytest.fail(f"expected an error, parsed {config}")


def test_every_preset_parses():
    names = preset_names()

    assert "fig7" in names and "continuum-loaded" in names
    for name in names:
        assert isinstance(load_scenario(name), Ok), name


def test_suites_name_existing_presets():
    names = set(preset_names())

    for members in SUITES.values():
        assert set(members) <= names


def test_minimal_file_takes_defaults():
    config = parse_config(MINIMAL).unwrap()

    assert config.model == ModelKind.UNIFORM
    assert config.load is None
    assert config.lattice.rows == 3
    assert config.lattice.anchor_columns == 1
    assert config.driver.kind == DriverKind.Z_PULSE
    assert config.integrator.steps_per_period == 240
    assert config.run.duration_periods == 60.0
    assert config.spectral.window == Window.HANN
    assert [p.kind for p in config.probes] == [ProbeKind.SINGLE_POINT]
    assert config.continuum is None
    assert config.wants(OutputKind.PLOTS)


def test_fig7_values():
    config = load_scenario("fig7").unwrap()

    assert config.model == ModelKind.LOADED_SPHERE
    assert config.load.kind == LoadKind.RIGID_SPHERE
    assert config.load.mass_ratio == 0.75
    assert config.load.lf_hat == 0.1441
    assert config.load.sphere_radius == 60.0
    assert config.load.inertia_model == InertiaModel.SOLID
    assert config.driver.kind == DriverKind.X_PULSE
    assert config.driver.amplitude == 0.37
    assert [p.kind for p in config.probes] == [ProbeKind.AVERAGE_RIGHTMOST_THREE, ProbeKind.SPHERE_ANGLE]


def test_fig5_continuum_defaults_to_the_load():
    config = load_scenario("fig5").unwrap()

    assert config.continuum.lf_hat == 0.05
    assert config.continuum.mass_ratio == 0.72
    assert config.continuum.modes == 5
    assert config.continuum.basis_size == 50


def test_full_resolution_restores_outer_rows():
    config = load_scenario("table-eq6").unwrap()

    assert config.lattice.points_outer_row == 201
    assert config.at_full_resolution().unwrap().lattice.points_outer_row == 607


def test_full_resolution_without_full_size_is_an_error():
    match load_scenario("hold").unwrap().at_full_resolution():
        case Err(error):
            assert isinstance(error, ConfigError)
            assert "hold" in str(error)
        case Ok():
            pytest.fail("hold has no full-resolution size")


def test_sphere_presets_are_already_full_size():
    config = load_scenario("fig7").unwrap()

    assert config.at_full_resolution().unwrap().lattice.points_outer_row == config.lattice.points_outer_row == 171


def test_full_resolution_of_continuum_scenario_is_unchanged():
    config = load_scenario("continuum-loaded").unwrap()

    assert config.at_full_resolution().unwrap() is config


@pytest.mark.parametrize("name", ["fig4", "fig5", "fig7", "fig8", "fig11", "continuum-loaded", "hold"])
def test_effective_config_parses_back(name: str):
    config = load_scenario(name).unwrap()

    text = effective_config(config)

    assert parse_config(text).unwrap() == config
    assert effective_config(parse_config(text).unwrap()) == text


def test_empty_file_names_required_keys():
    error = error_of("  \n")

    assert isinstance(error, ConfigKeyError)
    assert "scenario.name" in str(error) and "scenario.model" in str(error)


def test_missing_name():
    error = error_of('[scenario]\nmodel = "uniform"\n')

    assert error.key == "scenario.name"


def test_unknown_key_is_named():
    error = error_of(MINIMAL + "\n[run]\nduration = 3.0\n")

    assert isinstance(error, ConfigKeyError)
    assert error.key == "run.duration"
    assert "unknown key" in str(error)


def test_unknown_section_is_named():
    error = error_of(MINIMAL + "\n[solver]\ndt = 0.1\n")

    assert error.key == "solver"


def test_syntax_error_reports_line():
    error = error_of('[scenario]\nname = "x"\nmodel = \n')

    assert isinstance(error, ConfigSyntaxError)
    assert error.line == 3
    assert str(error).startswith("line 3")


def test_wrong_type():
    error = error_of(MINIMAL.replace("points_outer_row = 21", 'points_outer_row = "21"'))

    assert error.key == "lattice.points_outer_row"
    assert "expected int" in str(error)


def test_unknown_enum_value_lists_choices():
    error = error_of(MINIMAL + '\n[driver]\nkind = "wiggle"\n')

    assert error.key == "driver.kind"
    assert "x_pulse" in str(error)


@pytest.mark.parametrize(
    "extra, key",
    [
        ('\n[load]\nkind = "distributed_mass"\nmass_ratio = 0.5\nlf_hat = 0.1\n', "load"),
        ('\n[[probes]]\nkind = "sphere_angle"\n', "probes"),
        ("\n[spectral]\nthreshold = 1.5\n", "spectral.threshold"),
        ("\n[run]\nstride = 0\n", "run.stride"),
        ("\n[integrator]\nsteps_per_period = 1\n", "integrator.steps_per_period"),
        ('\n[[probes]]\nkind = "single_point"\ncomponent = "y"\n', "probes[0].component"),
        ('\n[outputs]\nkinds = ["movies"]\n', "outputs.kinds"),
    ],
)
def test_invalid_uniform_scenarios(extra: str, key: str):
    assert error_of(MINIMAL + extra).key == key


def test_model_needs_matching_load():
    text = MINIMAL.replace('"uniform"', '"loaded_sphere"')
    text += '\n[load]\nkind = "distributed_mass"\nmass_ratio = 0.5\nlf_hat = 0.1\n'

    assert error_of(text).key == "load.kind"


def test_lattice_model_needs_lattice():
    assert error_of('[scenario]\nname = "x"\nmodel = "uniform"\n').key == "lattice"


def test_continuum_only_needs_load_values():
    assert error_of('[scenario]\nname = "x"\nmodel = "continuum_only"\n').key == "continuum.lf_hat"


def test_probe_component_and_point():
    config = parse_config(MINIMAL + '\n[[probes]]\nkind = "single_point"\ncomponent = "x"\npoint_id = 4\n').unwrap()

    assert config.probes[0].component == Component.X
    assert config.probes[0].point_id == 4


def test_unknown_preset():
    with pytest.raises(UnknownScenarioError):
        preset_text("fig99")

    assert isinstance(load_scenario("fig99"), Err)


def test_scenario_file_on_disk(tmp_path):
    path = tmp_path / "tiny.toml"
    path.write_text(MINIMAL, encoding="utf-8")

    assert load_scenario(str(path)).unwrap().name == "tiny"
