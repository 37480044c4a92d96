"""Full-scale runs of the presets. Each takes minutes; run with `pytest -m slow`."""

import asyncio
from dataclasses import replace

import numpy as np
import pytest
from numpy.testing import assert_allclose

from cantilever.excitation import DriverKind
from cantilever.lattice.types import LoadKind
from cantilever.scenarios.artifacts import ScenarioArtifacts
from cantilever.scenarios.config import DriverSettings, ModelKind, OutputKind, load_scenario
from cantilever.spectral.probes import ProbeKind, ProbeSpec
from cantilever.worker import run_scenario

pytestmark = pytest.mark.slow

AVERAGE = "z_average_rightmost_three"


def run_preset(name: str, out, **changes) -> ScenarioArtifacts:
    config = replace(load_scenario(name).unwrap(), outputs=(OutputKind.SPECTRA,), **changes)
    return asyncio.run(run_scenario(config, out)).unwrap()


def omegas(artifacts: ScenarioArtifacts, label: str) -> np.ndarray:
    """Peaks of one spectrum over the unloaded fundamental."""
    res = artifacts.lattice
    return np.array([p.omega / res.omega0 for p in res.spectra[label].peaks])


def nearest(values: np.ndarray, target: float) -> float:
    return float(values[np.argmin(np.abs(values - target))])


@pytest.fixture(scope="module")
def uniform_run(tmp_path_factory):
    return run_preset("table-eq6", tmp_path_factory.mktemp("uniform"))


@pytest.fixture(scope="module")
def simplified_run(tmp_path_factory):
    return run_preset("fig5", tmp_path_factory.mktemp("simplified"))


@pytest.fixture(scope="module")
def solid_sphere_run(tmp_path_factory):
    return run_preset("fig7", tmp_path_factory.mktemp("solid"))


@pytest.fixture(scope="module")
def shell_sphere_run(tmp_path_factory):
    return run_preset("fig11", tmp_path_factory.mktemp("shell"))


def test_uniform_overtone_ratios(uniform_run):
    ratios = omegas(uniform_run, "z_single_point")

    assert_allclose(ratios[0], 1.0)
    for target in (6.26, 17.54, 34.38, 56.84, 84.9):
        assert_allclose(nearest(ratios, target), target, rtol=0.03)


def test_uniform_energy_drift(uniform_run):
    assert uniform_run.lattice.run.max_energy_drift() <= 60 * 1e-6


def test_simplified_lattice_matches_continuum(simplified_run):
    ratios = omegas(simplified_run, "z_single_point")
    solution = simplified_run.continuum.solution
    own = ratios / ratios[0]

    assert_allclose(ratios[0], solution.ratios[0], rtol=0.02)
    for target in solution.self_ratios[1:5]:
        assert_allclose(nearest(own, target), target, rtol=0.02)


def sphere_modes(artifacts: ScenarioArtifacts) -> tuple[float, float, float, float]:
    """Fundamental over omega_0, then rotational, first and second overtone over the fundamental."""
    average = omegas(artifacts, AVERAGE)
    own = average / average[0]
    beta = omegas(artifacts, "beta") / average[0]
    return float(average[0]), nearest(beta, 5.8), nearest(own, 19.5), nearest(own, 29.5)


def test_solid_sphere_spectrum(solid_sphere_run):
    _, rotational, first, second = sphere_modes(solid_sphere_run)

    assert_allclose(rotational, 5.8, rtol=0.15)
    assert_allclose(first, 19.5, rtol=0.15)
    assert_allclose(second, 29.5, rtol=0.10)
    assert 1.0 < rotational < first < second


def test_sphere_fundamental_above_simplified(solid_sphere_run, tmp_path):
    config = load_scenario("fig7").unwrap()
    load = replace(config.load, kind=LoadKind.DISTRIBUTED_MASS, sphere_radius=None)
    simplified = run_preset(
        "fig7",
        tmp_path,
        model=ModelKind.LOADED_SIMPLIFIED,
        lattice=replace(config.lattice, load=load),
        driver=DriverSettings(DriverKind.Z_PULSE, 2.9),
        probes=(ProbeSpec(ProbeKind.AVERAGE_RIGHTMOST_THREE),),
    )
    sphere_fundamental = sphere_modes(solid_sphere_run)[0]
    simplified_fundamental = omegas(simplified, AVERAGE)[0]

    assert 1.0 <= sphere_fundamental / simplified_fundamental <= 1.06


def test_shell_sphere_lowers_rotation_and_fundamental(solid_sphere_run, shell_sphere_run):
    solid_fundamental, solid_rotational, _, _ = sphere_modes(solid_sphere_run)
    shell = omegas(shell_sphere_run, AVERAGE)
    shell_rotational = nearest(omegas(shell_sphere_run, "beta") / shell[0], 4.9)

    assert shell_rotational < solid_rotational
    assert shell[0] < solid_fundamental


def test_shell_sphere_shift_magnitudes(solid_sphere_run, shell_sphere_run):
    solid_fundamental, solid_rotational, _, _ = sphere_modes(solid_sphere_run)
    shell = omegas(shell_sphere_run, AVERAGE)
    shell_rotational = nearest(omegas(shell_sphere_run, "beta") / shell[0], 4.9)

    assert 0.6 <= solid_rotational - shell_rotational <= 1.4
    assert 0.036 <= 1.0 - shell[0] / solid_fundamental <= 0.084
