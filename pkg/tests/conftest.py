import numpy as np
import pytest

from cantilever.dynamics.system import CantileverSystem
from cantilever.lattice.builder import build_lattice
from cantilever.lattice.types import (
    InertiaModel,
    Lattice,
    LatticeConfig,
    LoadKind,
    LoadSpec,
    MaterialPoint,
    PointKind,
    Spring,
)
from cantilever.rigid.sphere import RigidSphere, init_sphere


@pytest.fixture
def small_config() -> LatticeConfig:
    return LatticeConfig(length=40.0, width=1.0, points_outer_row=21)


@pytest.fixture
def small_lattice(small_config: LatticeConfig) -> Lattice:
    return build_lattice(small_config)


@pytest.fixture
def sphere_load() -> LoadSpec:
    return LoadSpec(LoadKind.RIGID_SPHERE, mass_ratio=0.75, lf_hat=0.15, sphere_radius=20.0)


@pytest.fixture
def sphere_lattice(sphere_load: LoadSpec) -> Lattice:
    return build_lattice(LatticeConfig(length=100.0, width=1.0, points_outer_row=41, load=sphere_load))


@pytest.fixture
def sphere(sphere_lattice: Lattice, sphere_load: LoadSpec) -> RigidSphere:
    return init_sphere(sphere_lattice, sphere_load)


@pytest.fixture
def shell_load(sphere_load: LoadSpec) -> LoadSpec:
    return LoadSpec(
        LoadKind.RIGID_SPHERE,
        mass_ratio=sphere_load.mass_ratio,
        lf_hat=sphere_load.lf_hat,
        sphere_radius=sphere_load.sphere_radius,
        inertia_model=InertiaModel.SHELL,
    )


@pytest.fixture
def oscillator() -> Lattice:
    """One free unit mass on a unit spring to an anchored point, omega = 1."""
    points = (
        MaterialPoint(0, (0.0, 0.0), 1.0, PointKind.ANCHORED),
        MaterialPoint(1, (1.0, 0.0), 1.0, PointKind.FREE),
    )
    return Lattice(points=points, springs=(Spring(0, 1, 1.0, 1.0),))


@pytest.fixture
def small_system(small_lattice: Lattice) -> CantileverSystem:
    return CantileverSystem(small_lattice)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20230619)
