import math
from dataclasses import replace

import numpy as np
import pytest
from numpy.testing import assert_allclose

from cantilever.dynamics.integrator import ImplicitMidpointIntegrator, MassPreconditioner, step
from cantilever.dynamics.system import CantileverSystem
from cantilever.dynamics.types import IntegratorConfig, IterationScheme, SimState
from cantilever.exceptions import ConvergenceError, IntegrationError
from cantilever.excitation import HOLD, BoundaryDriver, DriverKind
from cantilever.lattice.builder import build_lattice
from cantilever.lattice.types import Lattice, LatticeConfig, PointKind
from cantilever.rigid.sphere import RigidSphere


def _oscillator_state(x: float = 1.1) -> SimState:
    return SimState(0.0, np.array([[0.0, 0.0], [x, 0.0]]), np.zeros((2, 2)))


def _advance(integrator: ImplicitMidpointIntegrator, state: SimState, steps: int) -> SimState:
    for _ in range(steps):
        state, _ = integrator.step(state)
    return state


def _kicked(lattice: Lattice, rng: np.random.Generator, scale: float = 1e-2) -> SimState:
    velocities = np.zeros_like(lattice.rest_positions)
    free = lattice.kinds == PointKind.FREE
    velocities[free] = scale * rng.normal(size=(int(free.sum()), 2))
    return SimState(0.0, np.array(lattice.rest_positions), velocities)


def test_equilibrium_stays_at_rest(small_system: CantileverSystem):
    integrator = ImplicitMidpointIntegrator(small_system, IntegratorConfig(dt=0.1))
    state = small_system.initial_state()

    new_state, report = integrator.step(state)

    assert_allclose(new_state.positions, state.positions, atol=1e-14)
    assert_allclose(new_state.velocities, 0.0, atol=1e-14)
    assert report.iterations == 1
    assert new_state.time == pytest.approx(0.1)


@pytest.mark.parametrize("scheme", [IterationScheme.TANGENT, IterationScheme.PICARD])
def test_oscillator_returns_after_one_period(oscillator: Lattice, scheme: IterationScheme):
    steps = 200
    config = IntegratorConfig(dt=2 * math.pi / steps, scheme=scheme)
    integrator = ImplicitMidpointIntegrator(CantileverSystem(oscillator), config)

    state = _advance(integrator, _oscillator_state(), steps)

    assert_allclose(state.positions[1], [1.1, 0.0], atol=1e-4)
    assert_allclose(state.velocities[1], 0.0, atol=1e-4)
    energy = 0.5 * state.velocities[1, 0] ** 2 + 0.5 * (state.positions[1, 0] - 1.0) ** 2
    assert_allclose(energy, 0.5 * 0.1**2, rtol=1e-10)


def test_midpoint_is_second_order(oscillator: Lattice):
    errors = []
    for steps in (20, 40):
        integrator = ImplicitMidpointIntegrator(CantileverSystem(oscillator), IntegratorConfig(dt=2.0 / steps))
        state = _advance(integrator, _oscillator_state(), steps)
        errors.append(abs(state.positions[1, 0] - (1.0 + 0.1 * math.cos(2.0))))

    assert 3.5 < errors[0] / errors[1] < 4.5


def test_time_reversal(small_system: CantileverSystem, small_lattice: Lattice, rng: np.random.Generator):
    integrator = ImplicitMidpointIntegrator(small_system, IntegratorConfig(dt=0.05))
    start = _kicked(small_lattice, rng)

    there = _advance(integrator, start, 30)
    back = _advance(integrator, there.reversed(), 30).reversed()

    assert_allclose(back.positions, start.positions, atol=1e-9)
    assert_allclose(back.velocities, start.velocities, atol=1e-9)


def test_free_lattice_conserves_momenta(rng: np.random.Generator):
    lattice = build_lattice(LatticeConfig(length=40.0, width=1.0, points_outer_row=21, anchor_columns=0))
    integrator = ImplicitMidpointIntegrator(CantileverSystem(lattice), IntegratorConfig(dt=0.1))
    start = _kicked(lattice, rng, scale=0.05)

    def momenta(s: SimState) -> np.ndarray:
        p = lattice.masses[:, None] * s.velocities
        angular = np.sum(s.positions[:, 0] * p[:, 1] - s.positions[:, 1] * p[:, 0])
        return np.array([*p.sum(axis=0), angular])

    end = _advance(integrator, start, 40)

    assert_allclose(momenta(end)[:2], momenta(start)[:2], atol=1e-10)
    assert_allclose(momenta(end)[2], momenta(start)[2], atol=1e-8)


def test_energy_drift_stays_small(small_system: CantileverSystem, small_lattice: Lattice, rng: np.random.Generator):
    from cantilever.dynamics.energy import total_energy

    integrator = ImplicitMidpointIntegrator(small_system, IntegratorConfig(dt=0.1))
    state = _kicked(small_lattice, rng, scale=1e-3)
    initial = total_energy(small_lattice, None, state)

    worst = 0.0
    for _ in range(200):
        state, _ = integrator.step(state)
        worst = max(worst, abs(total_energy(small_lattice, None, state) - initial))

    assert worst / initial < 1e-4


def test_sphere_stays_rigid(sphere_lattice: Lattice, sphere: RigidSphere):
    period = CantileverSystem(sphere_lattice, sphere).linear_modes(1).period
    dt = period / 240
    driver = BoundaryDriver(DriverKind.X_PULSE, 0.37, 5 * dt)
    system = CantileverSystem(sphere_lattice, sphere, driver)
    integrator = ImplicitMidpointIntegrator(system, IntegratorConfig(dt=dt))

    state = _advance(integrator, system.initial_state(), 20)
    assert state.rigid is not None
    arms = state.positions[list(sphere.attachment_ids)] - state.rigid.center

    assert_allclose(np.linalg.norm(arms, axis=1), np.linalg.norm(sphere.attachment_offsets, axis=1), rtol=1e-10)
    assert_allclose(state.positions[system.anchored_ids, 0], sphere_lattice.rest_positions[system.anchored_ids, 0] + 0.37)


def test_functional_step_matches_integrator(small_system: CantileverSystem, small_lattice: Lattice, rng: np.random.Generator):
    config = IntegratorConfig(dt=0.1)
    start = _kicked(small_lattice, rng)

    expected, _ = ImplicitMidpointIntegrator(small_system, config).step(start)
    result = step(small_lattice, None, start, config, HOLD)

    assert_allclose(result.positions, expected.positions)
    assert_allclose(result.velocities, expected.velocities)


def test_picard_preconditioner_can_be_injected(small_system: CantileverSystem, small_lattice: Lattice, rng: np.random.Generator):
    start = _kicked(small_lattice, rng)
    tangent, _ = ImplicitMidpointIntegrator(small_system, IntegratorConfig(dt=0.05)).step(start)
    picard, report = ImplicitMidpointIntegrator(
        small_system, IntegratorConfig(dt=0.05), preconditioner=MassPreconditioner()
    ).step(start)

    assert_allclose(picard.positions, tangent.positions, atol=1e-10)
    assert report.iterations > 2


def test_unconverged_step_raises(small_system: CantileverSystem, small_lattice: Lattice, rng: np.random.Generator):
    config = IntegratorConfig(dt=1.0, max_iterations=2, scheme=IterationScheme.PICARD, max_halvings=0)
    integrator = ImplicitMidpointIntegrator(small_system, config)

    with pytest.raises(ConvergenceError):
        integrator.step(_kicked(small_lattice, rng))


def test_unconverged_step_is_halved(oscillator: Lattice):
    # Picard contracts by dt^2 / 4 on the unit oscillator: dt = 4 diverges, dt = 2 stalls, dt = 1 converges
    config = IntegratorConfig(dt=4.0, scheme=IterationScheme.PICARD, max_halvings=2)
    reference = ImplicitMidpointIntegrator(CantileverSystem(oscillator), replace(config, dt=1.0))

    state, report = ImplicitMidpointIntegrator(CantileverSystem(oscillator), config).step(_oscillator_state())
    expected = _advance(reference, _oscillator_state(), 4)

    assert report.substeps == 4
    assert state.time == 4.0
    assert_allclose(state.positions, expected.positions, atol=1e-12)
    assert_allclose(state.velocities, expected.velocities, atol=1e-12)


def test_halving_is_bounded(oscillator: Lattice):
    config = IntegratorConfig(dt=4.0, scheme=IterationScheme.PICARD, max_halvings=1)

    with pytest.raises(ConvergenceError):
        ImplicitMidpointIntegrator(CantileverSystem(oscillator), config).step(_oscillator_state())


def test_tangent_converges_on_a_large_pulse(small_lattice: Lattice):
    system = CantileverSystem(small_lattice)
    period = system.linear_modes(1).period
    dt = period / 60
    driver = BoundaryDriver(DriverKind.Z_PULSE, 0.5, 5 * period / 240)
    integrator = ImplicitMidpointIntegrator(CantileverSystem(small_lattice, None, driver), IntegratorConfig(dt=dt))

    state = _advance(integrator, system.initial_state(), 120)

    assert state.is_finite()
    assert state.time == pytest.approx(120 * dt)


def test_external_force_does_work(oscillator: Lattice):
    push = np.array([[0.0, 0.0], [0.1, 0.0]])
    integrator = ImplicitMidpointIntegrator(
        CantileverSystem(oscillator), IntegratorConfig(dt=0.1), external=lambda t, positions: push
    )

    state, report = integrator.step(_oscillator_state(1.0))

    assert state.positions[1, 0] > 1.0
    assert report.external_work > 0.0


@pytest.mark.parametrize(
    "kwargs",
    [
        {"dt": 0.0},
        {"dt": 0.1, "iteration_tol": 1e-3},
        {"dt": 0.1, "max_iterations": 1},
        {"dt": 0.1, "refresh_every": 0},
        {"dt": 0.1, "max_halvings": -1},
    ],
)
def test_invalid_integrator_config(kwargs):
    with pytest.raises(IntegrationError):
        IntegratorConfig(**kwargs)
