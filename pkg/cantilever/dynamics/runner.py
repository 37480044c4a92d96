from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass, field
from logging import Logger

import numpy as np

from cantilever.dynamics.energy import EnergySample, energy_breakdown
from cantilever.dynamics.integrator import Integrator
from cantilever.dynamics.types import SimState
from cantilever.exceptions import IntegrationError
from cantilever.rigid.sphere import RigidState
from cantilever.spectral.probes import ProbeSpec, Trace
from common.geometry import FloatArray

from . import logger as LOGGER_BASE

LOGGER = LOGGER_BASE.getChild("runner")

PROGRESS_CHUNKS = 10
"""Progress is logged this many times per run."""


@dataclass(frozen=True, eq=False)
class Snapshot:
    """Full lattice configuration at one time."""

    time: float
    positions: FloatArray


@dataclass(frozen=True, eq=False)
class RunOutput:
    """Everything a run records.

    Args:
        traces: One trace per probe, in probe order.
        energy: Energy sample at every recorded time.
        rigid: Sphere pose at every recorded time (empty without sphere).
        snapshots: Configurations at the requested times.
        final_state: State after the last step.
        iterations: Fixed-point sweeps summed over all steps.
    """

    traces: list[Trace]
    energy: list[EnergySample]
    rigid: list[tuple[float, RigidState]] = field(default_factory=list)
    snapshots: list[Snapshot] = field(default_factory=list)
    final_state: SimState | None = None
    iterations: int = 0

    def max_energy_drift(self) -> float:
        """Largest |conserved(t) - conserved(0)| over the run, relative to the largest total energy."""
        conserved = np.array([e.conserved for e in self.energy])
        scale = max((e.total for e in self.energy), default=0.0)
        if conserved.size == 0 or scale == 0.0:
            return 0.0
        return float(np.max(np.abs(conserved - conserved[0])) / scale)


def run(
    integrator: Integrator,
    state: SimState,
    duration: float,
    probes: Sequence[ProbeSpec],
    stride: int = 1,
    snapshot_times: Sequence[float] = (),
    *,
    logger: Logger = LOGGER,
) -> RunOutput:
    """Steps the system for duration, sampling the probes every stride steps.

    The initial state is always sampled; a zero duration gives single-sample traces.
    A snapshot is taken at the first step reaching each requested time.

    Args:
        integrator: Stepper holding the system, its driver and the time step.
        state: Initial state.
        duration: t_calc in model time.
        probes: Signals to record.
        stride: Steps between samples.
        snapshot_times: Times of full-configuration snapshots.
        logger: (optional) Keyword parameter. Defaults to sublogger of base package logger.

    Raises:
        IntegrationError: raised for a negative duration or stride below 1, or from a failed step.

    Returns:
        RunOutput: traces, energy log, sphere log and snapshots.
    """
    if duration < 0.0 or stride < 1:
        raise IntegrationError(f"invalid run window: duration={duration}, stride={stride}")
    system = integrator.system
    lattice, sphere = system.lattice, system.sphere
    dt = integrator.config.dt
    n_steps = int(round(duration / dt))
    resolved = [p.resolve(lattice) for p in probes]

    times: list[float] = []
    values: list[list[float]] = [[] for _ in resolved]
    energy: list[EnergySample] = []
    rigid: list[tuple[float, RigidState]] = []
    pending = sorted(snapshot_times)
    snapshots: list[Snapshot] = []
    boundary_work = external_work = 0.0
    iterations = 0

    def record(s: SimState) -> None:
        times.append(s.time)
        for column, probe in zip(values, resolved):
            column.append(probe.sample(s))
        energy.append(energy_breakdown(lattice, sphere, s, boundary_work, external_work))
        if s.rigid is not None:
            rigid.append((s.time, s.rigid))

    def snap(s: SimState) -> None:
        while pending and pending[0] <= s.time + 0.5 * dt:
            pending.pop(0)
            snapshots.append(Snapshot(s.time, s.positions.copy()))

    logger.info(f"Running {n_steps} steps of dt={dt:.6g} with {len(probes)} probes")
    record(state)
    snap(state)
    report_every = max(1, n_steps // PROGRESS_CHUNKS)
    for n in range(1, n_steps + 1):
        state, report = integrator.step(state)
        boundary_work += report.boundary_work
        external_work += report.external_work
        iterations += report.iterations
        if n % stride == 0:
            record(state)
        snap(state)
        if n % report_every == 0:
            logger.debug(f"Step {n}/{n_steps}, t={state.time:.6g}, sweeps so far {iterations}")

    sample_times = np.asarray(times)
    traces = [Trace(sample_times, np.asarray(column), probe.spec) for column, probe in zip(values, resolved)]
    output = RunOutput(traces, energy, rigid, snapshots, state, iterations)
    logger.info(f"Run finished at t={state.time:.6g}, relative energy drift {output.max_energy_drift():.3e}")
    return output
