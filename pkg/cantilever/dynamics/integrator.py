from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass
from logging import Logger
from typing import NotRequired, TypedDict

import numpy as np
from scipy import sparse
from scipy.sparse import linalg as sparse_linalg
from typing_extensions import override

from cantilever.dynamics.system import CantileverSystem
from cantilever.dynamics.types import ExternalForceField, IntegratorConfig, IterationScheme, SimState
from cantilever.exceptions import ConvergenceError, NumericalInstabilityError
from cantilever.excitation import BoundaryDriver
from cantilever.lattice.types import Lattice
from cantilever.rigid.sphere import RigidSphere
from common.geometry import FloatArray

from . import logger as LOGGER_BASE

LOGGER = LOGGER_BASE.getChild("integrator")

STALL_RATIO = 0.5
"""Contraction ratio above which the tangent preconditioner is rebuilt at the current iterate."""

DIVERGENCE_METRIC = 1.0
"""Sweep correction, relative to the coordinates, at which a step is given up."""


@dataclass(frozen=True, slots=True)
class StepReport:
    """Bookkeeping of one completed step.

    Args:
        iterations: Fixed-point sweeps used.
        residual: Last sweep's max |delta| / (1 + |value|).
        refactored: Whether the preconditioner was rebuilt during the step.
        boundary_work: Work done by the driver on the lattice during the step.
        external_work: Work done by the external force field during the step.
        substeps: Steps the step was split into, 1 unless it was halved.
    """

    iterations: int
    residual: float
    refactored: bool
    boundary_work: float
    external_work: float
    substeps: int = 1

    def followed_by(self, other: StepReport) -> StepReport:
        """Report of this step and the next one taken as a single step."""
        return StepReport(
            self.iterations + other.iterations,
            max(self.residual, other.residual),
            self.refactored or other.refactored,
            self.boundary_work + other.boundary_work,
            self.external_work + other.external_work,
            self.substeps + other.substeps,
        )


class Preconditioner(ABC):
    """Approximate inverse of the step residual Jacobian."""

    __slots__ = ()

    @abstractmethod
    def factorize(self, system: CantileverSystem, y: FloatArray, anchors: FloatArray, dt: float) -> None:
        """Prepares the preconditioner for the midpoint y.

        Args:
            system: Mechanical system.
            y: Generalized coordinates at the step midpoint.
            anchors: Anchored positions at the step midpoint.
            dt: Time step.
        """
        ...

    @abstractmethod
    def solve(self, residual: FloatArray) -> FloatArray:
        """Applies the approximate inverse to a residual."""
        ...


class MassPreconditioner(Preconditioner):
    """P = M, the plain Picard sweep."""

    __slots__ = ("_mass",)

    def __init__(self) -> None:
        self._mass: FloatArray | None = None

    @override
    def factorize(self, system: CantileverSystem, y: FloatArray, anchors: FloatArray, dt: float) -> None:
        self._mass = system.mass_vector

    @override
    def solve(self, residual: FloatArray) -> FloatArray:
        assert self._mass is not None
        return residual / self._mass


class TangentPreconditioner(Preconditioner):
    """P = M + (dt^2 / 4) K with K the tangent stiffness at the midpoint, sparse LU factorized."""

    __slots__ = ("_lu",)

    def __init__(self) -> None:
        self._lu: sparse_linalg.SuperLU | None = None

    @override
    def factorize(self, system: CantileverSystem, y: FloatArray, anchors: FloatArray, dt: float) -> None:
        matrix = sparse.diags(system.mass_vector) + (0.25 * dt * dt) * system.generalized_stiffness(y, anchors)
        self._lu = sparse_linalg.splu(matrix.tocsc())

    @override
    def solve(self, residual: FloatArray) -> FloatArray:
        assert self._lu is not None
        return self._lu.solve(residual)


class IntegratorKwargs(TypedDict):
    """Key-word arguments dict for an Integrator."""

    external: NotRequired[ExternalForceField | None]
    preconditioner: NotRequired[Preconditioner | None]
    logger: NotRequired[Logger]


class Integrator(ABC):
    """Abstract time stepper of a CantileverSystem."""

    __slots__ = ("system", "config", "external", "_logger")

    def __init__(
        self,
        system: CantileverSystem,
        config: IntegratorConfig,
        *,
        external: ExternalForceField | None = None,
        logger: Logger = LOGGER,
    ) -> None:
        """
        Args:
            system: Mechanical system with its boundary driver.
            config: Step size and iteration settings.
            external: (optional) Keyword parameter. Extra force field added to the spring forces.
            logger: (optional) Keyword parameter. Defaults to sublogger of base package logger.
        """
        self.system = system
        self.config = config
        self.external = external
        self._logger = logger

    @abstractmethod
    def step(self, state: SimState) -> tuple[SimState, StepReport]:
        """Advances state by one time step.

        Args:
            state: Consistent state at t_n.

        Raises:
            ConvergenceError: raised if the iteration does not reach the tolerance.
            NumericalInstabilityError: raised on non-finite values.

        Returns:
            tuple[SimState, StepReport]: state at t_n + dt and step bookkeeping.
        """
        ...


class ImplicitMidpointIntegrator(Integrator):
    """Implicit midpoint rule on the generalized coordinates, solved by preconditioned fixed-point iteration.

    With constant diagonal mass M the step is
    y1 = y0 + dt (u0 + u1) / 2 and M (u1 - u0) = dt Q((y0 + y1) / 2, t_n + dt / 2).
    Eliminating u1 gives the residual R(y1) = M (y1 - y0 - dt u0) - (dt^2 / 2) Q(mid), which is
    iterated as y1 <- y1 - P^-1 R(y1).
    """

    __slots__ = ("_preconditioner", "_steps_since_factor")

    def __init__(
        self,
        system: CantileverSystem,
        config: IntegratorConfig,
        *,
        external: ExternalForceField | None = None,
        preconditioner: Preconditioner | None = None,
        logger: Logger = LOGGER,
    ) -> None:
        """
        Args:
            system: Mechanical system with its boundary driver.
            config: Step size and iteration settings.
            external: (optional) Keyword parameter. Extra force field added to the spring forces.
            preconditioner: (optional) Keyword parameter. Defaults to the one named by config.scheme.
            logger: (optional) Keyword parameter. Defaults to sublogger of base package logger.
        """
        super().__init__(system, config, external=external, logger=logger)
        if preconditioner is None:
            match config.scheme:
                case IterationScheme.PICARD:
                    preconditioner = MassPreconditioner()
                case IterationScheme.TANGENT:
                    preconditioner = TangentPreconditioner()
        self._preconditioner = preconditioner
        self._steps_since_factor: int | None = None

    @override
    def step(self, state: SimState) -> tuple[SimState, StepReport]:
        return self._advance(state, self.config.dt, self.config.max_halvings)

    def _advance(self, state: SimState, dt: float, halvings: int) -> tuple[SimState, StepReport]:
        """One step of dt, retried as two steps of dt / 2 while halvings remain."""
        try:
            return self._solve(state, dt)
        except ConvergenceError as err:
            if halvings == 0:
                raise
            self._logger.info(f"{err}; retrying as two steps of {0.5 * dt:.6g}")
        self._steps_since_factor = None
        half, first = self._advance(state, 0.5 * dt, halvings - 1)
        end, second = self._advance(half, 0.5 * dt, halvings - 1)
        self._steps_since_factor = None
        return end.with_time(state.time + dt), first.followed_by(second)

    def _solve(self, state: SimState, dt: float) -> tuple[SimState, StepReport]:
        system, cfg = self.system, self.config
        t0, t1 = state.time, state.time + dt
        t_mid = t0 + 0.5 * dt
        anchors0 = system.anchor_positions(t0)
        anchors1 = system.anchor_positions(t1)
        anchors_mid = 0.5 * (anchors0 + anchors1)
        mass = system.mass_vector

        y0, u0 = system.pack(state)
        drift = y0 + dt * u0
        y = drift.copy()

        def residual(y1: FloatArray) -> tuple[FloatArray, FloatArray, FloatArray]:
            mid = 0.5 * (y0 + y1)
            q, forces = system.generalized_forces(mid, anchors_mid)
            q_ext = self._external_forces(t_mid, mid, anchors_mid)
            if q_ext is not None:
                q = q + q_ext
            return mass * (y1 - drift) - 0.5 * dt * dt * q, forces, q_ext if q_ext is not None else np.zeros(0)

        refactored = False
        if self._steps_since_factor is None or self._steps_since_factor >= cfg.refresh_every:
            self._preconditioner.factorize(system, 0.5 * (y0 + y), anchors_mid, dt)
            self._steps_since_factor = 0
        self._steps_since_factor += 1

        metric = np.inf
        previous = np.inf
        for iteration in range(1, cfg.max_iterations + 1):
            r, forces, q_ext = residual(y)
            if not np.all(np.isfinite(r)):
                raise NumericalInstabilityError(f"non-finite residual at t={t0:.6g}")
            delta = self._preconditioner.solve(r)
            y = y - delta
            metric = float(np.max(np.abs(delta) / (1.0 + np.abs(y)), initial=0.0))
            if metric <= cfg.iteration_tol:
                break
            if metric > DIVERGENCE_METRIC:
                raise ConvergenceError(f"step at t={t0:.6g} diverged in sweep {iteration}", metric)
            stalled = metric > STALL_RATIO * previous
            previous = metric
            if stalled and cfg.scheme == IterationScheme.TANGENT:
                self._logger.debug(f"Contraction stalled at t={t0:.6g} (sweep {iteration}), refactoring")
                self._preconditioner.factorize(system, 0.5 * (y0 + y), anchors_mid, dt)
                refactored = True
                previous = np.inf
        else:
            raise ConvergenceError(f"step at t={t0:.6g} did not converge in {cfg.max_iterations} sweeps", metric)

        if not np.all(np.isfinite(y)):
            raise NumericalInstabilityError(f"non-finite state at t={t1:.6g}")
        u = 2.0 * (y - y0) / dt - u0

        # forces of the final sweep were evaluated before its correction; refresh them for the work sums
        _, forces, q_ext = residual(y)
        boundary_work = -float(np.sum(forces[system.anchored_ids] * (anchors1 - anchors0)))
        external_work = float(q_ext @ (y - y0)) if q_ext.size else 0.0

        new_state = system.unpack(t1, y, u)
        if new_state.rigid is not None:
            new_state.rigid.validate()
        return new_state, StepReport(iteration, metric, refactored, boundary_work, external_work)

    def _external_forces(self, t: float, y: FloatArray, anchors: FloatArray) -> FloatArray | None:
        if self.external is None:
            return None
        positions = self.system.positions(y, anchors)
        return self.system.generalized(np.asarray(self.external(t, positions), dtype=float), y)


def step(
    lattice: Lattice,
    sphere: RigidSphere | None,
    state: SimState,
    cfg: IntegratorConfig,
    boundary: BoundaryDriver,
    external: ExternalForceField | None = None,
) -> SimState:
    """Advances state by one implicit midpoint step.

    Builds a throwaway integrator; runs of many steps should keep an ImplicitMidpointIntegrator.

    Returns:
        SimState: state at state.time + cfg.dt.
    """
    system = CantileverSystem(lattice, sphere, boundary)
    new_state, _ = ImplicitMidpointIntegrator(system, cfg, external=external).step(state)
    return new_state
