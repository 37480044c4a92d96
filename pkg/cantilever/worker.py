from __future__ import annotations

import asyncio
import math
import os
from abc import ABC, abstractmethod
from dataclasses import replace
from pathlib import Path
from traceback import format_tb
from types import TracebackType
from typing import NotRequired, Self, TypedDict, Unpack

import numpy as np
from typing_extensions import override

from cantilever.cantilever_result import CantileverResult
from cantilever.continuum.galerkin import DensityProfile, solve_profile, sweep_lf_hat
from cantilever.continuum.stepped import stepped_frequencies
from cantilever.dynamics.runner import RunOutput, run
from cantilever.dynamics.system import CantileverSystem
from cantilever.exceptions import CantileverError, ConfigError, SpectralError
from cantilever.excitation import Z_PULSE_AMPLITUDE, BoundaryDriver, DriverKind
from cantilever.lattice.types import Lattice
from cantilever.rigid.sphere import RigidSphere, init_sphere
from cantilever.scenarios.artifacts import ContinuumResults, LatticeResults, ScenarioArtifacts
from cantilever.scenarios.config import DriverSettings, ModelKind, ScenarioConfig
from cantilever.scenarios.plots import emit_plots
from cantilever.spectral.probes import ProbeKind, ProbeSpec, Trace
from cantilever.spectral.spectrum import Spectrum
from cantilever.toolkit import DefaultToolkit, Toolkit
from common.config import EXACT_MATCH_LIMIT
from common.geometry import Component
from common.result import Err, Ok

from . import logger as LOGGER_BASE

LOGGER = LOGGER_BASE.getChild("worker")

TWIN_PROBE = ProbeSpec(ProbeKind.SINGLE_POINT, Component.Z)
"""End point of the middle row, the signal omega_0 is read from."""

TWIN_OMEGA_MAX = 3.0
"""Band searched for the twin fundamental, in units of the linear estimate."""


class WorkerKwargs(TypedDict):
    """Key-word arguments dict for a ScenarioWorker."""

    worker_id: int
    config: ScenarioConfig
    output_dir: Path
    toolkit: NotRequired[Toolkit | None]
    dump_lattice: NotRequired[bool]


class ScenarioWorker(ABC):
    """Abstract class for a worker which fully handles one scenario.
    Can be used in async context manager(async with statement).
    """

    def __init__(
        self,
        *,
        worker_id: int,
        config: ScenarioConfig,
        output_dir: Path,
        toolkit: Toolkit | None = None,
        dump_lattice: bool = False,
    ) -> None:
        """All parameters are keyword only.

        Args:
            worker_id: Worker's unique id. Is used for logging.
            config: Validated scenario.
            output_dir: Artifacts root; files go to output_dir / config.name.
            toolkit: (optional) Object with all needed factories defined. Defaults to None. If None, DefaultToolkit will be used.
            dump_lattice: (optional) Also write the point and spring listing.
        """
        toolkit = toolkit if toolkit is not None else DefaultToolkit()
        self.worker_id = worker_id
        self.config = config
        self.directory = output_dir / config.name
        self.dump_lattice = dump_lattice
        self.toolkit = toolkit
        self.logger = LOGGER.getChild(f"{self.worker_id}#")
        self.writer = toolkit.get_writer(logger=self.logger.getChild("writer"))

    @abstractmethod
    async def do(self) -> CantileverResult[ScenarioArtifacts]:
        """Runs the scenario and writes its artifacts."""
        ...

    async def close(self) -> None:
        self.logger.info(f"Ended worker {self.worker_id} ({self.config.name})")

    async def __aenter__(self) -> Self:
        return self

    async def __aexit__(
        self, exc_type: type[BaseException] | None, exc_val: BaseException | None, exc_tb: TracebackType | None
    ) -> None:
        await self.close()
        if exc_val is not None:
            self.logger.critical(f"Unexpected error happend: type={exc_type},  value={exc_val}")
            self.logger.critical(f"Traceback: {format_tb(exc_tb)}")

    def _check_output(self) -> CantileverResult[Path]:
        """Fails fast when the artifacts directory can not be written."""
        try:
            self.directory.mkdir(parents=True, exist_ok=True)
        except OSError as err:
            return Err(ConfigError(f"can not create output directory {self.directory}: {err}"))
        if not os.access(self.directory, os.W_OK):
            return Err(ConfigError(f"output directory {self.directory} is not writable"))
        return Ok(self.directory)

    def _continuum(self) -> ContinuumResults | None:
        settings = self.config.continuum
        if settings is None:
            return None
        solution = solve_profile(DensityProfile(settings.lf_hat, settings.mass_ratio), settings.basis_size)
        uniform = solve_profile(DensityProfile.uniform(), settings.basis_size)
        sweep = sweep_lf_hat(settings.sweep, settings.mass_ratio, settings.modes, settings.basis_size)
        modes = min(settings.modes, solution.eigenfrequencies.size)
        self.logger.info(
            f"Continuum Omega for lf_hat={settings.lf_hat}, ratio={settings.mass_ratio}: "
            + ", ".join(f"{r:.4g}" for r in solution.ratios[:modes])
        )
        exact = stepped_frequencies(solution.profile, modes)
        gap = float(np.max(np.abs(solution.eigenfrequencies[:modes] / exact - 1.0)))
        if gap > EXACT_MATCH_LIMIT:
            self.logger.warning(f"Galerkin frequencies deviate from the closed form by {gap:.2e}, raise basis_size")
        else:
            self.logger.debug(f"Galerkin frequencies match the closed form within {gap:.2e}")
        return ContinuumResults(
            solution, uniform, modes, settings.shape_points, sweep, exact=tuple(float(v) for v in exact)
        )

    def _finish(self, artifacts: ScenarioArtifacts) -> ScenarioArtifacts:
        self.writer.write(artifacts, self.dump_lattice)
        emit_plots(artifacts, logger=self.logger.getChild("plots"))
        self.writer.write_manifest(artifacts)
        return artifacts


class ContinuumScenarioWorker(ScenarioWorker):
    """Worker for continuum_only scenarios: Galerkin modes, the uniform reference and the sweep."""

    @override
    async def do(self) -> CantileverResult[ScenarioArtifacts]:
        self.logger.info(f"Started continuum worker {self.worker_id} for {self.config.name}")
        match self._check_output():
            case Err() as err:
                return err
            case Ok():
                pass
        if self.config.continuum is None:
            return Err(ConfigError(f"scenario {self.config.name} has no [continuum] section"))
        try:
            continuum = await asyncio.to_thread(self._continuum)
            artifacts = ScenarioArtifacts(self.config, self.directory, continuum=continuum)
            return Ok(await asyncio.to_thread(self._finish, artifacts))
        except CantileverError as err:
            self.logger.error(f"Scenario {self.config.name} failed: {err}")
            return Err(err)


class LatticeScenarioWorker(ScenarioWorker):
    """Worker for lattice scenarios.

    The unloaded twin (same lattice, no particle) fixes the time scale: its linear
    fundamental gives T0 for the step and run window, and its measured fundamental
    after a z-pulse gives omega_0 all spectra are normalized by.
    """

    def __init__(self, **kwargs: Unpack[WorkerKwargs]) -> None:
        super().__init__(**kwargs)
        self.builder = self.toolkit.get_builder(logger=self.logger.getChild("builder"))
        spectral = self.config.spectral
        self.analyzer = self.toolkit.get_analyzer(
            window=spectral.window,
            threshold_rel=spectral.threshold,
            leakage_cells=spectral.leakage_cells,
            leakage_level=spectral.leakage_level,
            logger=self.logger.getChild("analyzer"),
        )

    @override
    async def do(self) -> CantileverResult[ScenarioArtifacts]:
        self.logger.info(f"Started lattice worker {self.worker_id} for {self.config.name}")
        match self._check_output():
            case Err() as err:
                return err
            case Ok():
                pass
        try:
            return Ok(await asyncio.to_thread(self._simulate))
        except CantileverError as err:
            self.logger.error(f"Scenario {self.config.name} failed: {err}")
            return Err(err)

    def _simulate(self) -> ScenarioArtifacts:
        config = self.config
        assert config.lattice is not None
        lattice = self.builder.build(config.lattice)
        sphere = init_sphere(lattice, config.load) if config.model == ModelKind.LOADED_SPHERE else None
        twin = lattice if config.load is None else self.builder.build(replace(config.lattice, load=None))

        period = CantileverSystem(twin, logger=self.logger.getChild("twin")).linear_modes(1).period
        self.logger.info(f"Linear estimate of T0 = {period:.6g} (omega_0 = {2 * math.pi / period:.6g})")

        driver = self._driver(lattice, sphere, period)
        output = self._run(lattice, sphere, driver, period)
        omega_limit = config.spectral.omega_max * 2 * math.pi / period
        spectra = self._spectra(output.traces, omega_limit)

        if config.model == ModelKind.UNIFORM:
            omega0 = self._fundamental(self._reference_spectrum(spectra), period)
        else:
            omega0 = self._twin_fundamental(twin, period)
        self.logger.info(f"Measured omega_0 = {omega0:.6g}")
        for label, spec in spectra.items():
            ratios = ", ".join(f"{p.omega / omega0:.4g}" for p in spec.peaks)
            own = ", ".join(f"{p.omega / spec.peaks[0].omega:.4g}" for p in spec.peaks)
            self.logger.info(f"{label}: Omega = {ratios}; over its own fundamental {own}")

        results = LatticeResults(
            lattice, output, spectra, omega0, period, config.integrator.resolve(period).dt
        )
        artifacts = ScenarioArtifacts(config, self.directory, lattice=results, continuum=self._continuum())
        return self._finish(artifacts)

    def _driver(self, lattice: Lattice, sphere: RigidSphere | None, period: float) -> BoundaryDriver:
        settings = self.config.driver
        drive_omega = None
        if settings.kind == DriverKind.HARMONIC and settings.drive_frequency is None:
            drive_omega = CantileverSystem(lattice, sphere, logger=self.logger.getChild("loaded")).linear_modes(1).fundamental
            self.logger.info(f"Driving at the loaded linear fundamental {drive_omega:.6g}")
        driver = settings.resolve(period, drive_omega)
        driver.check_pulse(period)
        return driver

    def _run(
        self, lattice: Lattice, sphere: RigidSphere | None, driver: BoundaryDriver, period: float
    ) -> RunOutput:
        config = self.config
        system = CantileverSystem(lattice, sphere, driver, logger=self.logger.getChild("system"))
        integrator = self.toolkit.get_integrator(
            system, config.integrator.resolve(period), logger=self.logger.getChild("integrator")
        )
        return run(
            integrator,
            system.initial_state(),
            config.run.duration_periods * period,
            config.probes,
            config.run.stride,
            [s * period for s in config.run.snapshot_periods],
            logger=self.logger.getChild("runner"),
        )

    def _spectra(self, traces: list[Trace], omega_limit: float) -> dict[str, Spectrum]:
        spectra: dict[str, Spectrum] = {}
        for trace in traces:
            if trace.sample_times.size < 2:
                self.logger.warning(f"{trace.probe.label}: single sample, no spectrum")
                continue
            spectra[trace.probe.label] = self.analyzer.analyze(trace, omega_limit)
        return spectra

    def _reference_spectrum(self, spectra: dict[str, Spectrum]) -> Spectrum | None:
        for probe in self.config.probes:
            if probe.kind != ProbeKind.SPHERE_ANGLE and probe.label in spectra:
                return spectra[probe.label]
        return None

    def _twin_fundamental(self, twin: Lattice, period: float) -> float:
        """Runs the unloaded twin after a z-pulse and reads its lowest peak."""
        config = self.config
        amplitude = config.driver.amplitude if config.driver.kind == DriverKind.Z_PULSE else Z_PULSE_AMPLITUDE
        settings = DriverSettings(DriverKind.Z_PULSE, amplitude, config.driver.pulse_periods, config.driver.ramp)
        twin_logger = self.logger.getChild("twin")
        system = CantileverSystem(twin, driver=settings.resolve(period), logger=twin_logger)
        integrator = self.toolkit.get_integrator(system, config.integrator.resolve(period), logger=twin_logger)
        output = run(
            integrator,
            system.initial_state(),
            config.run.duration_periods * period,
            (TWIN_PROBE,),
            config.run.stride,
            logger=twin_logger,
        )
        if output.traces[0].sample_times.size < 2:
            return 2 * math.pi / period
        return self._fundamental(self.analyzer.analyze(output.traces[0], TWIN_OMEGA_MAX * 2 * math.pi / period), period)

    def _fundamental(self, spec: Spectrum | None, period: float) -> float:
        """Lowest peak, or the linear estimate when no spectrum exists."""
        if spec is None:
            self.logger.warning("No spectrum to read omega_0 from, using the linear estimate")
            return 2 * math.pi / period
        if not spec.peaks and self.config.driver.kind == DriverKind.HOLD:
            self.logger.info("Clamped end held, using the linear estimate of omega_0")
            return 2 * math.pi / period
        if not spec.peaks:
            raise SpectralError("no peak found for the fundamental")
        return min(p.omega for p in spec.peaks)


def worker_for(config: ScenarioConfig) -> type[ScenarioWorker]:
    """Worker class handling the model of config."""
    return LatticeScenarioWorker if config.model.is_lattice else ContinuumScenarioWorker


async def run_scenario(
    config: ScenarioConfig,
    output_dir: Path,
    *,
    worker_id: int = 0,
    toolkit: Toolkit | None = None,
    dump_lattice: bool = False,
) -> CantileverResult[ScenarioArtifacts]:
    """Runs one scenario in its worker.

    Returns:
        CantileverResult[ScenarioArtifacts]: written artifacts, or the error that stopped the run.
    """
    async with worker_for(config)(
        worker_id=worker_id, config=config, output_dir=output_dir, toolkit=toolkit, dump_lattice=dump_lattice
    ) as worker:
        result = await worker.do()
    match result:
        case Ok(artifacts):
            LOGGER.info(f"Scenario {config.name} wrote {len(artifacts.files)} files to {artifacts.directory}")
        case Err(error):
            LOGGER.error(f"Scenario {config.name} failed: {error}")
    return result
