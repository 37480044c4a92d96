"""Scenario files: TOML with fixed sections, every key checked.

Times are given in unloaded fundamental periods T0 and frequencies in units of
omega_0 = 2 pi / T0; the worker converts them once T0 of the lattice is known.
"""

from __future__ import annotations

import math
import re
import tomllib
from dataclasses import dataclass, field, replace
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import Any

from cantilever.cantilever_result import CantileverResult
from cantilever.dynamics.types import IntegratorConfig, IterationScheme
from cantilever.exceptions import (
    CantileverError,
    ConfigError,
    ConfigKeyError,
    ConfigSyntaxError,
    UnknownScenarioError,
)
from cantilever.excitation import BURST_CYCLES, BoundaryDriver, DriverKind, Ramp
from cantilever.lattice.types import InertiaModel, LatticeConfig, LoadKind, LoadSpec
from cantilever.spectral.probes import ProbeKind, ProbeSpec
from cantilever.spectral.spectrum import Window
from common.config import (
    CONTINUUM_BASIS_SIZE,
    DEFAULT_DURATION_PERIODS,
    DEFAULT_ITERATION_TOL,
    DEFAULT_MAX_HALVINGS,
    DEFAULT_MAX_ITERATIONS,
    DEFAULT_PEAK_THRESHOLD,
    DEFAULT_PULSE_PERIODS,
    DEFAULT_STEPS_PER_PERIOD,
    LEAKAGE_CELLS,
    LEAKAGE_LEVEL,
    PRESETS_PACKAGE,
)
from common.geometry import Component
from common.result import Err, Ok

REQUIRED_KEYS = ("scenario.name", "scenario.model")
"""Keys without a default."""

SUITES: dict[str, tuple[str, ...]] = {
    "figures": ("fig4", "table-eq6", "fig5", "fig7", "fig8", "fig9", "fig10", "fig11", "fig12"),
    "acceptance": ("table-eq6", "fig5", "fig7", "fig11", "continuum-loaded"),
    "continuum": ("fig9", "continuum-loaded"),
}
"""Named groups of presets run by the suite command."""

_LINE = re.compile(r"line (\d+)")


class ModelKind(Enum):
    """Enum of simulated systems."""

    UNIFORM = "uniform"
    LOADED_SIMPLIFIED = "loaded_simplified"
    LOADED_SPHERE = "loaded_sphere"
    CONTINUUM_ONLY = "continuum_only"

    @property
    def is_lattice(self) -> bool:
        return self != ModelKind.CONTINUUM_ONLY


class OutputKind(Enum):
    """Enum of artifact groups a run may write."""

    TRACES = "traces"
    ENERGY = "energy"
    SPECTRA = "spectra"
    SNAPSHOTS = "snapshots"
    MODES = "modes"
    PLOTS = "plots"


@dataclass(frozen=True, slots=True)
class DriverSettings:
    """Boundary driver with times in T0 and frequencies in omega_0."""

    kind: DriverKind = DriverKind.Z_PULSE
    amplitude: float = 0.0
    pulse_periods: float = DEFAULT_PULSE_PERIODS
    ramp: Ramp = Ramp.SMOOTH_STEP
    drive_frequency: float | None = None
    burst_cycles: float | None = BURST_CYCLES

    def resolve(self, period: float, drive_omega: float | None = None) -> BoundaryDriver:
        """Driver in model time.

        Args:
            period: T0 in model time.
            drive_omega: omega_ex used when drive_frequency is not set, in model units.
        """
        omega0 = 2 * math.pi / period
        match self.kind:
            case DriverKind.HARMONIC:
                omega = self.drive_frequency * omega0 if self.drive_frequency is not None else drive_omega or omega0
                burst = None if self.burst_cycles is None else self.burst_cycles * 2 * math.pi / omega
                return BoundaryDriver(self.kind, self.amplitude, drive_frequency=omega, burst_duration=burst)
            case DriverKind.HOLD:
                return BoundaryDriver(self.kind)
            case _:
                return BoundaryDriver(self.kind, self.amplitude, self.pulse_periods * period, ramp=self.ramp)


@dataclass(frozen=True, slots=True)
class IntegratorSettings:
    """Integrator with the step given as steps per T0."""

    steps_per_period: int = DEFAULT_STEPS_PER_PERIOD
    iteration_tol: float = DEFAULT_ITERATION_TOL
    max_iterations: int = DEFAULT_MAX_ITERATIONS
    scheme: IterationScheme = IterationScheme.TANGENT
    refresh_every: int = 1
    max_halvings: int = DEFAULT_MAX_HALVINGS

    def resolve(self, period: float) -> IntegratorConfig:
        return IntegratorConfig(
            period / self.steps_per_period,
            self.iteration_tol,
            self.max_iterations,
            self.scheme,
            self.refresh_every,
            self.max_halvings,
        )


@dataclass(frozen=True, slots=True)
class RunSettings:
    """Run window in T0."""

    duration_periods: float = DEFAULT_DURATION_PERIODS
    stride: int = 1
    snapshot_periods: tuple[float, ...] = ()


@dataclass(frozen=True, slots=True)
class SpectralSettings:
    """Spectral analysis, omega_max in omega_0."""

    window: Window = Window.HANN
    threshold: float = DEFAULT_PEAK_THRESHOLD
    omega_max: float = 110.0
    leakage_cells: float = LEAKAGE_CELLS
    leakage_level: float = LEAKAGE_LEVEL


@dataclass(frozen=True, slots=True)
class ContinuumSettings:
    """Galerkin oracle inputs."""

    lf_hat: float
    mass_ratio: float
    basis_size: int = CONTINUUM_BASIS_SIZE
    modes: int = 6
    shape_points: int = 201
    sweep: tuple[float, ...] = ()


@dataclass(frozen=True, slots=True)
class ScenarioConfig:
    """Validated scenario.

    Args:
        name: Scenario id, also the artifacts subdirectory.
        model: Simulated system.
        description: Free text.
        lattice: Lattice with its load; None for continuum-only runs.
        driver: Excitation of the clamped end.
        integrator: Time stepping.
        run: Run window and snapshots.
        spectral: Spectral analysis.
        probes: Recorded signals.
        continuum: Oracle inputs, for continuum runs or as a cross-check of lattice runs.
        outputs: Artifact groups to write.
        full_points_outer_row: Outer-row size restored by --full.
    """

    name: str
    model: ModelKind
    description: str = ""
    lattice: LatticeConfig | None = None
    driver: DriverSettings = field(default_factory=DriverSettings)
    integrator: IntegratorSettings = field(default_factory=IntegratorSettings)
    run: RunSettings = field(default_factory=RunSettings)
    spectral: SpectralSettings = field(default_factory=SpectralSettings)
    probes: tuple[ProbeSpec, ...] = (ProbeSpec(ProbeKind.SINGLE_POINT),)
    continuum: ContinuumSettings | None = None
    outputs: tuple[OutputKind, ...] = tuple(OutputKind)
    full_points_outer_row: int | None = None

    @property
    def load(self) -> LoadSpec | None:
        return self.lattice.load if self.lattice is not None else None

    def wants(self, kind: OutputKind) -> bool:
        return kind in self.outputs

    def at_full_resolution(self) -> CantileverResult[ScenarioConfig]:
        """Same scenario with the outer rows restored to full_points_outer_row.

        A scenario without a lattice is returned unchanged.

        Returns:
            CantileverResult[ScenarioConfig]: Err(ConfigError) for a lattice scenario without
                full_points_outer_row.
        """
        if self.lattice is None:
            return Ok(self)
        if self.full_points_outer_row is None:
            return Err(ConfigError(f"scenario {self.name} has no lattice.full_points_outer_row for --full"))
        return Ok(replace(self, lattice=replace(self.lattice, points_outer_row=self.full_points_outer_row)))


class _Section:
    """Reads typed values from one table and reports unknown keys."""

    def __init__(self, name: str, table: Any) -> None:
        if not isinstance(table, dict):
            raise ConfigKeyError(name, "must be a table")
        self.name = name
        self.table = table
        self.used: set[str] = set()

    def get(self, key: str, kind: type | tuple[type, ...], default: Any = None, required: bool = False) -> Any:
        self.used.add(key)
        full = f"{self.name}.{key}"
        if key not in self.table:
            if required:
                raise ConfigKeyError(full, "missing required key")
            return default
        value = self.table[key]
        kinds = kind if isinstance(kind, tuple) else (kind,)
        if float in kinds and isinstance(value, int) and not isinstance(value, bool):
            value = float(value)
        if isinstance(value, bool) and bool not in kinds or not isinstance(value, kinds):
            names = " or ".join(k.__name__ for k in kinds)
            raise ConfigKeyError(full, f"expected {names}, got {type(value).__name__}")
        return value

    def enum(self, key: str, enum: type[Enum], default: Any = None, required: bool = False) -> Any:
        value = self.get(key, str, None, required)
        if value is None:
            return default
        try:
            return enum(value)
        except ValueError:
            allowed = ", ".join(str(m.value) for m in enum)  # type: ignore[attr-defined]
            raise ConfigKeyError(f"{self.name}.{key}", f"unknown value {value!r}, expected one of: {allowed}")

    def floats(self, key: str, default: tuple[float, ...] = ()) -> tuple[float, ...]:
        values = self.get(key, list, None)
        if values is None:
            return default
        if not all(isinstance(v, int | float) and not isinstance(v, bool) for v in values):
            raise ConfigKeyError(f"{self.name}.{key}", "expected a list of numbers")
        return tuple(float(v) for v in values)

    def finish(self) -> None:
        unknown = sorted(set(self.table) - self.used)
        if unknown:
            raise ConfigKeyError(f"{self.name}.{unknown[0]}", "unknown key")


def _section(doc: dict[str, Any], name: str) -> _Section:
    return _Section(name, doc.get(name, {}))


SECTIONS = ("scenario", "lattice", "load", "driver", "integrator", "run", "spectral", "probes", "continuum", "outputs")
"""Top-level tables a scenario file may contain."""


def _parse_document(doc: dict[str, Any]) -> ScenarioConfig:
    unknown = sorted(set(doc) - set(SECTIONS))
    if unknown:
        raise ConfigKeyError(unknown[0], "unknown section")
    if "scenario" not in doc:
        raise ConfigKeyError("scenario", f"missing section; required keys: {', '.join(REQUIRED_KEYS)}")

    scenario = _section(doc, "scenario")
    name = scenario.get("name", str, required=True)
    model = scenario.enum("model", ModelKind, required=True)
    description = scenario.get("description", str, "")
    scenario.finish()

    load = None
    if "load" in doc:
        section = _section(doc, "load")
        kind = section.enum("kind", LoadKind, required=True)
        load = LoadSpec(
            kind=kind,
            mass_ratio=section.get("mass_ratio", float, required=True),
            lf_hat=section.get("lf_hat", float, required=True),
            sphere_radius=section.get("sphere_radius", float),
            inertia_model=section.enum("inertia_model", InertiaModel, InertiaModel.SOLID),
            inertia_override=section.get("inertia_override", float),
        )
        section.finish()

    lattice = None
    full_points = None
    if "lattice" in doc:
        section = _section(doc, "lattice")
        lattice = LatticeConfig(
            length=section.get("length", float, required=True),
            width=section.get("width", float, required=True),
            points_outer_row=section.get("points_outer_row", int, required=True),
            rows=section.get("rows", int, 3),
            point_mass=section.get("point_mass", float, 1.0),
            spring_stiffness=section.get("spring_stiffness", float, 1.0),
            load=load,
            anchor_columns=section.get("anchor_columns", int, 1),
            breadth=section.get("breadth", float),
        )
        full_points = section.get("full_points_outer_row", int)
        section.finish()

    section = _section(doc, "driver")
    driver = DriverSettings(
        kind=section.enum("kind", DriverKind, DriverKind.Z_PULSE),
        amplitude=section.get("amplitude", float, 0.0),
        pulse_periods=section.get("pulse_periods", float, DEFAULT_PULSE_PERIODS),
        ramp=section.enum("ramp", Ramp, Ramp.SMOOTH_STEP),
        drive_frequency=section.get("drive_frequency", float),
        burst_cycles=section.get("burst_cycles", float, float(BURST_CYCLES)),
    )
    section.finish()

    section = _section(doc, "integrator")
    integrator = IntegratorSettings(
        steps_per_period=section.get("steps_per_period", int, DEFAULT_STEPS_PER_PERIOD),
        iteration_tol=section.get("iteration_tol", float, DEFAULT_ITERATION_TOL),
        max_iterations=section.get("max_iterations", int, DEFAULT_MAX_ITERATIONS),
        scheme=section.enum("scheme", IterationScheme, IterationScheme.TANGENT),
        refresh_every=section.get("refresh_every", int, 1),
        max_halvings=section.get("max_halvings", int, DEFAULT_MAX_HALVINGS),
    )
    section.finish()
    if integrator.steps_per_period < 2:
        raise ConfigKeyError("integrator.steps_per_period", "must be at least 2")
    integrator.resolve(1.0)

    section = _section(doc, "run")
    run = RunSettings(
        duration_periods=section.get("duration_periods", float, DEFAULT_DURATION_PERIODS),
        stride=section.get("stride", int, 1),
        snapshot_periods=section.floats("snapshot_periods"),
    )
    section.finish()
    if run.duration_periods < 0.0:
        raise ConfigKeyError("run.duration_periods", "must be non-negative")
    if run.stride < 1:
        raise ConfigKeyError("run.stride", "must be at least 1")

    section = _section(doc, "spectral")
    spectral = SpectralSettings(
        window=section.enum("window", Window, Window.HANN),
        threshold=section.get("threshold", float, DEFAULT_PEAK_THRESHOLD),
        omega_max=section.get("omega_max", float, 110.0),
        leakage_cells=section.get("leakage_cells", float, LEAKAGE_CELLS),
        leakage_level=section.get("leakage_level", float, LEAKAGE_LEVEL),
    )
    section.finish()
    if not 0.0 < spectral.threshold < 1.0:
        raise ConfigKeyError("spectral.threshold", "must lie in (0, 1)")
    if spectral.omega_max <= 0.0:
        raise ConfigKeyError("spectral.omega_max", "must be positive")

    probes: tuple[ProbeSpec, ...] = (ProbeSpec(ProbeKind.SINGLE_POINT),)
    if "probes" in doc:
        if not isinstance(doc["probes"], list) or not doc["probes"]:
            raise ConfigKeyError("probes", "expected a non-empty array of tables")
        parsed = []
        for i, table in enumerate(doc["probes"]):
            section = _Section(f"probes[{i}]", table)
            component = section.get("component", str, "z")
            try:
                axis = Component.parse(component)
            except ValueError as err:
                raise ConfigKeyError(f"probes[{i}].component", str(err))
            parsed.append(ProbeSpec(section.enum("kind", ProbeKind, required=True), axis, section.get("point_id", int)))
            section.finish()
        probes = tuple(parsed)

    continuum = None
    if "continuum" in doc or model == ModelKind.CONTINUUM_ONLY:
        section = _section(doc, "continuum")
        lf_default = load.lf_hat if load is not None else None
        ratio_default = load.mass_ratio if load is not None else None
        lf_hat = section.get("lf_hat", float, lf_default)
        mass_ratio = section.get("mass_ratio", float, ratio_default)
        if lf_hat is None or mass_ratio is None:
            raise ConfigKeyError("continuum.lf_hat", "continuum runs need lf_hat and mass_ratio")
        continuum = ContinuumSettings(
            lf_hat=lf_hat,
            mass_ratio=mass_ratio,
            basis_size=section.get("basis_size", int, CONTINUUM_BASIS_SIZE),
            modes=section.get("modes", int, 6),
            shape_points=section.get("shape_points", int, 201),
            sweep=section.floats("sweep"),
        )
        section.finish()
        if continuum.basis_size < 1 or not 1 <= continuum.modes <= continuum.basis_size:
            raise ConfigKeyError("continuum.modes", "need 1 <= modes <= basis_size")
        if continuum.shape_points < 2:
            raise ConfigKeyError("continuum.shape_points", "must be at least 2")

    outputs = tuple(OutputKind)
    if "outputs" in doc:
        section = _section(doc, "outputs")
        kinds = section.get("kinds", list, required=True)
        try:
            outputs = tuple(OutputKind(k) for k in kinds)
        except ValueError as err:
            raise ConfigKeyError("outputs.kinds", str(err))
        section.finish()

    config = ScenarioConfig(
        name=name,
        model=model,
        description=description,
        lattice=lattice,
        driver=driver,
        integrator=integrator,
        run=run,
        spectral=spectral,
        probes=probes,
        continuum=continuum,
        outputs=outputs,
        full_points_outer_row=full_points,
    )
    _check_model(config)
    return config


def _check_model(config: ScenarioConfig) -> None:
    load = config.load
    match config.model:
        case ModelKind.CONTINUUM_ONLY:
            return
        case _ if config.lattice is None:
            raise ConfigKeyError("lattice", f"model {config.model.value} needs a [lattice] section")
        case ModelKind.UNIFORM if load is not None:
            raise ConfigKeyError("load", "uniform model takes no load")
        case ModelKind.LOADED_SIMPLIFIED if load is None or load.kind != LoadKind.DISTRIBUTED_MASS:
            raise ConfigKeyError("load.kind", "loaded_simplified needs a distributed_mass load")
        case ModelKind.LOADED_SPHERE if load is None or load.kind != LoadKind.RIGID_SPHERE:
            raise ConfigKeyError("load.kind", "loaded_sphere needs a rigid_sphere load")
        case _:
            pass
    if config.driver.kind in (DriverKind.Z_PULSE, DriverKind.X_PULSE) and config.driver.pulse_periods <= 0.0:
        raise ConfigKeyError("driver.pulse_periods", "must be positive")
    if config.driver.drive_frequency is not None and config.driver.drive_frequency <= 0.0:
        raise ConfigKeyError("driver.drive_frequency", "must be positive")
    if config.model != ModelKind.LOADED_SPHERE and any(p.kind == ProbeKind.SPHERE_ANGLE for p in config.probes):
        raise ConfigKeyError("probes", "sphere_angle probe needs the loaded_sphere model")


def parse_config(text: str) -> CantileverResult[ScenarioConfig]:
    """Parses and validates a scenario file.

    Args:
        text: TOML text.

    Returns:
        CantileverResult[ScenarioConfig]: the config, or a ConfigError naming the line or key.
    """
    if not text.strip():
        return Err(ConfigKeyError("scenario", f"empty scenario; required keys: {', '.join(REQUIRED_KEYS)}"))
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as err:
        match = _LINE.search(str(err))
        return Err(ConfigSyntaxError(str(err), int(match.group(1)) if match else None))
    try:
        return Ok(_parse_document(doc))
    except ConfigError as err:
        return Err(err)
    except CantileverError as err:
        return Err(ConfigError(str(err)))


def preset_names() -> list[str]:
    """Names of the built-in scenario files."""
    folder = resources.files(PRESETS_PACKAGE)
    return sorted(p.name.removesuffix(".toml") for p in folder.iterdir() if p.name.endswith(".toml"))


def preset_text(name: str) -> str:
    """Text of a built-in scenario.

    Raises:
        UnknownScenarioError: raised for an unknown preset.
    """
    resource = resources.files(PRESETS_PACKAGE).joinpath(f"{name}.toml")
    if not resource.is_file():
        raise UnknownScenarioError(f"no preset named {name!r}; known: {', '.join(preset_names())}")
    return resource.read_text(encoding="utf-8")


def load_scenario(reference: str) -> CantileverResult[ScenarioConfig]:
    """Reads a scenario from a file path or a preset name."""
    path = Path(reference)
    try:
        text = path.read_text(encoding="utf-8") if path.suffix == ".toml" and path.is_file() else preset_text(reference)
    except UnknownScenarioError as err:
        return Err(err)
    except OSError as err:
        return Err(ConfigError(f"can not read {reference}: {err}"))
    return parse_config(text)


def _toml_value(value: Any) -> str:
    match value:
        case Enum():
            return _toml_value(value.value)
        case bool():
            return "true" if value else "false"
        case int():
            return str(value)
        case float():
            return repr(value) if math.isfinite(value) else ("inf" if value > 0 else "-inf")
        case str():
            return '"' + value.replace("\\", "\\\\").replace('"', '\\"') + '"'
        case tuple() | list():
            return "[" + ", ".join(_toml_value(v) for v in value) + "]"
        case _:
            raise TypeError(f"no TOML form for {value!r}")


def _table(name: str, pairs: dict[str, Any]) -> list[str]:
    lines = [f"[{name}]"]
    lines += [f"{key} = {_toml_value(value)}" for key, value in pairs.items() if value is not None]
    return lines + [""]


def effective_config(config: ScenarioConfig) -> str:
    """Every resolved value of config as a scenario file that parses back to it."""
    lines = _table("scenario", {"name": config.name, "model": config.model, "description": config.description})
    if config.lattice is not None:
        lat = config.lattice
        lines += _table(
            "lattice",
            {
                "length": lat.length,
                "width": lat.width,
                "points_outer_row": lat.points_outer_row,
                "rows": lat.rows,
                "point_mass": lat.point_mass,
                "spring_stiffness": lat.spring_stiffness,
                "anchor_columns": lat.anchor_columns,
                "breadth": lat.breadth,
                "full_points_outer_row": config.full_points_outer_row,
            },
        )
    if config.load is not None:
        load = config.load
        lines += _table(
            "load",
            {
                "kind": load.kind,
                "mass_ratio": load.mass_ratio,
                "lf_hat": load.lf_hat,
                "sphere_radius": load.sphere_radius,
                "inertia_model": load.inertia_model,
                "inertia_override": load.inertia_override,
            },
        )
    d = config.driver
    lines += _table(
        "driver",
        {
            "kind": d.kind,
            "amplitude": d.amplitude,
            "pulse_periods": d.pulse_periods,
            "ramp": d.ramp,
            "drive_frequency": d.drive_frequency,
            "burst_cycles": d.burst_cycles,
        },
    )
    i = config.integrator
    lines += _table(
        "integrator",
        {
            "steps_per_period": i.steps_per_period,
            "iteration_tol": i.iteration_tol,
            "max_iterations": i.max_iterations,
            "scheme": i.scheme,
            "refresh_every": i.refresh_every,
            "max_halvings": i.max_halvings,
        },
    )
    r = config.run
    lines += _table(
        "run", {"duration_periods": r.duration_periods, "stride": r.stride, "snapshot_periods": r.snapshot_periods}
    )
    s = config.spectral
    lines += _table(
        "spectral",
        {
            "window": s.window,
            "threshold": s.threshold,
            "omega_max": s.omega_max,
            "leakage_cells": s.leakage_cells,
            "leakage_level": s.leakage_level,
        },
    )
    for probe in config.probes:
        lines.append("[[probes]]")
        lines.append(f"kind = {_toml_value(probe.kind)}")
        lines.append(f"component = {_toml_value(probe.component.name.lower())}")
        if probe.point_id is not None:
            lines.append(f"point_id = {probe.point_id}")
        lines.append("")
    if config.continuum is not None:
        c = config.continuum
        lines += _table(
            "continuum",
            {
                "lf_hat": c.lf_hat,
                "mass_ratio": c.mass_ratio,
                "basis_size": c.basis_size,
                "modes": c.modes,
                "shape_points": c.shape_points,
                "sweep": c.sweep,
            },
        )
    lines += _table("outputs", {"kinds": config.outputs})
    return "\n".join(lines)
