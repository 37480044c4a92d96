from __future__ import annotations

import csv
import hashlib
import json
import math
import platform
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from importlib import metadata
from logging import Logger
from pathlib import Path
from typing import NotRequired, TypedDict

import numpy as np

from cantilever.continuum.galerkin import ModalSolution, SweepRow, eval_mode_shape
from cantilever.dynamics.runner import RunOutput
from cantilever.lattice.listing import dump_listing
from cantilever.lattice.types import Lattice
from cantilever.scenarios.config import OutputKind, ScenarioConfig, effective_config
from cantilever.spectral.spectrum import Spectrum
from common.config import FLOAT_FORMAT

from . import logger as LOGGER_BASE

LOGGER = LOGGER_BASE.getChild("artifacts")

DETERMINISM_NOTE = "No random numbers are drawn; identical configs give identical CSV files."
"""Recorded in every manifest."""


@dataclass(eq=False)
class LatticeResults:
    """Outcome of a lattice scenario.

    Args:
        lattice: Simulated lattice.
        run: Traces, energy and snapshots of the scenario run.
        spectra: Spectrum per probe label.
        omega0: Fundamental of the unloaded twin, model units.
        period: T0 used to scale times, model units.
        dt: Time step, model units.
    """

    lattice: Lattice
    run: RunOutput
    spectra: dict[str, Spectrum]
    omega0: float
    period: float
    dt: float


@dataclass(eq=False)
class ContinuumResults:
    """Outcome of the Galerkin oracle."""

    solution: ModalSolution
    uniform: ModalSolution
    modes: int
    shape_points: int
    sweep: list[SweepRow] = field(default_factory=list)
    exact: tuple[float, ...] = ()
    """omega_bar of the closed-form two-segment beam, first `modes` entries."""


@dataclass(eq=False)
class ScenarioArtifacts:
    """Results of one scenario and the files written for it."""

    config: ScenarioConfig
    directory: Path
    lattice: LatticeResults | None = None
    continuum: ContinuumResults | None = None
    files: list[Path] = field(default_factory=list)

    def summary(self) -> dict[str, object]:
        """Headline numbers recorded in the manifest."""
        data: dict[str, object] = {"scenario": self.config.name, "model": self.config.model.value}
        if self.lattice is not None:
            res = self.lattice
            data |= {
                "points": res.lattice.n_points,
                "attachment_points": res.lattice.n_f,
                "omega0": res.omega0,
                "period": res.period,
                "dt": res.dt,
                "energy_drift": res.run.max_energy_drift(),
                "ratios": {
                    label: [p.omega / res.omega0 for p in spectrum.peaks] for label, spectrum in res.spectra.items()
                },
                "self_ratios": {
                    label: [p.omega / own for p in spectrum.peaks]
                    for label, spectrum in res.spectra.items()
                    if (own := _lowest_peak(spectrum)) is not None
                },
            }
        if self.continuum is not None:
            data["continuum_ratios"] = [float(r) for r in self.continuum.solution.ratios[: self.continuum.modes]]
            data["continuum_self_ratios"] = [
                float(r) for r in self.continuum.solution.self_ratios[: self.continuum.modes]
            ]
            data["orthogonality_residual"] = self.continuum.solution.orthogonality_residual
            data["continuum_exact_omega_bar"] = list(self.continuum.exact)
        return data


def _lowest_peak(spectrum: Spectrum) -> float | None:
    return min((p.omega for p in spectrum.peaks), default=None)


def _fmt(value: float) -> str:
    return format(value, FLOAT_FORMAT)


def config_hash(config: ScenarioConfig) -> str:
    """sha256 of the effective config text."""
    return hashlib.sha256(effective_config(config).encode("utf-8")).hexdigest()


def _versions() -> dict[str, str]:
    versions = {"python": platform.python_version()}
    for package in ("cantilever-lattice", "numpy", "scipy", "matplotlib"):
        try:
            versions[package] = metadata.version(package)
        except metadata.PackageNotFoundError:
            versions[package] = "unknown"
    return versions


class ArtifactWriterKwargs(TypedDict):
    """Key-word arguments dict for an ArtifactWriter."""

    logger: NotRequired[Logger]


class ArtifactWriter:
    """Writes the CSV tables and the manifest of a scenario."""

    __slots__ = ("_logger",)

    def __init__(self, *, logger: Logger = LOGGER) -> None:
        """
        Args:
            logger: (optional) Keyword parameter. Defaults to sublogger of base package logger.
        """
        self._logger = logger

    def write(self, artifacts: ScenarioArtifacts, dump_lattice: bool = False) -> list[Path]:
        """Writes every table the config asks for. The manifest is written separately, after the plots.

        Returns:
            list[Path]: written files.
        """
        config = artifacts.config
        artifacts.directory.mkdir(parents=True, exist_ok=True)
        files = artifacts.files
        if (res := artifacts.lattice) is not None:
            if dump_lattice:
                files.append(self._text(artifacts.directory / "lattice.txt", dump_listing(res.lattice)))
            if config.wants(OutputKind.TRACES):
                files.append(self.write_traces(artifacts.directory / "traces.csv", res))
            if config.wants(OutputKind.ENERGY):
                files.append(self.write_energy(artifacts.directory / "energy.csv", res.run))
            if config.wants(OutputKind.SPECTRA):
                for label, spectrum in res.spectra.items():
                    files.append(self.write_spectrum(artifacts.directory / f"spectrum_{label}.csv", spectrum, res.omega0))
                    files.append(self.write_peaks(artifacts.directory / f"peaks_{label}.csv", spectrum, res.omega0))
            if config.wants(OutputKind.SNAPSHOTS) and res.run.snapshots:
                files.append(self.write_snapshots(artifacts.directory / "snapshots.csv", res))
        if (cont := artifacts.continuum) is not None and config.wants(OutputKind.MODES):
            files.append(self.write_eigenvalues(artifacts.directory / "eigenvalues.csv", cont))
            files.append(self.write_mode_shapes(artifacts.directory / "mode_shapes.csv", cont))
            if cont.sweep:
                files.append(self.write_sweep(artifacts.directory / "sweep.csv", cont.sweep))
        self._logger.info(f"Wrote {len(files)} tables to {artifacts.directory}")
        return files

    def write_traces(self, path: Path, res: LatticeResults) -> Path:
        traces = res.run.traces
        header = ["time", "time_periods"] + [t.probe.label for t in traces]
        with_rigid = bool(res.run.rigid)
        if with_rigid:
            header += ["beta_deg", "cx", "cz"]
        rows = []
        for k, sample in enumerate(res.run.energy):
            row = [sample.time, sample.time / res.period] + [float(t.values[k]) for t in traces]
            if with_rigid:
                _, rigid = res.run.rigid[k]
                row += [math.degrees(rigid.beta), float(rigid.center[0]), float(rigid.center[1])]
            rows.append(row)
        return self._csv(path, header, rows)

    def write_energy(self, path: Path, run: RunOutput) -> Path:
        header = ["time", "kinetic", "elastic", "rigid_kinetic", "total", "boundary_work", "external_work"]
        rows = [
            [e.time, e.kinetic, e.elastic, e.rigid_kinetic, e.total, e.boundary_work, e.external_work] for e in run.energy
        ]
        return self._csv(path, header, rows)

    def write_spectrum(self, path: Path, spectrum: Spectrum, omega0: float) -> Path:
        scale = _peak_scale(spectrum)
        rows = ([w, w / omega0, m / scale] for w, m in zip(spectrum.omega_grid, spectrum.magnitude))
        return self._csv(path, ["omega", "Omega", "magnitude"], rows)

    def write_peaks(self, path: Path, spectrum: Spectrum, omega0: float) -> Path:
        scale = _peak_scale(spectrum)
        own = _lowest_peak(spectrum) or omega0
        rows = ([p.omega, p.omega / omega0, p.omega / own, p.magnitude / scale] for p in spectrum.peaks)
        return self._csv(path, ["omega", "Omega", "Omega_self", "magnitude"], rows)

    def write_snapshots(self, path: Path, res: LatticeResults) -> Path:
        rows = []
        for snap in res.run.snapshots:
            for point_id, (x, z) in enumerate(snap.positions):
                rows.append([snap.time, snap.time / res.period, point_id, x, z])
        return self._csv(path, ["time", "time_periods", "point_id", "x", "z"], rows)

    def write_eigenvalues(self, path: Path, cont: ContinuumResults) -> Path:
        solution = cont.solution
        rows = (
            [n, solution.eigenfrequencies[n], solution.ratios[n], solution.self_ratios[n], cont.uniform.ratios[n]]
            for n in range(cont.modes)
        )
        return self._csv(path, ["n", "omega_bar", "Omega", "Omega_self", "Omega_uniform"], rows)

    def write_mode_shapes(self, path: Path, cont: ContinuumResults) -> Path:
        grid = np.linspace(0.0, 1.0, cont.shape_points)
        loaded = [eval_mode_shape(cont.solution, n, grid) for n in range(cont.modes)]
        uniform = [eval_mode_shape(cont.uniform, n, grid) for n in range(cont.modes)]
        header = ["x_hat"] + [f"f_{n}" for n in range(cont.modes)] + [f"uniform_{n}" for n in range(cont.modes)]
        rows = ([x, *(f[i] for f in loaded), *(g[i] for g in uniform)] for i, x in enumerate(grid))
        return self._csv(path, header, rows)

    def write_sweep(self, path: Path, sweep: Sequence[SweepRow]) -> Path:
        n = len(sweep[0].ratios)
        rows = ([row.lf_hat, *row.ratios] for row in sweep)
        return self._csv(path, ["lf_hat"] + [f"Omega_{k}" for k in range(n)], rows)

    def write_manifest(self, artifacts: ScenarioArtifacts) -> Path:
        path = artifacts.directory / "manifest.json"
        manifest = {
            "scenario": artifacts.config.name,
            "config_sha256": config_hash(artifacts.config),
            "determinism": DETERMINISM_NOTE,
            "versions": _versions(),
            "files": [p.name for p in artifacts.files],
            "summary": artifacts.summary(),
        }
        path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        return path

    def _csv(self, path: Path, header: Sequence[str], rows: Iterable[Sequence[object]]) -> Path:
        with path.open("w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(header)
            for row in rows:
                writer.writerow([_fmt(v) if isinstance(v, float | np.floating) else v for v in row])
        self._logger.debug(f"Wrote {path}")
        return path

    def _text(self, path: Path, text: str) -> Path:
        path.write_text(text, encoding="utf-8")
        return path


def _peak_scale(spectrum: Spectrum) -> float:
    strongest = spectrum.strongest
    if strongest is not None and strongest.magnitude > 0.0:
        return strongest.magnitude
    top = float(spectrum.magnitude.max()) if spectrum.magnitude.size else 0.0
    return top if top > 0.0 else 1.0
