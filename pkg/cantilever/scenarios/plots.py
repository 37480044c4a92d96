from __future__ import annotations

import math
from logging import Logger
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from cantilever.continuum.galerkin import eval_mode_shape  # noqa: E402
from cantilever.scenarios.artifacts import ContinuumResults, LatticeResults, ScenarioArtifacts  # noqa: E402
from cantilever.scenarios.config import OutputKind  # noqa: E402
from cantilever.spectral.probes import ProbeKind  # noqa: E402

from . import logger as LOGGER_BASE  # noqa: E402

LOGGER = LOGGER_BASE.getChild("plots")

SVG_SALT = "cantilever-lattice"
"""Fixed id salt so repeated runs write identical SVG files."""

SHAPE_EXAGGERATION = 1.0
"""Scale of displacements in snapshot plots."""


def _save(figure: plt.Figure, path: Path) -> Path:
    figure.savefig(path, format="svg", metadata={"Date": None})
    plt.close(figure)
    return path


def plot_traces(res: LatticeResults, path: Path) -> Path:
    """One panel per probe, signal against time in T0."""
    traces = res.run.traces
    figure, axes = plt.subplots(len(traces), 1, figsize=(8, 2.4 * len(traces)), sharex=True, squeeze=False)
    for ax, trace in zip(axes[:, 0], traces):
        t = trace.sample_times / res.period
        if trace.probe.kind == ProbeKind.SPHERE_ANGLE:
            ax.plot(t, np.degrees(trace.values), lw=0.8)
            ax.set_ylabel("beta (deg)")
        else:
            ax.plot(t, trace.values, lw=0.8)
            ax.set_ylabel(f"{trace.probe.label} (um)")
    axes[-1, 0].set_xlabel("t / T0")
    figure.tight_layout()
    return _save(figure, path)


def plot_spectrum(res: LatticeResults, label: str, path: Path) -> Path:
    """|A| against Omega with every peak annotated."""
    spectrum = res.spectra[label]
    strongest = spectrum.strongest
    scale = strongest.magnitude if strongest is not None and strongest.magnitude > 0.0 else 1.0
    figure, ax = plt.subplots(figsize=(8, 3.5))
    ax.plot(spectrum.omega_grid / res.omega0, spectrum.magnitude / scale, lw=0.8)
    for peak in spectrum.peaks:
        omega = peak.omega / res.omega0
        ax.annotate(
            f"{omega:.2f}",
            (omega, peak.magnitude / scale),
            textcoords="offset points",
            xytext=(0, 4),
            ha="center",
            fontsize=7,
        )
    ax.set_yscale("log")
    ax.set_xlabel("Omega = omega / omega0")
    ax.set_ylabel("|A| / max peak")
    ax.set_title(label)
    figure.tight_layout()
    return _save(figure, path)


def plot_snapshots(res: LatticeResults, path: Path) -> Path:
    """Middle-row shape z(x) at each snapshot time."""
    lattice = res.lattice
    middle = np.flatnonzero(lattice.rows == int(lattice.rows.max()) // 2)
    figure, ax = plt.subplots(figsize=(8, 3.5))
    rest = lattice.rest_positions[middle]
    for snap in res.run.snapshots:
        shape = snap.positions[middle]
        z = rest[:, 1] + SHAPE_EXAGGERATION * (shape[:, 1] - rest[:, 1])
        ax.plot(shape[:, 0], z, lw=0.9, label=f"t = {snap.time / res.period:.4f} T0")
    ax.set_xlabel("x (um)")
    ax.set_ylabel("z (um)")
    ax.legend(fontsize=7)
    figure.tight_layout()
    return _save(figure, path)


def plot_mode_shapes(cont: ContinuumResults, path: Path) -> Path:
    """Loaded eigenfunctions, the uniform ones dotted."""
    grid = np.linspace(0.0, 1.0, cont.shape_points)
    figure, ax = plt.subplots(figsize=(7, 4))
    for n in range(cont.modes):
        (line,) = ax.plot(grid, eval_mode_shape(cont.solution, n, grid), lw=1.2, label=f"n = {n}")
        ax.plot(grid, eval_mode_shape(cont.uniform, n, grid), ls=":", lw=1.0, color=line.get_color())
    ax.axvline(1.0 - cont.solution.profile.lf_hat, color="gray", lw=0.5)
    ax.set_xlabel("x / l")
    ax.set_ylabel("f_n")
    ax.legend(fontsize=7)
    figure.tight_layout()
    return _save(figure, path)


def plot_sweep(cont: ContinuumResults, path: Path) -> Path:
    lf = [row.lf_hat for row in cont.sweep]
    figure, ax = plt.subplots(figsize=(6, 4))
    for n in range(len(cont.sweep[0].ratios)):
        ax.plot(lf, [row.ratios[n] for row in cont.sweep], marker="o", label=f"Omega_{n}")
    ax.set_xlabel("lf_hat")
    ax.set_ylabel("Omega")
    ax.set_yscale("log")
    ax.legend(fontsize=7)
    figure.tight_layout()
    return _save(figure, path)


def emit_plots(artifacts: ScenarioArtifacts, *, logger: Logger = LOGGER) -> list[Path]:
    """Writes the SVG figures of a scenario next to its tables.

    Returns:
        list[Path]: written files; empty when the config asks for no plots.
    """
    config = artifacts.config
    if not config.wants(OutputKind.PLOTS):
        return []
    matplotlib.rcParams["svg.hashsalt"] = SVG_SALT
    directory = artifacts.directory
    directory.mkdir(parents=True, exist_ok=True)
    files: list[Path] = []
    if (res := artifacts.lattice) is not None:
        if res.run.traces and res.run.traces[0].sample_times.size > 1:
            files.append(plot_traces(res, directory / "traces.svg"))
        for label, spectrum in res.spectra.items():
            if np.all(np.isfinite(spectrum.magnitude)) and math.isfinite(res.omega0):
                files.append(plot_spectrum(res, label, directory / f"spectrum_{label}.svg"))
        if res.run.snapshots:
            files.append(plot_snapshots(res, directory / "snapshots.svg"))
    if (cont := artifacts.continuum) is not None:
        files.append(plot_mode_shapes(cont, directory / "mode_shapes.svg"))
        if cont.sweep:
            files.append(plot_sweep(cont, directory / "sweep.svg"))
    artifacts.files.extend(files)
    logger.info(f"Wrote {len(files)} plots to {directory}")
    return files
