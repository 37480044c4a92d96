import os
from pathlib import Path

BASE_DIR = Path(__file__).resolve().parent.parent
"""Base project directory."""

LOGGING_CONFIG_FILE = BASE_DIR / "logging_config.toml"
"""Path logging configuration file."""

LOGS_DIR = Path("logs")
"""Directory the rotating file handlers write into, relative to the working directory."""

OUTPUT_DIR_ENV = "CANTILEVER_OUTPUT_DIR"
"""Environment variable with the default artifacts directory."""

DEFAULT_OUTPUT_DIR = Path(os.environ.get(OUTPUT_DIR_ENV, "out"))
"""Artifacts directory used when --out is not given."""

PRESETS_PACKAGE = "cantilever.scenarios.presets"
"""Package holding built-in scenario files."""

SOLID_INERTIA_FACTOR = 0.4
"""I_sp / (m_sp R^2) for a uniform sphere."""

SHELL_INERTIA_FACTOR = 1.0
"""I_sp / (m_sp R^2) for a thin shell."""

DEFAULT_STEPS_PER_PERIOD = 240
"""Time steps per unloaded fundamental period."""

DEFAULT_ITERATION_TOL = 1e-12
"""Fixed-point residual tolerance, relative."""

DEFAULT_MAX_ITERATIONS = 50
"""Fixed-point sweeps allowed per step."""

DEFAULT_MAX_HALVINGS = 4
"""Times an unconverged step may be split into two half steps."""

PULSE_LIMIT_PERIODS = 0.05
"""Pulses longer than this share of T0 are reported."""

DEFAULT_PULSE_PERIODS = 5 / 240
"""Pulse duration in fundamental periods (five snapshot intervals of T/240)."""

DEFAULT_DURATION_PERIODS = 60.0
"""Run length in fundamental periods."""

MIN_TRACE_PERIODS = 20.0
"""Traces shorter than this (in fundamental periods) are reported."""

DEFAULT_GRID_POINTS = 2048
"""Minimal size of the angular frequency grid."""

GRID_POINTS_PER_CELL = 4
"""Grid points per spectral resolution cell 2*pi/t_calc."""

DEFAULT_PEAK_THRESHOLD = 0.02
"""Peaks below this share of the spectrum maximum are ignored."""

LEAKAGE_CELLS = 8.0
"""Radius in resolution cells inside which weak maxima count as leakage."""

LEAKAGE_LEVEL = 0.03
"""Relative level under which a near maximum counts as leakage."""

SIDELOBE_MARGIN = 2.0
"""Factor on the 1 / (pi cells) sidelobe envelope of an untapered spectrum."""

CONTINUUM_BASIS_SIZE = 50
"""Number of clamped-free eigenfunctions in the Galerkin basis."""

QUADRATURE_NODES = 64
"""Gauss-Legendre nodes per panel."""

QUADRATURE_PANEL = 0.05
"""Largest panel width on the unit beam."""

ORTHOGONALITY_LIMIT = 0.02
"""Largest acceptable cross-orthogonality integral."""

EXACT_MATCH_LIMIT = 1e-4
"""Largest relative gap between Galerkin and closed-form frequencies before a warning."""

FLOAT_FORMAT = ".12g"
"""Format of floats in CSV artifacts."""
