import argparse
import asyncio
import logging
import logging.config
import sys
from collections.abc import Sequence
from pathlib import Path

import tomllib

from common.config import DEFAULT_OUTPUT_DIR, LOGGING_CONFIG_FILE, LOGS_DIR

LOGGER = logging.getLogger(__name__)


def configure_logging() -> None:
    LOGS_DIR.mkdir(parents=True, exist_ok=True)
    with open(LOGGING_CONFIG_FILE, "rb") as stream:
        config = tomllib.load(stream)

    logging.config.dictConfig(config)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cantilever", description="Mass-spring lattice model of a loaded micro-cantilever."
    )
    commands = parser.add_subparsers(dest="command", required=True)

    run = commands.add_parser("run", help="run one scenario file or built-in preset")
    run.add_argument("scenario", help="path to a .toml scenario or a preset name")
    run.add_argument("--full", action="store_true", help="restore the full-resolution lattice of the preset")
    run.add_argument("--out", type=Path, default=DEFAULT_OUTPUT_DIR, help="artifacts root directory")
    run.add_argument(
        "--print-effective-config", action="store_true", help="print every resolved value and exit"
    )
    run.add_argument("--dump-lattice", action="store_true", help="also write the point and spring listing")

    oracle = commands.add_parser("oracle", help="continuum eigenfrequencies of a stepped-density beam")
    oracle.add_argument("--lf-hat", type=float, required=True, help="attachment length over beam length")
    oracle.add_argument("--mass-ratio", type=float, required=True, help="particle mass over beam mass")
    oracle.add_argument("--basis-size", type=int, default=50)
    oracle.add_argument("--modes", type=int, default=6)
    oracle.add_argument("--shape-points", type=int, default=201)
    oracle.add_argument("--out", type=Path, default=DEFAULT_OUTPUT_DIR)
    oracle.add_argument("--name", default="oracle", help="artifacts subdirectory")

    sweep = commands.add_parser("sweep", help="continuum Omega table over attachment lengths")
    sweep.add_argument("--mass-ratio", type=float, required=True)
    sweep.add_argument("--lf-hat", type=float, nargs="+", required=True)
    sweep.add_argument("--basis-size", type=int, default=50)
    sweep.add_argument("--modes", type=int, default=5)

    suite = commands.add_parser("suite", help="run a named group of presets in parallel processes")
    suite.add_argument("name", help="figures, acceptance or continuum")
    suite.add_argument("--full", action="store_true")
    suite.add_argument("--out", type=Path, default=DEFAULT_OUTPUT_DIR)
    suite.add_argument("--jobs", type=int, default=None, help="process pool size")

    commands.add_parser("presets", help="list built-in presets and suites")
    return parser


async def _run(args: argparse.Namespace) -> int:
    from cantilever.scenarios.config import effective_config, load_scenario
    from cantilever.suite import exit_code
    from cantilever.worker import run_scenario
    from common.result import Err, Ok

    match load_scenario(args.scenario):
        case Err(error):
            print(f"error: {error}", file=sys.stderr)
            return exit_code(error)
        case Ok(config):
            pass
    if args.full:
        match config.at_full_resolution():
            case Err(error):
                print(f"error: {error}", file=sys.stderr)
                return exit_code(error)
            case Ok(config):
                pass
    if args.print_effective_config:
        print(effective_config(config), end="")
        return 0
    match await run_scenario(config, args.out, dump_lattice=args.dump_lattice):
        case Ok(artifacts):
            print(f"{config.name}: {len(artifacts.files)} files in {artifacts.directory}")
            return 0
        case Err(error):
            print(f"error: {config.name}: {error}", file=sys.stderr)
            return exit_code(error)


async def _oracle(args: argparse.Namespace) -> int:
    from cantilever.continuum.galerkin import DensityProfile
    from cantilever.exceptions import ConfigError, ContinuumError
    from cantilever.scenarios.config import ContinuumSettings, ModelKind, OutputKind, ScenarioConfig
    from cantilever.suite import exit_code
    from cantilever.worker import run_scenario
    from common.result import Err, Ok

    try:
        DensityProfile(args.lf_hat, args.mass_ratio)
    except ContinuumError as err:
        print(f"error: {err}", file=sys.stderr)
        return exit_code(ConfigError(str(err)))
    if args.basis_size < 1 or not 1 <= args.modes <= args.basis_size:
        print("error: need 1 <= modes <= basis-size", file=sys.stderr)
        return 2
    settings = ContinuumSettings(args.lf_hat, args.mass_ratio, args.basis_size, args.modes, args.shape_points)
    config = ScenarioConfig(
        args.name,
        ModelKind.CONTINUUM_ONLY,
        continuum=settings,
        outputs=(OutputKind.MODES, OutputKind.PLOTS),
    )
    match await run_scenario(config, args.out):
        case Ok(artifacts):
            assert artifacts.continuum is not None
            solution = artifacts.continuum.solution
            print("n,omega_bar,Omega,Omega_self")
            for n in range(artifacts.continuum.modes):
                print(
                    f"{n},{solution.eigenfrequencies[n]:.8g},{solution.ratios[n]:.8g},{solution.self_ratios[n]:.8g}"
                )
            return 0
        case Err(error):
            print(f"error: {error}", file=sys.stderr)
            return exit_code(error)


def _sweep(args: argparse.Namespace) -> int:
    from cantilever.continuum.galerkin import DensityProfile, sweep_lf_hat
    from cantilever.exceptions import CantileverError, ConfigError, ContinuumError
    from cantilever.suite import exit_code

    try:
        for lf_hat in args.lf_hat:
            DensityProfile(lf_hat, args.mass_ratio)
    except ContinuumError as err:
        print(f"error: {err}", file=sys.stderr)
        return exit_code(ConfigError(str(err)))
    try:
        rows = sweep_lf_hat(args.lf_hat, args.mass_ratio, args.modes, args.basis_size)
    except CantileverError as err:
        print(f"error: {err}", file=sys.stderr)
        return exit_code(err)
    print("lf_hat," + ",".join(f"Omega_{k}" for k in range(args.modes)))
    for row in rows:
        print(f"{row.lf_hat:.6g}," + ",".join(f"{r:.8g}" for r in row.ratios))
    return 0


async def _suite(args: argparse.Namespace) -> int:
    from cantilever.exceptions import UnknownScenarioError
    from cantilever.suite import SuiteRunner

    try:
        runner = SuiteRunner.named(args.name, args.out, full=args.full, max_workers=args.jobs)
    except UnknownScenarioError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    outcomes = await runner.run()
    for outcome in outcomes:
        print(f"{outcome.name}: {'ok' if outcome.succeeded else 'FAILED'} {outcome.message}")
    return max((o.exit_code for o in outcomes), default=0)


def _presets() -> int:
    from cantilever.scenarios.config import SUITES, preset_names

    for name in preset_names():
        print(name)
    for suite, names in SUITES.items():
        print(f"suite {suite}: {' '.join(names)}")
    return 0


async def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging()
    LOGGER.info(f"Command {args.command}")

    match args.command:
        case "run":
            return await _run(args)
        case "oracle":
            return await _oracle(args)
        case "sweep":
            return _sweep(args)
        case "suite":
            return await _suite(args)
        case _:
            return _presets()


def cli() -> None:
    sys.exit(asyncio.run(main()))


if __name__ == "__main__":
    cli()
