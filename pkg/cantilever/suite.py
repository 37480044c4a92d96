from __future__ import annotations

import asyncio
from collections.abc import Iterable
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Protocol, Unpack

from cantilever.exceptions import CantileverError, ConfigError, UnknownScenarioError
from cantilever.scenarios.config import SUITES, load_scenario
from cantilever.worker import ScenarioWorker, WorkerKwargs, worker_for
from common.result import Err, Ok

from . import logger as LOGGER_BASE

LOGGER = LOGGER_BASE.getChild("suite")


class WorkerFactory(Protocol):
    """Worker factory protocol."""

    def __call__(self, **kwargs: Unpack[WorkerKwargs]) -> ScenarioWorker:
        ...


@dataclass(frozen=True, slots=True)
class SuiteOutcome:
    """Picklable summary of one scenario of a suite.

    Args:
        name: Preset name.
        succeeded: Whether the scenario wrote its artifacts.
        message: Error text, or the artifacts directory on success.
        exit_code: 0, or the code the CLI would return for the error.
    """

    name: str
    succeeded: bool
    message: str
    exit_code: int = 0


def exit_code(error: CantileverError) -> int:
    """2 for configuration errors, 3 for numerical failures."""
    return 2 if isinstance(error, ConfigError) else 3


def _run_job(
    worker_id: int, reference: str, output_dir: Path, full: bool, worker_factory: WorkerFactory | None
) -> SuiteOutcome:
    """Runs one scenario inside a pool process."""
    return asyncio.run(_job(worker_id, reference, output_dir, full, worker_factory))


async def _job(
    worker_id: int, reference: str, output_dir: Path, full: bool, worker_factory: WorkerFactory | None
) -> SuiteOutcome:
    match load_scenario(reference):
        case Err(error):
            return SuiteOutcome(reference, False, str(error), exit_code(error))
        case Ok(config):
            pass
    if full:
        match config.at_full_resolution():
            case Err(error):
                return SuiteOutcome(reference, False, str(error), exit_code(error))
            case Ok(config):
                pass
    factory = worker_factory if worker_factory is not None else worker_for(config)
    async with factory(worker_id=worker_id, config=config, output_dir=output_dir) as worker:
        result = await worker.do()
    match result:
        case Ok(artifacts):
            return SuiteOutcome(reference, True, str(artifacts.directory))
        case Err(error):
            return SuiteOutcome(reference, False, str(error), exit_code(error))


class SuiteRunner:
    """Runs a group of presets, one process per scenario."""

    def __init__(
        self,
        names: Iterable[str],
        output_dir: Path,
        *,
        full: bool = False,
        max_workers: int | None = None,
        worker_factory: WorkerFactory | None = None,
    ) -> None:
        """
        Args:
            names: Presets or scenario files to run.
            output_dir: Artifacts root shared by all scenarios.
            full: Keyword parameter. Restore the full-resolution lattices.
            max_workers: Keyword parameter. Pool size. Defaults to None, the CPU count.
            worker_factory: Keyword parameter. Factory of workers. Defaults to None, the worker matching each model.
        """
        self.names = list(names)
        self.output_dir = output_dir
        self.full = full
        self.max_workers = max_workers
        self.worker_factory = worker_factory

    @classmethod
    def named(cls, suite: str, output_dir: Path, **kwargs: object) -> SuiteRunner:
        """Runner for one of the SUITES.

        Raises:
            UnknownScenarioError: raised for an unknown suite name.
        """
        if suite not in SUITES:
            raise UnknownScenarioError(f"no suite named {suite!r}; known: {', '.join(SUITES)}")
        return cls(SUITES[suite], output_dir, **kwargs)  # type: ignore[arg-type]

    async def run(self) -> list[SuiteOutcome]:
        """Runs every scenario and returns the outcomes in input order."""
        LOGGER.info(f"Suite start: {', '.join(self.names)}")
        loop = asyncio.get_running_loop()
        with ProcessPoolExecutor(max_workers=self.max_workers) as pool:
            futures = [
                loop.run_in_executor(
                    pool, _run_job, worker_id, name, self.output_dir, self.full, self.worker_factory
                )
                for worker_id, name in enumerate(self.names)
            ]
            outcomes = await asyncio.gather(*futures)
        for outcome in outcomes:
            if outcome.succeeded:
                LOGGER.info(f"{outcome.name}: ok ({outcome.message})")
            else:
                LOGGER.error(f"{outcome.name}: failed ({outcome.message})")
        LOGGER.info(f"Suite shutdown: {sum(o.succeeded for o in outcomes)}/{len(outcomes)} succeeded")
        return list(outcomes)
