from typing import Protocol, Unpack

from cantilever.dynamics.integrator import (
    ImplicitMidpointIntegrator,
    Integrator,
    IntegratorKwargs,
    MassPreconditioner,
)
from cantilever.dynamics.system import CantileverSystem
from cantilever.dynamics.types import IntegratorConfig
from cantilever.lattice.builder import LatticeBuilder, LatticeBuilderKwargs, TriangularLatticeBuilder
from cantilever.scenarios.artifacts import ArtifactWriter, ArtifactWriterKwargs
from cantilever.spectral.spectrum import DirectQuadratureAnalyzer, SpectrumAnalyzer, SpectrumAnalyzerKwargs


class Toolkit(Protocol):
    """Interface of a toolkit object - object with factories for every stage of a scenario run."""

    def get_builder(self, **kwargs: Unpack[LatticeBuilderKwargs]) -> LatticeBuilder:
        """Factory for LatticeBuilder."""
        ...

    def get_integrator(
        self, system: CantileverSystem, config: IntegratorConfig, **kwargs: Unpack[IntegratorKwargs]
    ) -> Integrator:
        """Factory for Integrator."""
        ...

    def get_analyzer(self, **kwargs: Unpack[SpectrumAnalyzerKwargs]) -> SpectrumAnalyzer:
        """Factory for SpectrumAnalyzer."""
        ...

    def get_writer(self, **kwargs: Unpack[ArtifactWriterKwargs]) -> ArtifactWriter:
        """Factory for ArtifactWriter."""
        ...


class DefaultToolkit:
    """A default implementation of Toolkit protocol."""

    def get_builder(self, **kwargs: Unpack[LatticeBuilderKwargs]) -> LatticeBuilder:
        """Factory for LatticeBuilder.

        Returns:
            LatticeBuilder: TriangularLatticeBuilder.
        """
        return TriangularLatticeBuilder(**kwargs)

    def get_integrator(
        self, system: CantileverSystem, config: IntegratorConfig, **kwargs: Unpack[IntegratorKwargs]
    ) -> Integrator:
        """Factory for Integrator.

        Returns:
            Integrator: ImplicitMidpointIntegrator with the preconditioner named by config.scheme.
        """
        return ImplicitMidpointIntegrator(system, config, **kwargs)

    def get_analyzer(self, **kwargs: Unpack[SpectrumAnalyzerKwargs]) -> SpectrumAnalyzer:
        """Factory for SpectrumAnalyzer.

        Returns:
            SpectrumAnalyzer: DirectQuadratureAnalyzer.
        """
        return DirectQuadratureAnalyzer(**kwargs)

    def get_writer(self, **kwargs: Unpack[ArtifactWriterKwargs]) -> ArtifactWriter:
        """Factory for ArtifactWriter.

        Returns:
            ArtifactWriter: ArtifactWriter.
        """
        return ArtifactWriter(**kwargs)


class PicardToolkit(DefaultToolkit):
    """Toolkit whose integrator always sweeps with the mass matrix alone."""

    def get_integrator(
        self, system: CantileverSystem, config: IntegratorConfig, **kwargs: Unpack[IntegratorKwargs]
    ) -> Integrator:
        """Factory for Integrator.

        Returns:
            Integrator: ImplicitMidpointIntegrator with MassPreconditioner.
        """
        kwargs["preconditioner"] = MassPreconditioner()
        return ImplicitMidpointIntegrator(system, config, **kwargs)
