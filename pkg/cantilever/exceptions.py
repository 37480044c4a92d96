class CantileverError(Exception):
    """Base exception class for all cantilever model exceptions."""


class ConfigError(CantileverError):
    """Scenario configuration is invalid."""

    pass


class ConfigSyntaxError(ConfigError):
    """Scenario text can not be parsed."""

    def __init__(self, message: str, line: int | None = None) -> None:
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line


class ConfigKeyError(ConfigError):
    """Key is unknown, missing or holds an invalid value."""

    def __init__(self, key: str, message: str) -> None:
        super().__init__(f"{key}: {message}")
        self.key = key


class UnknownScenarioError(ConfigError):
    """No preset or driver is registered under the given name."""

    pass


class LatticeError(CantileverError):
    """Lattice can not be built from the given parameters."""

    pass


class EmptySegmentError(LatticeError):
    """Attachment segment contains no material points."""

    pass


class DegenerateSpringError(CantileverError):
    """Spring endpoints coincide."""

    pass


class RigidCouplingError(CantileverError):
    """Rigid sphere can not be coupled to the lattice."""

    pass


class MissingAttachmentForceError(RigidCouplingError):
    """Force for an attached point is missing."""

    pass


class RigidStateError(RigidCouplingError):
    """Rigid pose left the physically meaningful range."""

    pass


class IntegrationError(CantileverError):
    """Time step could not be completed."""

    pass


class ConvergenceError(IntegrationError):
    """Fixed-point iteration did not reach the tolerance."""

    def __init__(self, message: str, residual: float) -> None:
        super().__init__(f"{message} (residual={residual:.3e})")
        self.residual = residual


class NumericalInstabilityError(IntegrationError):
    """Non-finite values appeared in the state."""

    pass


class SpectralError(CantileverError):
    """Signal can not be analysed."""

    pass


class ContinuumError(CantileverError):
    """Continuum eigenproblem input is invalid."""

    pass


class ModalSolveError(ContinuumError):
    """Galerkin eigenproblem returned unusable eigenpairs."""

    pass
