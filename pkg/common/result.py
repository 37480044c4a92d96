from dataclasses import dataclass
from typing import Generic, NoReturn, TypeVar

T = TypeVar("T", covariant=True)
E = TypeVar("E", bound=Exception)


@dataclass(frozen=True, slots=True)
class Ok(Generic[T]):
    """Successful outcome of an operation.

    Args:
        value (T): Produced value.
    """

    value: T
    __match_args__ = ("value",)

    def unwrap(self) -> T:
        """Returns the wrapped value."""
        return self.value


@dataclass(frozen=True, slots=True)
class Err(Generic[E]):
    """Failed outcome of an operation.

    Args:
        error (E): Exception describing the failure.
    """

    error: E
    __match_args__ = ("error",)

    def unwrap(self) -> NoReturn:
        """Raises the wrapped error."""
        raise self.error


Result = Ok[T] | Err[E]
"""Either a value (Ok) or an error (Err)."""

NoneResult = Ok[None] | Err[E]
"""Result without a value."""
