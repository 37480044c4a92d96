from typing import TypeVar

from cantilever.exceptions import CantileverError
from common.result import NoneResult, Result

T = TypeVar("T")

CantileverResult = Result[T, CantileverError]
"""Result with CantileverError as an error type."""

NoneCantileverResult = NoneResult[CantileverError]
"""NoneResult with CantileverError as an error type."""
