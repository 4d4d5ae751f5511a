"""Shared error types and small array helpers for Flex-O."""
from __future__ import annotations

from typing import Optional

import numpy as np


class FlexoError(Exception):
    """Base class for every error raised by the toolkit."""
    pass


class DimensionError(FlexoError, ValueError):
    """Raised when vector or matrix shapes do not agree."""
    pass


class DomainError(FlexoError, ValueError):
    """Raised when a value lies outside the domain an operation accepts."""
    pass


class InvalidScenarioError(FlexoError):
    """Raised when a scenario document fails validation."""
    pass


class OracleCapExceededError(FlexoError):
    """Raised when the vertex oracle is asked to enumerate too many users."""

    def __init__(self, n: int, cap: int):
        super().__init__(f"vertex oracle refuses n={n}: cap is n <= {cap} (2^n vertices)")
        self.n = n
        self.cap = cap


class ReferenceNonConvergenceError(FlexoError):
    """Raised when the reference equilibrium iteration does not settle."""

    def __init__(self, residual: float, iterations: int):
        super().__init__(
            f"reference equilibrium did not converge: step residual {residual:.3e} "
            f"after {iterations} iterations"
        )
        self.residual = residual
        self.iterations = iterations


class StageError(FlexoError):
    """Raised when one stage of the Flex-O pipeline fails."""

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"stage '{stage}' failed: {cause}")
        self.stage = stage
        self.cause = cause


class UnknownCommandError(FlexoError):
    """Raised when an experiment name is not recognised."""
    pass


def as_vector(values, name: str, size: Optional[int] = None) -> np.ndarray:
    """Return a read-only float vector, checking its length when given."""
    array = np.array(values, dtype=float)
    if array.ndim > 1:
        raise DimensionError(f"{name} must be one-dimensional")
    array = array.reshape(-1)
    if size is not None and array.shape[0] != size:
        raise DimensionError(f"{name} has length {array.shape[0]}, expected {size}")
    array.setflags(write=False)
    return array


def as_matrix(values, name: str, columns: int) -> np.ndarray:
    """Return a read-only float matrix with the given column count (zero rows allowed)."""
    array = np.array(values, dtype=float)
    if array.size == 0:
        array = np.zeros((0, columns))
    if array.ndim != 2 or array.shape[1] != columns:
        raise DimensionError(f"{name} must have shape (c, {columns}), got {array.shape}")
    array.setflags(write=False)
    return array
